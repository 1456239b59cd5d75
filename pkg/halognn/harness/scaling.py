from __future__ import annotations

import logging
import typing
from dataclasses import astuple, dataclass, field

import numpy as np
import psutil

from halognn import errors
from halognn.comm.collectives import ExchangeMode
from halognn.comm.runtime import RankRuntime
from halognn.gnn.config import GnnConfig, Preset, TrainConfig
from halognn.gnn.train import DistributedTrainer
from halognn.graph.graph import ReducedGraph
from halognn.graph.stats import halo_stats
from halognn.harness.data import prepare_graphs
from halognn.mesh.box import MeshConfig
from halognn.mesh.partition import block_factors

log = logging.getLogger(__name__)

MAX_ORDER = 7
# upper bound on efficiency and relative throughput
RATIO_CEILING = 1.05


@dataclass(slots=True, frozen=True)
class ScalingConfig:
    loading: int  # target local nodes per rank
    ranks: tuple[int, ...]
    models: tuple[Preset, ...] = ("small",)
    modes: tuple[ExchangeMode, ...] = ("none", "a2a", "na2a")
    iterations: int = 2
    warmup: int = 1
    seed: int = 0
    max_memory_bytes: float = 32e9

    def __post_init__(self):
        if self.loading < 1 or not self.ranks or min(self.ranks) < 1:
            raise errors.SizeError(f"Invalid scaling setup: loading={self.loading}, ranks={self.ranks}")
        if self.iterations < 1 or self.warmup < 0:
            raise errors.SizeError(f"Invalid iterations={self.iterations} / warmup={self.warmup}")


def _local_nodes(E: int, p: int, factors: tuple[int, int, int]) -> int:
    return int(np.prod([E // f * p + 1 for f in factors]))


def choose_mesh(loading: int, num_ranks: int, max_order: int = MAX_ORDER, order: int | None = None) -> MeshConfig:
    """Unit-box mesh whose block partition over R ranks gives close to `loading` local nodes per rank.

    Candidates are (E, p) with p <= max_order and E divisible by the rank grid; ties prefer the smaller E.
    A fixed `order` restricts the search to E.
    """
    if order is not None and not 1 <= order <= max_order:
        raise errors.SizeError(f"Invalid {order=}: expected 1 <= order <= {max_order}")
    best: tuple[float, int, int] | None = None
    for p in range(1, max_order + 1) if order is None else (order,):
        for E in range(1, 257):
            try:
                factors = block_factors(num_ranks, E)
            except errors.PartitionError:
                continue
            nodes = _local_nodes(E, p, factors)
            error = abs(nodes - loading) / loading
            if best is None or (error, E) < (best[0], best[1]):
                best = (error, E, p)
            if nodes > loading:
                break
    if best is None:
        orders = f"order {order}" if order is not None else f"order <= {max_order}"
        raise errors.SizeError(f"No mesh with {orders} can be split onto {num_ranks} ranks")
    _, E, p = best
    return MeshConfig(elements_per_axis=E, poly_order=p)


def estimate_memory(mesh: MeshConfig, config: GnnConfig) -> float:
    """Rough upper estimate of tape bytes for one training iteration."""
    n = mesh.lattice_size
    edges = 2 * 3 * n * n * (n - 1)
    nodes = n**3
    k = config.mlp_hidden_layers
    # H-wide arrays kept alive per row and layer: gathers, concat and the mlp intermediates
    per_layer = (8 + 5 * k) * edges + (5 + 5 * k) * nodes
    return 8.0 * config.hidden_dim * per_layer * (config.num_mp_layers + 1)


def available_memory() -> float:
    """Bytes this process can still allocate: free physical memory, capped by the address-space limit."""
    available = float(psutil.virtual_memory().available)
    if hasattr(psutil, "RLIMIT_AS"):
        soft, _ = psutil.Process().rlimit(psutil.RLIMIT_AS)
        if soft != psutil.RLIM_INFINITY:
            available = min(available, float(soft - psutil.Process().memory_info().vms))
    return max(available, 0.0)


def _memory_budget(scaling: ScalingConfig) -> float:
    return min(scaling.max_memory_bytes, available_memory())


@dataclass(slots=True, frozen=True)
class ScalingRow:
    num_ranks: int
    model: Preset
    mode: ExchangeMode
    elements: int
    order: int
    nodes: int  # local nodes summed over ranks
    seconds_per_iteration: float  # simulated
    throughput: float  # nodes / simulated second
    efficiency: float  # per-rank throughput relative to the smallest R
    relative_throughput: float  # vs mode "none" at the same (R, model)
    halo_min: int
    halo_max: int
    halo_avg: float
    neighbors_min: int
    neighbors_max: int
    neighbors_avg: float
    halo_calls: int  # per iteration
    bytes_halo: int  # per iteration, all ranks
    bytes_allreduce: int

    CSV_HEADER: typing.ClassVar[tuple[str, ...]] = (
        "ranks",
        "model",
        "mode",
        "elements",
        "order",
        "nodes",
        "sim_seconds_per_iteration",
        "nodes_per_second",
        "efficiency",
        "relative_throughput",
        "halo_min",
        "halo_max",
        "halo_avg",
        "neighbors_min",
        "neighbors_max",
        "neighbors_avg",
        "halo_calls",
        "bytes_halo",
        "bytes_allreduce",
    )

    def as_tuple(self) -> tuple:
        return astuple(self)


@dataclass(slots=True, frozen=True)
class ScalingReport:
    config: ScalingConfig
    rows: tuple[ScalingRow, ...] = field(default_factory=tuple)

    def find(self, num_ranks: int, model: Preset, mode: ExchangeMode) -> ScalingRow:
        for row in self.rows:
            if (row.num_ranks, row.model, row.mode) == (num_ranks, model, mode):
                return row
        raise KeyError((num_ranks, model, mode))

    def byte_violations(self) -> list[str]:
        """Rows where neighbor-only exchange is not cheaper than (or equal to) the padded all-to-all."""
        violations = []
        for row in self.rows:
            if row.mode != "na2a" or "a2a" not in self.config.modes:
                continue
            padded = self.find(row.num_ranks, row.model, "a2a")
            if row.bytes_halo > padded.bytes_halo or (
                row.neighbors_min < row.num_ranks - 1 and row.bytes_halo >= padded.bytes_halo
            ):
                violations.append(f"R={row.num_ranks} {row.model}: na2a {row.bytes_halo} B vs a2a {padded.bytes_halo} B")
        return violations

    def bound_violations(self) -> list[str]:
        """Rows whose efficiency or relative throughput falls outside (0, RATIO_CEILING]."""
        violations = []
        for row in self.rows:
            for name in ("efficiency", "relative_throughput"):
                value = getattr(row, name)
                if np.isnan(value) and name == "relative_throughput":
                    continue
                if not 0.0 < value <= RATIO_CEILING:
                    violations.append(f"R={row.num_ranks} {row.model} {row.mode}: {name}={value:.4f}")
        return violations


def _timed_run(graphs: list[ReducedGraph], config: GnnConfig, scaling: ScalingConfig):
    runtime = RankRuntime(len(graphs))
    train = TrainConfig(iterations=scaling.iterations, seed=scaling.seed, audit_interval=0, log_interval=0)
    trainer = DistributedTrainer(runtime, graphs, config, train)
    trainer.run(scaling.warmup)
    runtime.reset()
    trainer.run(scaling.iterations)
    return runtime.clock.total() / scaling.iterations, runtime.report()


def weak_scaling(scaling: ScalingConfig) -> ScalingReport:
    """Train every (R, model, mode) for a few iterations at constant per-rank loading on simulated ranks.

    Every R uses the polynomial order chosen for the smallest R, so per-rank work stays comparable across the sweep.
    All memory estimates are checked before any mesh is built.
    """
    order = choose_mesh(scaling.loading, min(scaling.ranks)).poly_order
    meshes = {R: choose_mesh(scaling.loading, R, order=order) for R in sorted(scaling.ranks)}
    budget = _memory_budget(scaling)
    for R, mesh in meshes.items():
        for model in scaling.models:
            needed = estimate_memory(mesh, GnnConfig.preset(model))
            log.info(f"R={R} {model}: E={mesh.elements_per_axis} p={mesh.poly_order}, estimated {needed / 1e9:.2f} GB")
            if needed > budget:
                raise errors.SizeError(
                    f"R={R} {model}: estimated {needed / 1e9:.1f} GB exceeds the {budget / 1e9:.1f} GB available"
                )

    process = psutil.Process()
    measured = {}
    for R, mesh in meshes.items():
        graph_cache: dict[str, list[ReducedGraph]] = {}
        for model in scaling.models:
            for mode in scaling.modes:
                config = GnnConfig.preset(model, exchange_mode=mode)
                try:
                    if config.edge_features not in graph_cache:
                        graph_cache[config.edge_features] = prepare_graphs(mesh, R, "block", config.edge_features)
                    graphs = graph_cache[config.edge_features]
                    seconds, report = _timed_run(graphs, config, scaling)
                except MemoryError as e:
                    raise errors.SizeError(f"R={R} {model} {mode}: out of memory") from e
                measured[(R, model, mode)] = (mesh, graphs, seconds, report)
                rss = process.memory_info().rss / 1e9
                log.info(f"R={R} {model} {mode}: {seconds * 1e3:.1f} simulated ms per iteration, rss {rss:.2f} GB")

    smallest = min(scaling.ranks)
    rows = []
    for (R, model, mode), (mesh, graphs, seconds, report) in measured.items():
        nodes = sum(g.num_local for g in graphs)
        throughput = nodes / seconds
        _, base_graphs, base_seconds, _ = measured[(smallest, model, mode)]
        base_per_rank = sum(g.num_local for g in base_graphs) / base_seconds / smallest
        baseline = measured.get((R, model, "none"))
        stats = halo_stats(graphs)
        rows.append(
            ScalingRow(
                num_ranks=R,
                model=model,
                mode=mode,
                elements=mesh.elements_per_axis,
                order=mesh.poly_order,
                nodes=nodes,
                seconds_per_iteration=seconds,
                throughput=throughput,
                efficiency=throughput / R / base_per_rank,
                relative_throughput=baseline[2] / seconds if baseline is not None else float("nan"),
                halo_min=stats.summary("halo")[0],
                halo_max=stats.summary("halo")[1],
                halo_avg=stats.summary("halo")[2],
                neighbors_min=stats.summary("neighbors")[0],
                neighbors_max=stats.summary("neighbors")[1],
                neighbors_avg=stats.summary("neighbors")[2],
                halo_calls=report.halo_calls // scaling.iterations,
                bytes_halo=report.halo_bytes // scaling.iterations,
                bytes_allreduce=report.all_reduce_bytes // scaling.iterations,
            )
        )
    report = ScalingReport(config=scaling, rows=tuple(rows))
    for violation in report.byte_violations() + report.bound_violations():
        log.warning(violation)
    return report
