from __future__ import annotations

import logging
import typing
from dataclasses import dataclass, field

import numpy as np

from halognn import errors
from halognn._utils.math import relative_deviation
from halognn.comm.collectives import ExchangeMode
from halognn.comm.runtime import RankRuntime
from halognn.gnn.config import GnnConfig, TrainConfig
from halognn.gnn.loss import consistent_loss
from halognn.gnn.model import init_params
from halognn.gnn.train import DistributedTrainer, compute_gradients, default_targets, evaluate
from halognn.graph.graph import ReducedGraph
from halognn.harness.data import prepare_graphs
from halognn.mesh.box import Mesh, MeshConfig, build_box_mesh
from halognn.mesh.partition import PartitionStrategy
from halognn.nn.gradcheck import gradient_check
from halognn.nn.params import ModelParams

log = logging.getLogger(__name__)

OUTPUT_TOLERANCE = 1e-12
GRADIENT_TOLERANCE = 1e-10
FD_TOLERANCE = 1e-6
TRACE_TOLERANCE = 1e-8


@dataclass(slots=True, frozen=True)
class OutputComparison:
    max_relative: float  # max |Y_R - Y_1| / max |Y_1|
    weighted_relative: float  # degree-weighted Frobenius norm of Y_R - Y_1 relative to |Y_1|
    coincident_bitwise: bool  # equal global ids carry bitwise-equal outputs on every rank


def compare_outputs(
    reference_graph: ReducedGraph,
    reference: np.ndarray,
    graphs: typing.Sequence[ReducedGraph],
    outputs: typing.Sequence[np.ndarray],
) -> OutputComparison:
    """Compare partitioned outputs with the unpartitioned ones, matched by global id."""
    num_global = int(reference_graph.local_global_ids.max()) + 1
    by_id = np.zeros((num_global, reference.shape[1]))
    by_id[reference_graph.local_global_ids] = reference

    first = np.full((num_global, reference.shape[1]), np.nan)
    max_dev, weighted, bitwise = 0.0, 0.0, True
    for g, y in zip(graphs, outputs):
        ids = g.local_global_ids
        dev = y - by_id[ids]
        max_dev = max(max_dev, float(np.max(np.abs(dev))) if dev.size else 0.0)
        weighted += float(np.sum(dev**2 / g.node_degree[:, None]))
        seen = ~np.isnan(first[ids, 0])
        bitwise &= bool(np.array_equal(first[ids[seen]], y[seen]))
        first[ids[~seen]] = y[~seen]

    scale = float(np.max(np.abs(reference)))
    norm = float(np.sqrt(np.sum(reference**2)))
    return OutputComparison(
        max_relative=max_dev / scale if scale > 0 else max_dev,
        weighted_relative=np.sqrt(weighted) / norm if norm > 0 else np.sqrt(weighted),
        coincident_bitwise=bitwise,
    )


def _loss(runtime: RankRuntime, graphs: typing.Sequence[ReducedGraph], outputs: typing.Sequence[np.ndarray]) -> float:
    losses = consistent_loss(runtime, outputs, default_targets(graphs), [g.node_degree for g in graphs])
    return float(losses[0].value)


@dataclass(slots=True, frozen=True)
class ConsistencyRow:
    num_ranks: int
    loss_consistent: float
    loss_inconsistent: float
    loss_deviation: float  # consistent mode, relative to R = 1
    loss_deviation_inconsistent: float
    output_deviation: float  # consistent mode, max relative
    output_deviation_inconsistent: float  # degree-weighted relative
    coincident_bitwise: bool

    CSV_HEADER: typing.ClassVar[tuple[str, ...]] = (
        "ranks",
        "loss_consistent",
        "loss_inconsistent",
        "loss_deviation",
        "loss_deviation_inconsistent",
        "output_deviation",
        "output_deviation_inconsistent",
        "coincident_bitwise",
    )

    def as_tuple(self) -> tuple:
        return (
            self.num_ranks,
            self.loss_consistent,
            self.loss_inconsistent,
            self.loss_deviation,
            self.loss_deviation_inconsistent,
            self.output_deviation,
            self.output_deviation_inconsistent,
            int(self.coincident_bitwise),
        )


@dataclass(slots=True, frozen=True)
class ConsistencyReport:
    """Per-R losses and output deviations in consistent and inconsistent (no exchange) modes."""

    rows: tuple[ConsistencyRow, ...]
    mode: ExchangeMode
    seed: int
    tolerance: float = OUTPUT_TOLERANCE
    gradient_deviations: dict[int, float] = field(default_factory=dict)

    def failures(self) -> list[str]:
        failures = []
        for row in self.rows:
            if row.loss_deviation > self.tolerance or row.output_deviation > self.tolerance:
                failures.append(f"R={row.num_ranks}: consistent-mode deviation above {self.tolerance:g}")
            if not row.coincident_bitwise:
                failures.append(f"R={row.num_ranks}: coincident outputs differ across ranks")
        partitioned = [row for row in self.rows if row.num_ranks > 1]
        for row in partitioned:
            if row.output_deviation_inconsistent <= 0.0:
                failures.append(f"R={row.num_ranks}: inconsistent mode shows no deviation")
        deviations = [row.output_deviation_inconsistent for row in sorted(partitioned, key=lambda r: r.num_ranks)]
        if any(b < a for a, b in zip(deviations, deviations[1:])):
            failures.append(f"Inconsistent-mode deviation is not nondecreasing in R: {deviations}")
        for R, deviation in self.gradient_deviations.items():
            if deviation > GRADIENT_TOLERANCE:
                failures.append(f"R={R}: gradient deviation {deviation:.3e} above {GRADIENT_TOLERANCE:g}")
        return failures

    @property
    def passed(self) -> bool:
        return not self.failures()


def verify_consistency(
    mesh: Mesh | MeshConfig,
    ranks: typing.Sequence[int],
    config: GnnConfig,
    seed: int = 0,
    strategy: PartitionStrategy = "block",
    tolerance: float = OUTPUT_TOLERANCE,
) -> ConsistencyReport:
    """Evaluate one randomly initialized model at every R and compare with R = 1, with and without exchange."""
    mesh = build_box_mesh(mesh) if isinstance(mesh, MeshConfig) else mesh
    mode: ExchangeMode = config.exchange_mode if config.exchange_mode != "none" else "na2a"
    consistent, inconsistent = config.with_mode(mode), config.with_mode("none")
    params = init_params(config, seed)

    reference_graphs = prepare_graphs(mesh, 1, strategy, config.edge_features)
    reference = evaluate(RankRuntime(1), params, reference_graphs, consistent)[0]
    reference_loss = _loss(RankRuntime(1), reference_graphs, [reference])

    rows = []
    for R in ranks:
        graphs = reference_graphs if R == 1 else prepare_graphs(mesh, R, strategy, config.edge_features)
        outputs = {}
        losses = {}
        for name, cfg in (("consistent", consistent), ("inconsistent", inconsistent)):
            runtime = RankRuntime(R)
            outputs[name] = evaluate(runtime, params, graphs, cfg)
            losses[name] = _loss(runtime, graphs, outputs[name])
        good = compare_outputs(reference_graphs[0], reference, graphs, outputs["consistent"])
        bad = compare_outputs(reference_graphs[0], reference, graphs, outputs["inconsistent"])
        row = ConsistencyRow(
            num_ranks=R,
            loss_consistent=losses["consistent"],
            loss_inconsistent=losses["inconsistent"],
            loss_deviation=relative_deviation(losses["consistent"], reference_loss),
            loss_deviation_inconsistent=relative_deviation(losses["inconsistent"], reference_loss),
            output_deviation=good.max_relative,
            output_deviation_inconsistent=bad.weighted_relative,
            coincident_bitwise=good.coincident_bitwise,
        )
        log.info(
            f"R={R}: loss {row.loss_consistent:.15e} (rel dev {row.loss_deviation:.2e}), "
            f"no-exchange loss rel dev {row.loss_deviation_inconsistent:.2e}"
        )
        rows.append(row)

    report = ConsistencyReport(rows=tuple(rows), mode=mode, seed=seed, tolerance=tolerance)
    for failure in report.failures():
        log.warning(failure)
    return report


@dataclass(slots=True, frozen=True)
class GradientReport:
    num_ranks: int
    max_deviation: float  # vs R = 1, max over tensors of the relative deviation
    fd_error: float  # max relative error of the finite-difference spot check
    deterministic: bool  # two repeated runs gave bitwise-identical gradients

    @property
    def passed(self) -> bool:
        return self.max_deviation <= GRADIENT_TOLERANCE and self.fd_error <= FD_TOLERANCE and self.deterministic


def gradient_deviation(grads: ModelParams, reference: ModelParams) -> float:
    return max(relative_deviation(grads[name], ref) for name, ref in reference.items())


def verify_gradients(
    mesh: Mesh | MeshConfig,
    num_ranks: int,
    config: GnnConfig,
    seed: int = 0,
    strategy: PartitionStrategy = "block",
    num_checks: int = 10,
    step: float = 1e-5,
) -> GradientReport:
    """Compare R-rank gradients with R = 1 and spot-check them against central finite differences."""
    if config.exchange_mode == "none":
        raise errors.ModelConfigError("Gradient verification needs a consistent exchange mode (a2a or na2a), got 'none'")
    mesh = build_box_mesh(mesh) if isinstance(mesh, MeshConfig) else mesh
    params = init_params(config, seed)
    reference_graphs = prepare_graphs(mesh, 1, strategy, config.edge_features)
    reference = compute_gradients(RankRuntime(1), params, reference_graphs, config).grads[0]

    graphs = prepare_graphs(mesh, num_ranks, strategy, config.edge_features)
    first = compute_gradients(RankRuntime(num_ranks), params, graphs, config).grads
    second = compute_gradients(RankRuntime(num_ranks), params, graphs, config).grads
    deterministic = all(a.equals(b) for a, b in zip(first, second)) and all(g.equals(first[0]) for g in first)

    def loss(p: ModelParams) -> float:
        runtime = RankRuntime(num_ranks)
        return _loss(runtime, graphs, evaluate(runtime, p, graphs, config))

    report = GradientReport(
        num_ranks=num_ranks,
        max_deviation=gradient_deviation(first[0], reference),
        fd_error=gradient_check(loss, params, first[0], k=num_checks, step=step, seed=seed),
        deterministic=deterministic,
    )
    log.info(
        f"R={num_ranks}: gradient deviation vs R=1 {report.max_deviation:.2e}, "
        f"finite-difference error {report.fd_error:.2e}, deterministic={report.deterministic}"
    )
    return report


@dataclass(slots=True, frozen=True, eq=False)
class EquivalenceReport:
    """Loss traces at R = 1 and at R with and without halo exchange."""

    num_ranks: int
    reference: np.ndarray
    consistent: np.ndarray
    inconsistent: np.ndarray

    @property
    def consistent_deviation(self) -> np.ndarray:
        return np.abs(self.consistent - self.reference) / np.abs(self.reference)

    @property
    def inconsistent_deviation(self) -> np.ndarray:
        return np.abs(self.inconsistent - self.reference) / np.abs(self.reference)

    @property
    def passed(self) -> bool:
        return bool(np.all(self.consistent_deviation <= TRACE_TOLERANCE))

    def rows(self) -> list[tuple[int, float, float, float, float, float]]:
        return [
            (i + 1, ref, good, bad, dg, db)
            for i, (ref, good, bad, dg, db) in enumerate(
                zip(self.reference, self.consistent, self.inconsistent, self.consistent_deviation, self.inconsistent_deviation)
            )
        ]


def training_equivalence(
    mesh: Mesh | MeshConfig,
    num_ranks: int,
    config: GnnConfig,
    train: TrainConfig = TrainConfig(),
    strategy: PartitionStrategy = "block",
) -> EquivalenceReport:
    """Train from the same initialization at R = 1 and at R (consistent and no-exchange modes)."""
    mesh = build_box_mesh(mesh) if isinstance(mesh, MeshConfig) else mesh
    mode: ExchangeMode = config.exchange_mode if config.exchange_mode != "none" else "na2a"
    params = init_params(config, train.seed)

    def trace(R: int, cfg: GnnConfig) -> np.ndarray:
        graphs = prepare_graphs(mesh, R, strategy, cfg.edge_features)
        trainer = DistributedTrainer(RankRuntime(R), graphs, cfg, train, params=params)
        return trainer.run().losses

    report = EquivalenceReport(
        num_ranks=num_ranks,
        reference=trace(1, config.with_mode(mode)),
        consistent=trace(num_ranks, config.with_mode(mode)),
        inconsistent=trace(num_ranks, config.with_mode("none")),
    )
    log.info(
        f"R={num_ranks}: max trace deviation {report.consistent_deviation.max():.2e} with exchange, "
        f"{report.inconsistent_deviation.max():.2e} without"
    )
    return report
