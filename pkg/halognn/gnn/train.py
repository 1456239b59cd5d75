from __future__ import annotations

import csv
import logging
import os
import time
import typing
from dataclasses import dataclass, field

import numpy as np

from halognn import errors
from halognn.comm.collectives import all_reduce_sum
from halognn.comm.runtime import RankRuntime
from halognn.gnn.config import GnnConfig, TrainConfig
from halognn.gnn.loss import consistent_loss
from halognn.gnn.model import forward, init_params
from halognn.graph.graph import ReducedGraph
from halognn.nn.optim import AdamConfig, AdamState, adam_step
from halognn.nn.params import ModelParams

log = logging.getLogger(__name__)

TRACE_HEADER = ("iteration", "loss", "wall_ms", "bytes_halo", "bytes_allreduce")


def default_targets(graphs: typing.Sequence[ReducedGraph]) -> list[np.ndarray]:
    """Autoencoding targets: each rank's local input node features."""
    targets = []
    for g in graphs:
        if g.node_features is None:
            raise errors.UninitializedError(f"Rank {g.rank} graph has no node features to use as targets")
        targets.append(g.node_features[: g.num_local])
    return targets


def evaluate(
    runtime: RankRuntime,
    params: ModelParams | typing.Sequence[ModelParams],
    graphs: typing.Sequence[ReducedGraph],
    config: GnnConfig,
) -> list[np.ndarray]:
    """Per-rank local outputs without any backward pass."""
    return forward(runtime, params, graphs, config).output_values()


@dataclass(slots=True, frozen=True, eq=False)
class GradientResult:
    loss: float
    outputs: list[np.ndarray]
    grads: list[ModelParams]  # averaged, one (identical) copy per rank


def compute_gradients(
    runtime: RankRuntime,
    params: ModelParams | typing.Sequence[ModelParams],
    graphs: typing.Sequence[ReducedGraph],
    config: GnnConfig,
    targets: typing.Sequence[np.ndarray] | None = None,
) -> GradientResult:
    """Forward, consistent loss, backward and a bucketed gradient AllReduce divided by R.

    Every rank seeds its (identical) loss with 1, so the loss AllReduce adjoint hands each rank R times its share;
    the rank sum divided by R is then the gradient of the global loss.
    """
    targets = default_targets(graphs) if targets is None else targets
    result = forward(runtime, params, graphs, config)
    losses = consistent_loss(runtime, result.outputs, targets, [g.node_degree for g in graphs], result.tape)
    result.tape.backward([(loss, 1.0) for loss in losses])

    local = [ModelParams.from_grads(p) for p in result.params]
    buckets = all_reduce_sum(runtime, [g.flatten() for g in local])
    R = runtime.num_ranks
    grads = [local[r].unflatten(buckets[r] / R) for r in range(R)]
    return GradientResult(loss=float(losses[0].value), outputs=result.output_values(), grads=grads)


def train_step(
    runtime: RankRuntime,
    replicas: typing.Sequence[ModelParams],
    states: typing.Sequence[AdamState],
    graphs: typing.Sequence[ReducedGraph],
    config: GnnConfig,
    adam: AdamConfig = AdamConfig(),
    targets: typing.Sequence[np.ndarray] | None = None,
) -> tuple[list[ModelParams], list[AdamState], float]:
    """One synchronized data-parallel step; replicas stay identical when they enter identical."""
    result = compute_gradients(runtime, replicas, graphs, config, targets)
    updated = []
    for r, (p, g, s) in enumerate(zip(replicas, result.grads, states)):
        with runtime.clock.compute(r):
            updated.append(adam_step(p, g, s, adam))
    runtime.clock.barrier()
    runtime.advance_step()
    return [p for p, _ in updated], [s for _, s in updated], result.loss


@dataclass(slots=True, frozen=True)
class TraceRow:
    iteration: int
    loss: float
    wall_ms: float
    bytes_halo: int
    bytes_allreduce: int


@dataclass(slots=True)
class LossTrace:
    rows: list[TraceRow] = field(default_factory=list)

    @property
    def losses(self) -> np.ndarray:
        return np.array([row.loss for row in self.rows])

    def to_csv(self, path: str | os.PathLike, seed: int | None = None) -> None:
        with open(path, "w", newline="") as f:
            if seed is not None:
                f.write(f"# seed={seed}\n")
            writer = csv.writer(f)
            writer.writerow(TRACE_HEADER)
            for row in self.rows:
                writer.writerow((row.iteration, repr(row.loss), f"{row.wall_ms:.3f}", row.bytes_halo, row.bytes_allreduce))


class DistributedTrainer:
    """Per-rank model replicas and optimizer states stepped in lockstep.

    Replica equality is audited every `audit_interval` steps; any bitwise difference raises `DivergenceError`.
    """

    def __init__(
        self,
        runtime: RankRuntime,
        graphs: typing.Sequence[ReducedGraph],
        config: GnnConfig,
        train: TrainConfig = TrainConfig(),
        params: ModelParams | None = None,
        targets: typing.Sequence[np.ndarray] | None = None,
    ):
        self.runtime = runtime
        self.graphs = list(graphs)
        self.config = config
        self.train = train
        self.targets = default_targets(graphs) if targets is None else list(targets)
        initial = params if params is not None else init_params(config, train.seed)
        self.replicas = initial.replicate(runtime.num_ranks)
        self.states = [AdamState.zeros(initial) for _ in range(runtime.num_ranks)]
        self.iteration = 0
        self.trace = LossTrace()

    @property
    def params(self) -> ModelParams:
        return self.replicas[0]

    def audit(self) -> None:
        for r in range(1, len(self.replicas)):
            if not (self.replicas[r].equals(self.replicas[0]) and self.states[r].equals(self.states[0])):
                raise errors.DivergenceError(f"Rank {r} replica diverged from rank 0 at iteration {self.iteration}")

    def step(self) -> float:
        before = self.runtime.report()
        start = time.perf_counter()
        self.replicas, self.states, loss = train_step(
            self.runtime, self.replicas, self.states, self.graphs, self.config, self.train.adam(), self.targets
        )
        wall_ms = 1e3 * (time.perf_counter() - start)
        delta = self.runtime.report().diff(before)
        self.iteration += 1
        self.trace.rows.append(TraceRow(self.iteration, loss, wall_ms, delta.halo_bytes, delta.all_reduce_bytes))

        if self.train.audit_interval and self.iteration % self.train.audit_interval == 0:
            self.audit()
        if self.train.log_interval and self.iteration % self.train.log_interval == 0:
            log.info(f"Iteration {self.iteration}: loss={loss:.10e} ({wall_ms:.1f} ms)")
        return loss

    def run(self, iterations: int | None = None) -> LossTrace:
        for _ in range(iterations if iterations is not None else self.train.iterations):
            self.step()
        return self.trace
