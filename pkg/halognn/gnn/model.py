"""Lockstep forward pass of the encode-process-decode GNN over all simulated ranks."""
import logging
import typing
from dataclasses import dataclass

import numpy as np

from halognn import errors
from halognn.comm.exchange import halo_exchange
from halognn.comm.runtime import RankRuntime
from halognn.gnn.config import GnnConfig
from halognn.graph.graph import ReducedGraph
from halognn.nn import ops
from halognn.nn.mlp import apply_mlp, init_mlp
from halognn.nn.params import ModelParams
from halognn.nn.tape import Tape, Var, constant

log = logging.getLogger(__name__)

RankParams = dict[str, Var]


def init_params(config: GnnConfig, seed: int = 0) -> ModelParams:
    """Seeded initialization of every MLP in a fixed order (bitwise reproducible)."""
    rng = np.random.default_rng(seed)
    tensors: dict[str, np.ndarray] = {}
    for prefix, spec in config.mlp_specs().items():
        tensors.update(init_mlp(spec, rng, prefix))
    return ModelParams(tensors)


def encode(tape: Tape, params: RankParams, config: GnnConfig, x: Var, e: Var) -> tuple[Var, Var]:
    """Lift node and edge features to N_H channels; purely rank-local, halo rows included."""
    specs = config.mlp_specs()
    return (
        apply_mlp(tape, params, specs["node_encoder"], x, "node_encoder"),
        apply_mlp(tape, params, specs["edge_encoder"], e, "edge_encoder"),
    )


def _aggregate(tape: Tape, params: RankParams, config: GnnConfig, layer: int, graph: ReducedGraph, x: Var, e: Var):
    """Edge update on every directed edge, then degree-scaled sum onto receivers (halo rows stay zero)."""
    spec = config.mlp_specs()[f"mp{layer}.edge"]
    x_i = ops.gather_rows(tape, x, graph.receivers)
    x_j = ops.gather_rows(tape, x, graph.senders)
    e_new = apply_mlp(tape, params, spec, ops.concat_cols(tape, x_i, x_j, e), f"mp{layer}.edge")
    scaled = ops.scale_rows(tape, e_new, 1.0 / graph.edge_degree)
    return ops.scatter_sum_rows(tape, scaled, graph.receivers, graph.num_nodes), e_new


def _update(tape: Tape, params: RankParams, config: GnnConfig, layer: int, a: Var, x: Var) -> Var:
    spec = config.mlp_specs()[f"mp{layer}.node"]
    x_local = ops.slice_rows(tape, x, a.shape[0]) if x.shape[0] != a.shape[0] else x
    return apply_mlp(tape, params, spec, ops.concat_cols(tape, a, x_local), f"mp{layer}.node")


def consistent_nmp_layer(
    runtime: RankRuntime,
    tape: Tape,
    params: typing.Sequence[RankParams],
    config: GnnConfig,
    layer: int,
    graphs: typing.Sequence[ReducedGraph],
    xs: typing.Sequence[Var],
    es: typing.Sequence[Var],
) -> tuple[list[Var], list[Var]]:
    """One message-passing layer on every rank; returns local-row node features and updated edge features.

    With an exchange mode, each rank's aggregates are completed by the partial aggregates of the other owners of its
    coincident nodes, summed in ascending owner-rank order.
    """
    mode = config.exchange_mode
    if mode != "none" and any(g.halo is None or g.sync_table is None for g in graphs):
        raise errors.ModelConfigError(f"Exchange mode '{mode}' requires halo structures on every rank")

    aggregates, edges = [], []
    for r, graph in enumerate(graphs):
        with tape.rank(r):
            a, e_new = _aggregate(tape, params[r], config, layer, graph, xs[r], es[r])
        aggregates.append(a)
        edges.append(e_new)

    if mode != "none":
        aggregates = halo_exchange(runtime, tape, mode, graphs, aggregates)

    nodes = []
    for r, graph in enumerate(graphs):
        with tape.rank(r):
            if mode != "none":
                a = ops.sync_sum(tape, aggregates[r], graph.sync_table)  # type: ignore
            else:
                a = ops.slice_rows(tape, aggregates[r], graph.num_local)
            nodes.append(_update(tape, params[r], config, layer, a, xs[r]))
    return nodes, edges


def decode(tape: Tape, params: RankParams, config: GnnConfig, x: Var, num_local: int) -> Var:
    """Per-row output MLP on local rows; halo rows are discarded."""
    if x.shape[0] != num_local:
        x = ops.slice_rows(tape, x, num_local)
    return apply_mlp(tape, params, config.mlp_specs()["decoder"], x, "decoder")


@dataclass(slots=True, eq=False)
class ForwardPass:
    """Per-rank parameter variables and outputs of one lockstep forward pass."""

    tape: Tape
    params: list[RankParams]
    outputs: list[Var]

    def output_values(self) -> list[np.ndarray]:
        return [y.value for y in self.outputs]


def _check_inputs(config: GnnConfig, graphs: typing.Sequence[ReducedGraph]) -> None:
    for g in graphs:
        if g.node_features is None or g.edge_features is None:
            raise errors.UninitializedError(f"Rank {g.rank} graph has no node / edge features")
        if g.node_features.shape[1] != config.in_node_dim or g.edge_features.shape[1] != config.in_edge_dim:
            raise errors.ShapeError(
                f"Rank {g.rank} features have {g.node_features.shape[1]} / {g.edge_features.shape[1]} columns, "
                f"model expects {config.in_node_dim} / {config.in_edge_dim}"
            )


def forward(
    runtime: RankRuntime,
    params: ModelParams | typing.Sequence[ModelParams],
    graphs: typing.Sequence[ReducedGraph],
    config: GnnConfig,
    tape: Tape | None = None,
) -> ForwardPass:
    """encode -> M consistent NMP layers -> decode, on all ranks collectively."""
    if len(graphs) != runtime.num_ranks:
        raise errors.ModelConfigError(f"Got {len(graphs)} graphs for a runtime with {runtime.num_ranks} ranks")
    _check_inputs(config, graphs)
    replicas = [params] * len(graphs) if isinstance(params, ModelParams) else list(params)
    tape = tape if tape is not None else Tape(runtime.clock)
    rank_params = [p.as_vars() for p in replicas]

    xs, es = [], []
    for r, g in enumerate(graphs):
        with tape.rank(r):
            x, e = encode(tape, rank_params[r], config, constant(g.node_features), constant(g.edge_features))  # type: ignore
        xs.append(x)
        es.append(e)

    for layer in range(config.num_mp_layers):
        xs, es = consistent_nmp_layer(runtime, tape, rank_params, config, layer, graphs, xs, es)

    outputs = []
    for r, g in enumerate(graphs):
        with tape.rank(r):
            outputs.append(decode(tape, rank_params[r], config, xs[r], g.num_local))
    return ForwardPass(tape=tape, params=rank_params, outputs=outputs)
