import typing
from dataclasses import replace

import numpy as np

from halognn import errors
from halognn.graph.graph import ReducedGraph

EdgeFeatureSet = typing.Literal["full", "geometric"]


def _full(graph: ReducedGraph) -> np.ndarray:
    if graph.node_features is None:
        raise errors.UninitializedError(f"Rank {graph.rank} has no node features to difference")
    i, j = graph.receivers, graph.senders
    dx = graph.node_features[j] - graph.node_features[i]
    return np.concatenate([dx, _geometric(graph)], axis=1)


def _geometric(graph: ReducedGraph) -> np.ndarray:
    i, j = graph.receivers, graph.senders
    d = graph.positions[j] - graph.positions[i]
    return np.concatenate([d, np.linalg.norm(d, axis=1, keepdims=True)], axis=1)


_EDGE_FEATURES: dict[EdgeFeatureSet, typing.Callable[[ReducedGraph], np.ndarray]] = {
    "full": _full,
    "geometric": _geometric,
}
EDGE_FEATURE_DIMS: dict[EdgeFeatureSet, int] = {"full": 7, "geometric": 4}


def init_edge_features(graph: ReducedGraph, kind: EdgeFeatureSet = "full") -> np.ndarray:
    """Edge features of every directed (receiver i, sender j) entry.

    "full": x_j - x_i, pos_j - pos_i, |pos_j - pos_i|; "geometric": the last four columns only.
    """
    if kind not in _EDGE_FEATURES:
        raise errors.UninitializedError(f"Invalid {kind=}: expected one of {tuple(_EDGE_FEATURES)}")
    if graph.positions is None or len(graph.positions) < graph.num_local:
        raise errors.UninitializedError(f"Rank {graph.rank} has no node positions")
    return _EDGE_FEATURES[kind](graph)


def populate_features(
    graphs: typing.Sequence[ReducedGraph],
    local_features: typing.Sequence[np.ndarray],
    edge_features: EdgeFeatureSet = "full",
) -> list[ReducedGraph]:
    """Attach node features (halo rows copied from their source rows) and the derived edge features."""
    if len(local_features) != len(graphs):
        raise errors.IntegrityError(f"Got features for {len(local_features)} ranks, expected {len(graphs)}")
    local = []
    for g, x in zip(graphs, local_features):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or len(x) < g.num_local:
            raise errors.IntegrityError(f"Rank {g.rank} node features have shape {x.shape}, expected ({g.num_local}, F)")
        local.append(x[: g.num_local])

    result = []
    for g, x in zip(graphs, local):
        rows = [x]
        if g.halo is not None:
            for s, recv in zip(g.halo.neighbors, g.halo.recv_masks):
                source = graphs[s].halo
                if source is None:
                    raise errors.UninitializedError(f"Rank {s} has no halo map")
                rows.append(local[s][source.send_mask(g.rank)])
        features = np.concatenate(rows)
        updated = replace(g, node_features=features)
        result.append(replace(updated, edge_features=init_edge_features(updated, edge_features)))
    return result
