import logging
import typing
from dataclasses import replace

import numpy as np

from halognn import errors
from halognn.graph.graph import HaloMap, ReducedGraph

log = logging.getLogger(__name__)


def _local_index(graph: ReducedGraph, ids: np.ndarray) -> np.ndarray:
    """Local row of each (present) global id."""
    local_ids = graph.local_global_ids
    sorter = np.argsort(local_ids)
    return sorter[np.searchsorted(local_ids, ids, sorter=sorter)]


def _check_positions(graphs: typing.Sequence[ReducedGraph]) -> None:
    ids = np.concatenate([g.local_global_ids for g in graphs])
    positions = np.concatenate([g.positions[: g.num_local] for g in graphs])
    _, first, inverse = np.unique(ids, return_index=True, return_inverse=True)
    reference = positions[first][inverse.ravel()]
    scale = max(float(np.max(np.abs(positions))), 1.0)
    mismatch = np.any(np.abs(positions - reference) > 1e-9 * scale, axis=1)
    if np.any(mismatch):
        raise errors.IntegrityError(
            f"Global ids {np.unique(ids[mismatch])[:5].tolist()} are shared by nodes at different positions"
        )


def compute_sync_table(graph: ReducedGraph) -> np.ndarray:
    """Rows contributing to each local node's synchronized sum, in ascending owner-rank order.

    Column c of row i holds the c-th owner's row of node i (its own row at its own rank position, halo rows for
    the others); missing owners point at the zero pad row `num_nodes`.
    """
    if graph.halo is None:
        raise errors.UninitializedError(f"Rank {graph.rank} has no halo map")
    halo = graph.halo
    nodes = [np.arange(graph.num_local), *halo.send_masks]
    owners = [np.full(graph.num_local, graph.rank), *(np.full(len(m), s) for s, m in zip(halo.neighbors, halo.send_masks))]
    rows = [np.arange(graph.num_local), *halo.recv_masks]
    nodes_, owners_, rows_ = (np.concatenate(a).astype(np.int64) for a in (nodes, owners, rows))

    order = np.lexsort((owners_, nodes_))
    nodes_, rows_ = nodes_[order], rows_[order]
    start = np.searchsorted(nodes_, nodes_, side="left")
    column = np.arange(len(nodes_)) - start

    width = int(column.max()) + 1 if len(column) else 1
    table = np.full((graph.num_local, width), graph.num_nodes, dtype=np.int64)
    table[nodes_, column] = rows_
    return table


def build_halo_structures(graphs: typing.Sequence[ReducedGraph]) -> list[ReducedGraph]:
    """Append halo rows, halo maps, node/edge degrees and sync tables to every rank's graph.

    Needs global visibility over all ranks' graphs (offline preprocessing).
    """
    R = len(graphs)
    for r, g in enumerate(graphs):
        if g.rank != r:
            raise errors.IntegrityError(f"Graph at position {r} belongs to rank {g.rank}")
        if g.num_halo != 0:
            raise errors.IntegrityError(f"Rank {r} graph already carries halo rows")
    _check_positions(graphs)

    all_ids = np.concatenate([g.local_global_ids for g in graphs])
    unique_ids, multiplicity = np.unique(all_ids, return_counts=True)
    num_global = int(unique_ids[-1]) + 1

    # global unordered edge keys; every rank lists each of its undirected edges once
    def edge_keys(g: ReducedGraph) -> np.ndarray:
        half = g.adjacency[: g.num_undirected_edges]
        a, b = g.global_ids[half[:, 0]], g.global_ids[half[:, 1]]
        return np.minimum(a, b) * num_global + np.maximum(a, b)

    keys = [edge_keys(g) for g in graphs]
    unique_keys, key_counts = np.unique(np.concatenate(keys), return_counts=True)

    # shared ids per ordered rank pair, ascending
    shared = {
        (r, s): np.intersect1d(graphs[r].local_global_ids, graphs[s].local_global_ids)
        for r in range(R)
        for s in range(r + 1, R)
    }

    result = []
    for r, g in enumerate(graphs):
        neighbors, send_masks, recv_masks, halo_ids, halo_positions = [], [], [], [], []
        offset = g.num_local
        for s in range(R):
            if s == r:
                continue
            ids = shared[(min(r, s), max(r, s))]
            if len(ids) == 0:
                continue
            neighbors.append(s)
            send_masks.append(_local_index(g, ids))
            recv_masks.append(np.arange(offset, offset + len(ids), dtype=np.int64))
            halo_ids.append(ids)
            halo_positions.append(graphs[s].positions[_local_index(graphs[s], ids)])
            offset += len(ids)

        num_halo = offset - g.num_local
        node_degree = multiplicity[np.searchsorted(unique_ids, g.local_global_ids)]
        half_degree = key_counts[np.searchsorted(unique_keys, keys[r])]

        node_features = g.node_features
        if node_features is not None:
            halo_rows = [graphs[s].node_features[_local_index(graphs[s], ids)] for s, ids in zip(neighbors, halo_ids)]  # type: ignore
            node_features = np.concatenate([node_features[: g.num_local], *halo_rows])

        updated = replace(
            g,
            num_halo=num_halo,
            positions=np.concatenate([g.positions[: g.num_local], *halo_positions]),
            global_ids=np.concatenate([g.local_global_ids, *halo_ids]).astype(np.int64),
            node_degree=node_degree.astype(np.int64),
            edge_degree=np.concatenate([half_degree, half_degree]).astype(np.int64),
            node_features=node_features,
            halo=HaloMap(
                rank=r,
                neighbors=tuple(neighbors),
                send_masks=tuple(m.astype(np.int64) for m in send_masks),
                recv_masks=tuple(recv_masks),
            ),
        )
        result.append(replace(updated, sync_table=compute_sync_table(updated)))
        log.debug(f"Rank {r}: {g.num_local} local nodes, {num_halo} halo nodes, {len(neighbors)} neighbors")

    return result
