import functools
import logging

import numpy as np

from halognn import errors
from halognn.graph.graph import CollapseMap, ReducedGraph
from halognn.mesh.box import Mesh
from halognn.mesh.partition import PartitionMap

log = logging.getLogger(__name__)


@functools.cache
def _element_edges(p: int) -> np.ndarray:
    if p < 1:
        raise errors.InvalidOrderError(f"Invalid {p=}: polynomial order must be at least 1")
    n = p + 1
    l = np.arange(n**3)
    coords = np.stack([l % n, (l // n) % n, l // (n * n)], axis=1)
    # axis-stencil: connect each lattice point to its successor along x, y and z
    pairs = [np.stack([l[coords[:, axis] < p], l[coords[:, axis] < p] + n**axis], axis=1) for axis in range(3)]
    edges = np.concatenate(pairs)
    edges.setflags(write=False)
    return edges


def element_edges(p: int) -> np.ndarray:
    """Undirected (a, b) local lattice index pairs of one element's edges, 3 p (p+1)^2 in total."""
    return _element_edges(p)


def assemble_rank_graph(mesh: Mesh, part: PartitionMap, rank: int) -> tuple[ReducedGraph, CollapseMap]:
    """Concatenate the rank's element graphs and collapse its local coincident nodes."""
    if not 0 <= rank < part.num_ranks:
        raise errors.EmptyPartitionError(f"Invalid {rank=}: expected a rank in [0, {part.num_ranks})")
    elements = part.elements_of(rank)
    if len(elements) == 0:
        raise errors.EmptyPartitionError(f"Rank {rank} owns no elements")

    npe = mesh.config.nodes_per_element
    raw_ids = mesh.global_ids[elements].ravel()
    raw_positions = mesh.node_positions[elements].reshape(-1, 3)

    # owner of a coincident group = its first raw slot (element order, then lattice order)
    unique_ids, first, inverse = np.unique(raw_ids, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    reduced_of_unique = np.empty_like(order)
    reduced_of_unique[order] = np.arange(len(order))
    raw_to_reduced = reduced_of_unique[inverse.ravel()]

    # element edges offset per raw element block, then relabelled onto reduced nodes
    local_edges = element_edges(mesh.config.poly_order)
    raw_edges = (np.arange(len(elements))[:, None, None] * npe + local_edges[None]).reshape(-1, 2)
    reduced_edges = raw_to_reduced[raw_edges]
    undirected = np.unique(np.sort(reduced_edges, axis=1), axis=0)
    adjacency = np.concatenate([undirected, undirected[:, ::-1]]).astype(np.int64)

    num_local = len(unique_ids)
    graph = ReducedGraph(
        rank=rank,
        num_local=num_local,
        num_halo=0,
        positions=raw_positions[first[order]],
        global_ids=unique_ids[order].astype(np.int64),
        adjacency=adjacency,
        node_degree=np.ones(num_local, dtype=np.int64),
        edge_degree=np.ones(len(adjacency), dtype=np.int64),
    )
    log.debug(
        f"Rank {rank}: {len(elements)} elements, {len(raw_ids)} raw -> {num_local} local nodes, "
        f"{len(raw_edges)} raw -> {len(undirected)} undirected edges"
    )
    return graph, CollapseMap(elements=elements, raw_to_reduced=raw_to_reduced.astype(np.int64))
