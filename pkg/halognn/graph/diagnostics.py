import typing
from dataclasses import dataclass

import numpy as np

from halognn.comm.collectives import all_reduce_sum
from halognn.comm.runtime import RankRuntime
from halognn.graph.graph import ReducedGraph


@dataclass(slots=True, frozen=True)
class GraphDiagnostics:
    """Degree-weighted global sums; partition-independent by construction of the degrees."""

    effective_nodes: float
    effective_edges: float
    position_sum: tuple[float, float, float]


def graph_diagnostics(runtime: RankRuntime, graphs: typing.Sequence[ReducedGraph]) -> GraphDiagnostics:
    """Sum 1/d_i, 1/d_ij (undirected) and positions / d_i over all ranks with one AllReduce."""
    contributions = []
    for g in graphs:
        inv_node = 1.0 / g.node_degree
        inv_edge = 1.0 / g.edge_degree[: g.num_undirected_edges]
        positions = (g.positions[: g.num_local] * inv_node[:, None]).sum(axis=0)
        contributions.append(np.concatenate([[inv_node.sum(), inv_edge.sum()], positions]))
    total = all_reduce_sum(runtime, contributions)[0]
    return GraphDiagnostics(
        effective_nodes=float(total[0]),
        effective_edges=float(total[1]),
        position_sum=(float(total[2]), float(total[3]), float(total[4])),
    )
