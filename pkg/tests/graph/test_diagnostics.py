import pytest

from halognn.comm import RankRuntime
from halognn.graph import graph_diagnostics


@pytest.mark.parametrize("R", [2, 4, 8])
def test_diagnostics_partition_independent(small_mesh, small_graphs, R):
    reference = graph_diagnostics(RankRuntime(1), small_graphs[1])
    assert reference.effective_nodes == small_mesh.config.num_unique_nodes
    runtime = RankRuntime(R)
    diagnostics = graph_diagnostics(runtime, small_graphs[R])
    assert diagnostics.effective_nodes == pytest.approx(reference.effective_nodes, rel=1e-12)
    assert diagnostics.effective_edges == pytest.approx(reference.effective_edges, rel=1e-12)
    assert diagnostics.position_sum == pytest.approx(reference.position_sum, rel=1e-12)
    # one AllReduce per rank
    assert runtime.report().calls_of("all_reduce", 0) == 1


def test_single_rank_edge_count(small_graphs):
    (g,) = small_graphs[1]
    # 3 n^2 (n - 1) lattice edges for n = 5
    assert graph_diagnostics(RankRuntime(1), small_graphs[1]).effective_edges == g.num_undirected_edges == 300
