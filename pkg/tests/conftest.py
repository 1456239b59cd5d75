import numpy as np
import pytest

from halognn.graph import assemble_rank_graph, build_halo_structures, populate_features
from halognn.harness import prepare_graphs
from halognn.mesh import MeshConfig, build_box_mesh, partition_mesh


def smooth_features(graph):
    p = graph.positions[: graph.num_local]
    return np.stack([np.sin(3.0 * p[:, 0]), np.cos(2.0 * p[:, 1]) * p[:, 2], p.sum(axis=1)], axis=1)


@pytest.fixture
def face_pair():
    """Two order-1 elements sharing one face, one per rank."""
    mesh = build_box_mesh(MeshConfig(elements_per_axis=2, poly_order=1))
    part = partition_mesh(mesh, 8, "block")
    graphs = build_halo_structures([assemble_rank_graph(mesh, part, r)[0] for r in range(2)])
    return populate_features(graphs, [smooth_features(g) for g in graphs])


@pytest.fixture
def face_pair_single():
    """The same two elements assembled on a single rank."""
    mesh = build_box_mesh(MeshConfig(elements_per_axis=2, poly_order=1))
    part = partition_mesh(mesh, 4, "block", factors=(1, 2, 2))
    graphs = build_halo_structures([assemble_rank_graph(mesh, part, 0)[0]])
    return populate_features(graphs, [smooth_features(g) for g in graphs])


@pytest.fixture(scope="session")
def small_mesh():
    return build_box_mesh(MeshConfig(elements_per_axis=2, poly_order=2))


@pytest.fixture(scope="session")
def small_graphs(small_mesh):
    """TGV-featured graphs of a 2^3 order-2 mesh keyed by rank count."""
    return {R: prepare_graphs(small_mesh, R) for R in (1, 2, 4, 8)}
