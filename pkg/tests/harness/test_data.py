import numpy as np
import pytest

from halognn.harness import prepare_graphs, rescale_to_tgv_box, tgv_field
from halognn.mesh import MeshConfig


def test_tgv_field_values():
    positions = np.array([[np.pi / 2, 0.0, 0.0], [0.0, np.pi / 2, 0.0], [0.0, 0.0, 0.0]])
    np.testing.assert_allclose(tgv_field(positions), [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 0.0]], atol=1e-15)


def test_tgv_field_divergence_free():
    h = 2 * np.pi / 64
    axis = np.arange(1, 63) * h
    x, y, z = np.meshgrid(axis, axis, axis, indexing="ij")
    points = np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)

    def shifted(dim, sign):
        offset = np.zeros(3)
        offset[dim] = sign * h
        return tgv_field(points + offset)

    divergence = sum((shifted(d, 1)[:, d] - shifted(d, -1)[:, d]) / (2 * h) for d in range(3))
    assert np.max(np.abs(divergence)) < 1e-3


def test_rescale_to_tgv_box():
    config = MeshConfig(1, 1, domain_min=(-1.0, 0.0, 0.0), domain_max=(1.0, 2.0, 4.0))
    rescaled = rescale_to_tgv_box(np.array([[-1.0, 0.0, 0.0], [1.0, 1.0, 4.0]]), config)
    np.testing.assert_allclose(rescaled, [[0.0, 0.0, 0.0], [2 * np.pi, np.pi, 2 * np.pi]])


@pytest.mark.parametrize("edge_features, width", [("full", 7), ("geometric", 4)])
def test_prepare_graphs(edge_features, width):
    graphs = prepare_graphs(MeshConfig(2, 1), 2, "slab", edge_features)
    for g in graphs:
        assert g.node_features.shape == (g.num_nodes, 3)
        assert g.edge_features.shape == (g.num_edges, width)
        np.testing.assert_array_equal(g.node_features[: g.num_local], tgv_field(2 * np.pi * g.positions[: g.num_local]))
