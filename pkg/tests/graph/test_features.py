from dataclasses import replace

import numpy as np
import pytest

from halognn import errors
from halognn.graph import EDGE_FEATURE_DIMS, ReducedGraph, init_edge_features, populate_features


@pytest.fixture
def segment():
    return ReducedGraph(
        rank=0,
        num_local=2,
        num_halo=0,
        positions=np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]),
        global_ids=np.array([0, 1]),
        adjacency=np.array([[0, 1], [1, 0]]),
        node_degree=np.ones(2, dtype=np.int64),
        edge_degree=np.ones(2, dtype=np.int64),
        node_features=np.array([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]]),
    )


def test_full_edge_features(segment):
    features = init_edge_features(segment, "full")
    # entry (receiver 0, sender 1): x_1 - x_0, pos_1 - pos_0, |pos_1 - pos_0|
    np.testing.assert_array_equal(features[0], [0, 0, 0, 1, 0, 0, 1])
    np.testing.assert_array_equal(features[1], [0, 0, 0, -1, 0, 0, 1])


def test_geometric_edge_features(segment):
    features = init_edge_features(replace(segment, node_features=None), "geometric")
    assert features.shape == (2, EDGE_FEATURE_DIMS["geometric"])
    np.testing.assert_array_equal(features[0], [1, 0, 0, 1])


def test_full_requires_node_features(segment):
    with pytest.raises(errors.UninitializedError):
        init_edge_features(replace(segment, node_features=None), "full")


def test_unknown_feature_set(segment):
    with pytest.raises(errors.UninitializedError):
        init_edge_features(segment, "spectral")  # type: ignore


def test_halo_features_copied_from_source(face_pair):
    for r, g in enumerate(face_pair):
        source = face_pair[1 - r]
        recv, send = g.halo.recv_masks[0], source.halo.send_mask(r)
        np.testing.assert_array_equal(g.node_features[recv], source.node_features[send])
        assert g.edge_features.shape == (g.num_edges, EDGE_FEATURE_DIMS["full"])


def test_coincident_edges_share_features(face_pair):
    g0, g1 = face_pair
    features = [{}, {}]
    for k, g in enumerate(face_pair):
        gids = g.global_ids[g.adjacency]
        for pair, row in zip(map(tuple, gids.tolist()), g.edge_features):
            features[k][pair] = row
    shared = set(features[0]) & set(features[1])
    assert len(shared) == 8
    for pair in shared:
        np.testing.assert_array_equal(features[0][pair], features[1][pair])


def test_populate_features_checks_ranks(face_pair):
    with pytest.raises(errors.IntegrityError):
        populate_features(face_pair, [np.zeros((8, 3))])
    with pytest.raises(errors.IntegrityError):
        populate_features(face_pair, [np.zeros((8, 3)), np.zeros((4, 3))])
