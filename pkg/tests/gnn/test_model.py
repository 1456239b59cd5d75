from dataclasses import replace

import numpy as np
import pytest

from halognn import errors
from halognn.comm import RankRuntime
from halognn.gnn import GnnConfig, evaluate, forward, init_params
from halognn.graph import assemble_rank_graph
from halognn.harness import compare_outputs
from halognn.mesh import partition_mesh


@pytest.fixture(scope="module")
def config():
    return GnnConfig.preset("small", num_mp_layers=2)


@pytest.fixture(scope="module")
def params(config):
    return init_params(config, seed=1)


def test_face_pair_matches_single_rank(face_pair, face_pair_single, config, params):
    reference = evaluate(RankRuntime(1), params, face_pair_single, config)[0]
    outputs = evaluate(RankRuntime(2), params, face_pair, config)
    comparison = compare_outputs(face_pair_single[0], reference, face_pair, outputs)
    assert comparison.max_relative <= 1e-12
    assert comparison.coincident_bitwise


def test_face_pair_without_exchange_deviates(face_pair, face_pair_single, config, params):
    reference = evaluate(RankRuntime(1), params, face_pair_single, config)[0]
    outputs = evaluate(RankRuntime(2), params, face_pair, config.with_mode("none"))
    assert compare_outputs(face_pair_single[0], reference, face_pair, outputs).weighted_relative > 1e-6


def test_edge_degree_scaling_required(face_pair, face_pair_single, config, params):
    reference = evaluate(RankRuntime(1), params, face_pair_single, config)[0]
    unscaled = [replace(g, edge_degree=np.ones_like(g.edge_degree)) for g in face_pair]
    outputs = evaluate(RankRuntime(2), params, unscaled, config)
    # shared face edges are then aggregated twice
    assert compare_outputs(face_pair_single[0], reference, unscaled, outputs).max_relative > 1e-8


@pytest.mark.parametrize("R", [2, 4, 8])
def test_partitioned_outputs_match(small_graphs, config, params, R):
    reference = evaluate(RankRuntime(1), params, small_graphs[1], config)[0]
    outputs = evaluate(RankRuntime(R), params, small_graphs[R], config)
    comparison = compare_outputs(small_graphs[1][0], reference, small_graphs[R], outputs)
    assert comparison.max_relative <= 1e-12
    assert comparison.coincident_bitwise


def test_exchange_modes_agree_bitwise(small_graphs, config, params):
    a2a = evaluate(RankRuntime(4), params, small_graphs[4], config.with_mode("a2a"))
    na2a = evaluate(RankRuntime(4), params, small_graphs[4], config.with_mode("na2a"))
    for a, b in zip(a2a, na2a):
        np.testing.assert_array_equal(a, b)


def test_single_rank_modes_agree_bitwise(small_graphs, config, params):
    (consistent,) = evaluate(RankRuntime(1), params, small_graphs[1], config)
    (plain,) = evaluate(RankRuntime(1), params, small_graphs[1], config.with_mode("none"))
    np.testing.assert_array_equal(consistent, plain)


def test_one_exchange_per_layer(small_graphs, params):
    config = GnnConfig.preset("small", num_mp_layers=2)
    runtime = RankRuntime(2)
    forward(runtime, params, small_graphs[2], config)
    assert runtime.report().halo_calls == 2
    runtime = RankRuntime(2)
    forward(runtime, params, small_graphs[2], config.with_mode("none"))
    assert runtime.report().halo_calls == 0


def test_output_shapes(small_graphs, config, params):
    outputs = evaluate(RankRuntime(4), params, small_graphs[4], config)
    assert [y.shape for y in outputs] == [(g.num_local, 3) for g in small_graphs[4]]


def test_without_message_passing(small_graphs):
    config = GnnConfig.preset("small", num_mp_layers=0)
    (y,) = evaluate(RankRuntime(1), init_params(config), small_graphs[1], config)
    assert y.shape == (125, 3)


def test_per_rank_replicas_accepted(small_graphs, config, params):
    shared = evaluate(RankRuntime(2), params, small_graphs[2], config)
    replicated = evaluate(RankRuntime(2), params.replicate(2), small_graphs[2], config)
    for a, b in zip(shared, replicated):
        np.testing.assert_array_equal(a, b)


def test_input_checks(small_mesh, small_graphs, config, params):
    with pytest.raises(errors.ModelConfigError):
        forward(RankRuntime(2), params, small_graphs[1], config)
    wide = GnnConfig.preset("small", num_mp_layers=2, in_node_dim=4)
    with pytest.raises(errors.ShapeError):
        forward(RankRuntime(1), init_params(wide), small_graphs[1], wide)
    graph, _ = assemble_rank_graph(small_mesh, partition_mesh(small_mesh, 1), 0)
    with pytest.raises(errors.UninitializedError):
        forward(RankRuntime(1), params, [graph], config)
