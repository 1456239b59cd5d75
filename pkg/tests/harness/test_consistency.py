import numpy as np
import pytest

from halognn import errors
from halognn.gnn import GnnConfig, TrainConfig
from halognn.harness import training_equivalence, verify_consistency, verify_gradients
from halognn.harness.consistency import ConsistencyReport, ConsistencyRow
from halognn.mesh import MeshConfig


@pytest.fixture(scope="module")
def config():
    return GnnConfig.preset("small", num_mp_layers=2)


def row(R, deviation, bitwise=True, output_deviation=0.0):
    return ConsistencyRow(R, 1.0, 1.0, 0.0, 0.0, output_deviation, deviation, bitwise)


def test_verify_consistency(small_mesh, config):
    report = verify_consistency(small_mesh, (1, 2, 4), config, seed=0)
    assert [r.num_ranks for r in report.rows] == [1, 2, 4]
    assert report.mode == "na2a"
    for r in report.rows:
        assert r.loss_deviation <= 1e-12 and r.output_deviation <= 1e-12
        assert r.coincident_bitwise
    assert report.rows[0].output_deviation_inconsistent == 0.0
    assert all(r.output_deviation_inconsistent > 0.0 for r in report.rows[1:])


def test_report_failures():
    assert ConsistencyReport((row(1, 0.0), row(2, 1e-3), row(4, 2e-3)), "na2a", 0).passed
    decreasing = ConsistencyReport((row(2, 2e-3), row(4, 1e-3)), "na2a", 0)
    assert len(decreasing.failures()) == 1
    assert not ConsistencyReport((row(2, 0.0),), "na2a", 0).passed
    assert not ConsistencyReport((row(2, 1e-3, bitwise=False),), "na2a", 0).passed
    assert not ConsistencyReport((row(2, 1e-3, output_deviation=1e-9),), "na2a", 0).passed
    assert not ConsistencyReport((row(2, 1e-3),), "na2a", 0, gradient_deviations={2: 1e-6}).passed


def test_verify_gradients(small_mesh, config):
    report = verify_gradients(small_mesh, 2, config, seed=0, num_checks=5)
    assert report.max_deviation <= 1e-10
    assert report.fd_error <= 1e-6
    assert report.deterministic
    assert report.passed


def test_training_equivalence(config):
    report = training_equivalence(MeshConfig(2, 1), 2, config, TrainConfig(lr=1e-3, iterations=3))
    assert report.passed
    assert np.all(report.consistent_deviation <= 1e-8)
    assert report.inconsistent_deviation.max() > 1e-8
    assert [r[0] for r in report.rows()] == [1, 2, 3]


def test_verify_gradients_needs_exchange(small_mesh, config):
    with pytest.raises(errors.ModelConfigError):
        verify_gradients(small_mesh, 2, config.with_mode("none"))
