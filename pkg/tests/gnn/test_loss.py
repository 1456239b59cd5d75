import numpy as np
import pytest

from halognn import errors
from halognn.comm import RankRuntime
from halognn.gnn import consistent_loss, standard_loss


def test_standard_loss():
    assert standard_loss(np.array([1.0, 3.0]), np.array([0.0, 1.0])) == 2.5
    with pytest.raises(errors.ShapeError):
        standard_loss(np.zeros(2), np.zeros(3))


def test_consistent_loss_counts_shared_nodes_once():
    # global node 1 is owned by both ranks (degree 2)
    runtime = RankRuntime(2)
    outputs = [np.array([[1.0], [2.0]]), np.array([[2.0], [3.0]])]
    targets = [np.zeros((2, 1)), np.zeros((2, 1))]
    degrees = [np.array([1, 2]), np.array([2, 1])]
    losses = consistent_loss(runtime, outputs, targets, degrees)
    assert [float(loss.value) for loss in losses] == pytest.approx([14 / 3, 14 / 3], rel=1e-15)
    assert float(losses[0].value) == float(losses[1].value)
    # effective node count and weighted sum
    assert runtime.report().calls_of("all_reduce", 0) == 2


def test_single_rank_matches_standard_loss():
    rng = np.random.default_rng(0)
    y, target = rng.normal(size=(7, 3)), rng.normal(size=(7, 3))
    (loss,) = consistent_loss(RankRuntime(1), [y], [target], [np.ones(7, dtype=np.int64)])
    assert float(loss.value) == pytest.approx(standard_loss(y, target), rel=1e-14)


def test_degree_length_checked():
    with pytest.raises(errors.IntegrityError):
        consistent_loss(RankRuntime(1), [np.zeros((3, 1))], [np.zeros((3, 1))], [np.ones(2)])
