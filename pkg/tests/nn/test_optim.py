import numpy as np
import pytest

from halognn import errors
from halognn.nn import AdamConfig, AdamState, ModelParams, adam_step


@pytest.fixture
def params():
    return ModelParams({"w": np.array([[1.0, -2.0]]), "b": np.array([0.5])})


def test_zero_gradient_leaves_parameters(params):
    updated, state = adam_step(params, params.zeros_like(), AdamState.zeros(params), AdamConfig(lr=0.1))
    assert updated.equals(params)
    assert state.step == 1


def test_unit_gradient_step(params):
    grads = ModelParams({name: np.ones_like(t) for name, t in params.items()})
    updated, _ = adam_step(params, grads, AdamState.zeros(params), AdamConfig(lr=0.1))
    # bias-corrected moments are exactly 1: the step is lr / (1 + eps)
    np.testing.assert_allclose(updated["w"], params["w"] - 0.1, rtol=0, atol=1e-8)
    np.testing.assert_allclose(updated["b"], params["b"] - 0.1, rtol=0, atol=1e-8)


def test_inputs_untouched(params):
    original = params.copy()
    state = AdamState.zeros(params)
    adam_step(params, params, state)
    assert params.equals(original)
    assert state.step == 0 and state.m.equals(params.zeros_like())


def test_replicas_stay_identical(params):
    grads = ModelParams({"w": np.array([[0.3, -0.7]]), "b": np.array([1e-3])})
    replicas = [(params.copy(), AdamState.zeros(params)) for _ in range(3)]
    for _ in range(5):
        replicas = [adam_step(p, grads, s) for p, s in replicas]
    p0, s0 = replicas[0]
    assert all(p.equals(p0) and s.equals(s0) for p, s in replicas[1:])


@pytest.mark.parametrize("bad", [np.nan, np.inf])
def test_non_finite_gradient(params, bad):
    grads = ModelParams({"w": np.array([[0.0, bad]]), "b": np.array([0.0])})
    with pytest.raises(errors.OptimizerError):
        adam_step(params, grads, AdamState.zeros(params))


@pytest.mark.parametrize("kwargs", [{"lr": 0.0}, {"beta1": 1.0}, {"beta2": -0.1}, {"eps": 0.0}])
def test_invalid_config(kwargs):
    with pytest.raises(errors.OptimizerError):
        AdamConfig(**kwargs)
