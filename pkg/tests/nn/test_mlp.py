import numpy as np
import pytest

from halognn import errors
from halognn.nn import MlpSpec, ModelParams, backward, init_mlp, mlp_forward, param_count


def test_single_linear_layer_count():
    spec = MlpSpec(in_dim=3, out_dim=8, hidden_width=8, num_hidden_layers=0)
    params = ModelParams(init_mlp(spec, np.random.default_rng(0)))
    assert param_count(params) == 32


@pytest.mark.parametrize(
    "placement, expected",
    [
        # 3*8+8 + 2*(8*8+8+16) + 8*3+3
        ("hidden", 32 + 176 + 27),
        # 3*8+8 + 2*(8*8+8) + 8*3+3 + 2*3
        ("output", 32 + 144 + 27 + 6),
    ],
)
def test_hidden_layer_counts(placement, expected):
    spec = MlpSpec(in_dim=3, out_dim=3, hidden_width=8, num_hidden_layers=2, norm_placement=placement)
    assert sum(int(np.prod(s)) for s in spec.shapes("m").values()) == expected


def test_hand_computed_linear():
    spec = MlpSpec(in_dim=2, out_dim=2, hidden_width=2, num_hidden_layers=0)
    params = {"mlp.out.weight": np.array([[1.0, 2.0], [3.0, 4.0]]), "mlp.out.bias": np.array([0.5, -1.0])}
    y, _ = mlp_forward(params, spec, np.array([[1.0, 1.0]]))
    np.testing.assert_array_equal(y, [[4.5, 5.0]])


def test_identity_layer_backward():
    spec = MlpSpec(in_dim=3, out_dim=3, hidden_width=3, num_hidden_layers=0)
    params = {"mlp.out.weight": np.eye(3), "mlp.out.bias": np.zeros(3)}
    x = np.random.default_rng(1).normal(size=(4, 3))
    y, tape = mlp_forward(params, spec, x)
    np.testing.assert_array_equal(y, x)
    adjoint = np.random.default_rng(2).normal(size=(4, 3))
    x_adjoint, grads = backward(tape, adjoint)
    np.testing.assert_array_equal(x_adjoint, adjoint)
    np.testing.assert_allclose(grads["mlp.out.weight"], x.T @ adjoint)


def test_zero_parameters_give_zero_output():
    spec = MlpSpec(in_dim=3, out_dim=2, hidden_width=4, num_hidden_layers=2, use_layernorm=False)
    params = {name: np.zeros(shape) for name, shape in spec.shapes("mlp").items()}
    y, _ = mlp_forward(params, spec, np.ones((5, 3)))
    np.testing.assert_array_equal(y, np.zeros((5, 2)))


def test_init_deterministic():
    spec = MlpSpec(in_dim=3, out_dim=3, hidden_width=8, num_hidden_layers=2)
    a = ModelParams(init_mlp(spec, np.random.default_rng(7)))
    b = ModelParams(init_mlp(spec, np.random.default_rng(7)))
    assert a.equals(b)
    assert np.all(a["mlp.hidden0.norm.scale"] == 1.0)
    bound = np.sqrt(6.0 / 16)
    assert np.all(np.abs(a["mlp.hidden1.weight"]) <= bound)


def test_rows_are_independent():
    spec = MlpSpec(in_dim=3, out_dim=3, hidden_width=8, num_hidden_layers=2)
    params = init_mlp(spec, np.random.default_rng(0))
    x = np.random.default_rng(1).normal(size=(6, 3))
    permutation = np.array([3, 0, 5, 1, 4, 2])
    y, _ = mlp_forward(params, spec, x)
    y_permuted, _ = mlp_forward(params, spec, x[permutation])
    np.testing.assert_allclose(y_permuted, y[permutation], rtol=0, atol=1e-14)


@pytest.mark.parametrize("placement", ["hidden", "output"])
def test_mlp_gradient_finite_differences(placement):
    spec = MlpSpec(in_dim=2, out_dim=2, hidden_width=3, num_hidden_layers=1, norm_placement=placement)
    params = init_mlp(spec, np.random.default_rng(3))
    x = np.random.default_rng(4).normal(size=(3, 2))
    weights = np.random.default_rng(5).normal(size=(3, 2))
    _, tape = mlp_forward(params, spec, x)
    _, grads = backward(tape, weights)

    step = 1e-6
    for name in params:
        for index in np.ndindex(params[name].shape):
            plus = {n: t.copy() for n, t in params.items()}
            minus = {n: t.copy() for n, t in params.items()}
            plus[name][index] += step
            minus[name][index] -= step
            fd = (np.sum(mlp_forward(plus, spec, x)[0] * weights) - np.sum(mlp_forward(minus, spec, x)[0] * weights)) / (
                2 * step
            )
            assert grads[name][index] == pytest.approx(fd, abs=1e-6)


def test_invalid_spec():
    with pytest.raises(errors.ShapeError):
        MlpSpec(in_dim=0, out_dim=3, hidden_width=8, num_hidden_layers=1)
    with pytest.raises(errors.ShapeError):
        MlpSpec(in_dim=3, out_dim=3, hidden_width=8, num_hidden_layers=-1)
    with pytest.raises(errors.ShapeError):
        MlpSpec(in_dim=3, out_dim=3, hidden_width=8, num_hidden_layers=1, norm_placement="input")  # type: ignore


def test_input_shape_checked():
    spec = MlpSpec(in_dim=3, out_dim=3, hidden_width=4, num_hidden_layers=1)
    with pytest.raises(errors.ShapeError):
        mlp_forward(init_mlp(spec, np.random.default_rng(0)), spec, np.ones((2, 4)))
