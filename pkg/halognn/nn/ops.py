"""Differentiable primitives on row-major 2D arrays (rows are nodes or edges)."""

import numpy as np

from halognn import errors
from halognn.nn.tape import Tape, Var

ELU_ALPHA = 1.0
LAYERNORM_EPS = 1e-12


def _output(value: np.ndarray, *inputs: Var) -> Var:
    return Var(value, requires_grad=any(v.requires_grad for v in inputs))


def _check_2d(x: Var, name: str, cols: int | None = None) -> None:
    if x.value.ndim != 2:
        raise errors.ShapeError(f"Invalid {name} shape {x.shape}: expected a 2D array")
    if cols is not None and x.shape[1] != cols:
        raise errors.ShapeError(f"Invalid {name} shape {x.shape}: expected {cols} columns")


def linear(tape: Tape, x: Var, weight: Var, bias: Var) -> Var:
    """y = x W + b with W of shape (in, out)."""
    _check_2d(x, "linear input", weight.shape[0])
    y = _output(x.value @ weight.value + bias.value, x, weight, bias)

    def backward():
        if not y.requires_grad or y.grad is None:
            return
        g = y.grad
        if x.requires_grad:
            x.accumulate(g @ weight.value.T)
        weight.accumulate(x.value.T @ g)
        bias.accumulate(g.sum(axis=0))

    tape.record(backward)
    return y


def add(tape: Tape, a: Var, b: Var) -> Var:
    if a.shape != b.shape:
        raise errors.ShapeError(f"Cannot add shapes {a.shape} and {b.shape}")
    y = _output(a.value + b.value, a, b)

    def backward():
        if y.grad is not None:
            a.accumulate(y.grad)
            b.accumulate(y.grad)

    tape.record(backward)
    return y


def elu(tape: Tape, x: Var) -> Var:
    positive = x.value > 0
    value = np.where(positive, x.value, ELU_ALPHA * np.expm1(np.minimum(x.value, 0.0)))
    y = _output(value, x)

    def backward():
        if y.grad is not None:
            x.accumulate(y.grad * np.where(positive, 1.0, value + ELU_ALPHA))

    tape.record(backward)
    return y


def layernorm(tape: Tape, x: Var, scale: Var, shift: Var, eps: float = LAYERNORM_EPS) -> Var:
    """Row-wise normalization to zero mean / unit variance followed by an affine scale and shift."""
    _check_2d(x, "layernorm input", scale.shape[0])
    centered = x.value - x.value.mean(axis=1, keepdims=True)
    inv_std = 1.0 / np.sqrt((centered**2).mean(axis=1, keepdims=True) + eps)
    normalized = centered * inv_std
    y = _output(normalized * scale.value + shift.value, x, scale, shift)

    def backward():
        if y.grad is None:
            return
        g = y.grad
        scale.accumulate((g * normalized).sum(axis=0))
        shift.accumulate(g.sum(axis=0))
        if x.requires_grad:
            gn = g * scale.value
            x.accumulate(
                inv_std
                * (gn - gn.mean(axis=1, keepdims=True) - normalized * (gn * normalized).mean(axis=1, keepdims=True))
            )

    tape.record(backward)
    return y


def concat_cols(tape: Tape, *xs: Var) -> Var:
    rows = {x.shape[0] for x in xs}
    if len(rows) != 1:
        raise errors.ShapeError(f"Cannot concatenate columns of arrays with row counts {sorted(rows)}")
    splits = np.cumsum([x.shape[1] for x in xs])[:-1]
    y = _output(np.concatenate([x.value for x in xs], axis=1), *xs)

    def backward():
        if y.grad is not None:
            for x, g in zip(xs, np.split(y.grad, splits, axis=1)):
                x.accumulate(np.ascontiguousarray(g))

    tape.record(backward)
    return y


def gather_rows(tape: Tape, x: Var, index: np.ndarray) -> Var:
    y = _output(x.value[index], x)

    def backward():
        if y.grad is not None and x.requires_grad:
            g = np.zeros_like(x.value)
            np.add.at(g, index, y.grad)
            x.accumulate(g)

    tape.record(backward)
    return y


def scatter_sum_rows(tape: Tape, x: Var, index: np.ndarray, num_rows: int) -> Var:
    """y[k] = sum of x rows whose index is k (accumulated in row order)."""
    if len(index) != x.shape[0]:
        raise errors.ShapeError(f"Scatter index of length {len(index)} for {x.shape[0]} rows")
    value = np.zeros((num_rows, *x.shape[1:]))
    np.add.at(value, index, x.value)
    y = _output(value, x)

    def backward():
        if y.grad is not None:
            x.accumulate(y.grad[index])

    tape.record(backward)
    return y


def scale_rows(tape: Tape, x: Var, factors: np.ndarray) -> Var:
    factors = np.asarray(factors, dtype=np.float64)[:, None]
    if factors.shape[0] != x.shape[0]:
        raise errors.ShapeError(f"Got {factors.shape[0]} row factors for {x.shape[0]} rows")
    y = _output(x.value * factors, x)

    def backward():
        if y.grad is not None:
            x.accumulate(y.grad * factors)

    tape.record(backward)
    return y


def scale(tape: Tape, x: Var, factor: float) -> Var:
    y = _output(x.value * factor, x)

    def backward():
        if y.grad is not None:
            x.accumulate(y.grad * factor)

    tape.record(backward)
    return y


def slice_rows(tape: Tape, x: Var, stop: int) -> Var:
    y = _output(x.value[:stop].copy(), x)

    def backward():
        if y.grad is not None and x.requires_grad:
            g = np.zeros_like(x.value)
            g[:stop] = y.grad
            x.accumulate(g)

    tape.record(backward)
    return y


def sync_sum(tape: Tape, x: Var, table: np.ndarray) -> Var:
    """Row i of the output sums the rows of x listed in table[i] (pad index = x rows, contributing zero)."""
    padded = np.concatenate([x.value, np.zeros((1, *x.shape[1:]))])
    value = padded[table[:, 0]]
    for c in range(1, table.shape[1]):
        value = value + padded[table[:, c]]
    y = _output(value, x)

    def backward():
        if y.grad is not None and x.requires_grad:
            g = np.zeros_like(padded)
            for c in range(table.shape[1]):
                np.add.at(g, table[:, c], y.grad)
            x.accumulate(g[:-1])

    tape.record(backward)
    return y


def weighted_squared_error(tape: Tape, y: Var, target: np.ndarray, weights: np.ndarray) -> Var:
    """Scalar sum over rows i and columns j of weights[i] (y - target)^2."""
    if y.shape != target.shape:
        raise errors.ShapeError(f"Prediction shape {y.shape} does not match target shape {target.shape}")
    if len(weights) != y.shape[0]:
        raise errors.IntegrityError(f"Got {len(weights)} weights for {y.shape[0]} rows")
    residual = y.value - target
    w = np.asarray(weights, dtype=np.float64)[:, None]
    s = _output(np.asarray(np.sum(w * residual**2)), y)

    def backward():
        if s.grad is not None:
            y.accumulate(2.0 * w * residual * s.grad)

    tape.record(backward)
    return s

