import functools

import numpy as np

from halognn import errors

_TOLERANCE = 1e-14
_MAX_ITERATIONS = 100


@functools.cache
def _gll(p: int) -> tuple[np.ndarray, np.ndarray]:
    if p < 1:
        raise errors.InvalidOrderError(f"Invalid {p=}: polynomial order must be at least 1")

    # chebyshev-lobatto seed, ascending
    x = -np.cos(np.pi * np.arange(p + 1) / p)
    # legendre vandermonde: P[:, k] = P_k(x)
    P = np.zeros((p + 1, p + 1))
    x_old = np.full_like(x, 2.0)
    for _ in range(_MAX_ITERATIONS):
        if np.max(np.abs(x - x_old)) <= _TOLERANCE:
            break
        x_old = x
        P[:, 0] = 1.0
        P[:, 1] = x
        for k in range(2, p + 1):
            P[:, k] = ((2 * k - 1) * x * P[:, k - 1] - (k - 1) * P[:, k - 2]) / k
        x = x_old - (x * P[:, p] - P[:, p - 1]) / ((p + 1) * P[:, p])

    # exact symmetry about 0 (and an exact 0 midpoint for even p)
    x = (x - x[::-1]) / 2
    P[:, 0] = 1.0
    P[:, 1] = x
    for k in range(2, p + 1):
        P[:, k] = ((2 * k - 1) * x * P[:, k - 1] - (k - 1) * P[:, k - 2]) / k
    w = 2.0 / (p * (p + 1) * P[:, p] ** 2)

    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gll_points(p: int) -> np.ndarray:
    """Gauss-Legendre-Lobatto nodes on [-1, 1] (ascending) for polynomial order p."""
    return _gll(p)[0]


def gll_weights(p: int) -> np.ndarray:
    """Quadrature weights matching `gll_points(p)`; exact for polynomials up to degree 2p - 1."""
    return _gll(p)[1]
