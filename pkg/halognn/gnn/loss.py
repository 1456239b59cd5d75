import typing

import numpy as np

from halognn import errors
from halognn.comm.collectives import all_reduce_sum
from halognn.comm.exchange import all_reduce_vars
from halognn.comm.runtime import RankRuntime
from halognn.nn import ops
from halognn.nn.tape import Tape, Var, constant


def standard_loss(y: np.ndarray, target: np.ndarray) -> float:
    """Mean squared error over all N F_y entries."""
    y, target = np.asarray(y, dtype=np.float64), np.asarray(target, dtype=np.float64)
    if y.shape != target.shape:
        raise errors.ShapeError(f"Prediction shape {y.shape} does not match target shape {target.shape}")
    return float(np.mean((y - target) ** 2))


def consistent_loss(
    runtime: RankRuntime,
    outputs: typing.Sequence[Var | np.ndarray],
    targets: typing.Sequence[np.ndarray],
    node_degrees: typing.Sequence[np.ndarray],
    tape: Tape | None = None,
) -> list[Var]:
    """Degree-weighted MSE reduced over ranks: AllReduce(S_r) / (AllReduce(N_r) F_y), identical on every rank.

    S_r weights each local node's squared error by 1/d_i and N_r = sum 1/d_i counts the effective nodes, so
    coincident nodes contribute exactly once in total.
    """
    tape = tape if tape is not None else Tape(runtime.clock)
    ys = [y if isinstance(y, Var) else constant(y) for y in outputs]
    sums, counts = [], []
    for r, (y, target, degree) in enumerate(zip(ys, targets, node_degrees)):
        if len(degree) != y.shape[0]:
            raise errors.IntegrityError(f"Rank {r} has {len(degree)} node degrees for {y.shape[0]} output rows")
        weights = 1.0 / np.asarray(degree, dtype=np.float64)
        with tape.rank(r):
            sums.append(ops.weighted_squared_error(tape, y, np.asarray(target, dtype=np.float64), weights))
        counts.append(np.asarray(weights.sum()))

    num_effective = all_reduce_sum(runtime, counts)
    totals = all_reduce_vars(runtime, tape, sums)
    losses = []
    for r, (total, n) in enumerate(zip(totals, num_effective)):
        with tape.rank(r):
            losses.append(ops.scale(tape, total, 1.0 / (float(n) * ys[r].shape[1])))
    return losses
