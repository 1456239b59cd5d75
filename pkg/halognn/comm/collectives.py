import time
import typing

import numpy as np

from halognn import errors
from halognn.comm.runtime import RankRuntime

ExchangeMode = typing.Literal["none", "a2a", "na2a"]
EXCHANGE_MODES: tuple[ExchangeMode, ...] = typing.get_args(ExchangeMode)
_MODE_ALIASES: dict[str, ExchangeMode] = {
    "none": "none",
    "a2a": "a2a",
    "alltoall": "a2a",
    "na2a": "na2a",
    "n-a2a": "na2a",
    "neighbor": "na2a",
}


def parse_mode(mode: str | None) -> ExchangeMode:
    key = "none" if mode is None else str(mode).strip().lower()
    if key not in _MODE_ALIASES:
        raise errors.ExchangeModeError(f"Invalid {mode=}: expected one of {EXCHANGE_MODES}")
    return _MODE_ALIASES[key]


def all_reduce_sum(runtime: RankRuntime, values: typing.Sequence[np.ndarray | float]) -> list[np.ndarray]:
    """Sum of every rank's value (ascending rank order), delivered to every rank."""
    start = time.perf_counter()
    arrays = runtime.exchange("all_reduce", [np.asarray(v, dtype=np.float64) for v in values])
    shapes = {a.shape for a in arrays}
    if len(shapes) > 1:
        raise errors.CollectiveError(f"AllReduce shape mismatch across ranks: {sorted(shapes)}")
    total = arrays[0].copy()
    for a in arrays[1:]:
        total = total + a
    result = [total.copy() for _ in arrays]
    for rank, a in enumerate(arrays):
        runtime.count(rank, "all_reduce", a.nbytes)
    runtime.clock.barrier(time.perf_counter() - start)
    return result


def all_to_all(
    runtime: RankRuntime,
    mode: ExchangeMode,
    send: typing.Sequence[typing.Sequence[np.ndarray]],
    expected_rows: typing.Sequence[typing.Sequence[int]] | None = None,
) -> list[list[np.ndarray]]:
    """Personalized exchange: `recv[r][s]` on rank r is `send[s][r]` from rank s.

    "a2a" requires every buffer (dummies included) to share one shape; "na2a" skips empty buffers. Self buffers are
    copied locally and not counted as transmitted bytes.
    """
    if mode == "none":
        raise errors.ExchangeModeError("All-to-all invoked with exchange mode 'none'")
    R = runtime.num_ranks
    start = time.perf_counter()
    buffers = runtime.exchange(mode, [list(s) for s in send])
    if any(len(b) != R for b in buffers):
        raise errors.CollectiveError(f"Every rank must provide exactly {R} send buffers")
    if mode == "a2a":
        shapes = {b.shape for per_rank in buffers for b in per_rank}
        if len(shapes) > 1:
            raise errors.CollectiveError(f"AllToAll requires uniform buffer shapes, got {sorted(shapes)}")

    recv = [[np.array(buffers[s][r], copy=True) for s in range(R)] for r in range(R)]
    if expected_rows is not None:
        for r in range(R):
            for s in range(R):
                got, expected = len(recv[r][s]), expected_rows[r][s]
                if (got < expected) if mode == "a2a" else (got != expected):
                    raise errors.CollectiveError(
                        f"Rank {r} expects {expected} rows from rank {s}, got {got}"
                    )

    kind = "all_to_all" if mode == "a2a" else "neighbor_all_to_all"
    for s in range(R):
        runtime.count(s, kind, sum(buffers[s][r].nbytes for r in range(R) if r != s))
    runtime.clock.barrier(time.perf_counter() - start)
    return recv
