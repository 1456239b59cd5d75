import itertools
import math
import typing
from operator import itemgetter

import numpy as np


def distribute_integers(allocations: typing.Sequence[float]) -> tuple[int, ...]:
    """Round a continuous allocation to integers while preserving its (integer) total."""
    floored_allocations = [math.floor(a) for a in allocations]

    # NOTE: sorting by the (negative) rounding loss hands the missing integers to the allocations
    # that lost the most; stable sort keeps ties in index order
    diff_sorted = sorted(enumerate(f_a - a for f_a, a in zip(floored_allocations, allocations)), key=itemgetter(1))
    int_truncation = round(sum(map(itemgetter(1), diff_sorted)))

    for i, _ in diff_sorted:
        if int_truncation >= 0:
            break
        floored_allocations[i] += 1
        int_truncation += 1

    return tuple(floored_allocations)


def equitable_split(total: int, parts: int) -> tuple[int, ...]:
    """Split an integer total into contiguous parts whose sizes differ by at most one."""
    if parts <= 0:
        raise ValueError(f"Invalid {parts=}: must be strictly positive")
    return distribute_integers([total / parts] * parts)


def split_offsets(total: int, parts: int) -> tuple[int, ...]:
    """Boundaries (length parts + 1) of an equitable contiguous split."""
    return (0, *itertools.accumulate(equitable_split(total, parts)))


def prioritize(*args, default):
    """Return first not-None arg or the default value."""
    for arg in args:
        if arg is not None:
            return arg
    return default


def relative_deviation(value: np.ndarray | float, reference: np.ndarray | float) -> float:
    """Max absolute deviation normalized by the largest reference magnitude."""
    value, reference = np.asarray(value, dtype=np.float64), np.asarray(reference, dtype=np.float64)
    scale = float(np.max(np.abs(reference))) if reference.size else 0.0
    deviation = float(np.max(np.abs(value - reference))) if reference.size else 0.0
    # an exact zero reference can only be matched exactly
    return deviation / scale if scale > 0.0 else deviation
