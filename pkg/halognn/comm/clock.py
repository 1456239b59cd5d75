import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np


@dataclass(slots=True)
class SimClock:
    """Simulated parallel time of R lockstep ranks.

    Compute charged to a rank accumulates until the next collective; a collective ends the superstep, which costs
    the slowest rank's pending compute plus the measured collective copy time.
    """

    num_ranks: int
    elapsed: float = 0.0
    communication: float = 0.0
    _pending: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self._pending = np.zeros(self.num_ranks)

    def charge(self, rank: int, seconds: float) -> None:
        self._pending[rank] += seconds

    @contextmanager
    def compute(self, rank: int):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.charge(rank, time.perf_counter() - start)

    def barrier(self, communication: float = 0.0) -> None:
        self.elapsed += float(self._pending.max(initial=0.0)) + communication
        self.communication += communication
        self._pending[:] = 0.0

    def total(self) -> float:
        """Simulated seconds so far, including compute pending since the last collective."""
        return self.elapsed + float(self._pending.max(initial=0.0))

    def reset(self) -> None:
        self.elapsed = 0.0
        self.communication = 0.0
        self._pending[:] = 0.0
