import logging
import threading
import typing

import numpy as np

from halognn import errors
from halognn.comm.clock import SimClock
from halognn.comm.report import COLLECTIVE_KINDS, CollectiveKind, CommReport

log = logging.getLogger(__name__)


class RankRuntime:
    """R in-process ranks synchronizing only at collectives.

    Every collective is a superstep: each rank posts a tagged contribution to its mailbox, then the runtime completes
    the superstep, failing loudly if any rank is missing or entered a different collective.
    """

    def __init__(self, num_ranks: int):
        if num_ranks < 1:
            raise errors.CollectiveError(f"Invalid {num_ranks=}: at least one rank is required")
        self.num_ranks = num_ranks
        self.clock = SimClock(num_ranks)
        self._lock = threading.Lock()
        self._mailbox: dict[int, tuple[str, typing.Any]] = {}
        self._calls = np.zeros((num_ranks, len(COLLECTIVE_KINDS)), dtype=np.int64)
        self._bytes = np.zeros((num_ranks, len(COLLECTIVE_KINDS)), dtype=np.int64)
        self._steps = 0

    # superstep protocol
    def post(self, rank: int, tag: str, payload: typing.Any) -> None:
        if not 0 <= rank < self.num_ranks:
            raise errors.CollectiveError(f"Invalid {rank=}: runtime has {self.num_ranks} ranks")
        with self._lock:
            if rank in self._mailbox:
                posted, _ = self._mailbox[rank]
                raise errors.CollectiveError(f"Rank {rank} entered '{tag}' while '{posted}' is still pending")
            self._mailbox[rank] = (tag, payload)

    def complete(self, tag: str) -> list[typing.Any]:
        """Close the pending superstep; returns the contributions in rank order."""
        with self._lock:
            mailbox, self._mailbox = self._mailbox, {}
        missing = [r for r in range(self.num_ranks) if r not in mailbox]
        if missing:
            raise errors.CollectiveError(f"Collective '{tag}' is missing ranks {missing}")
        mismatched = {r: t for r, (t, _) in mailbox.items() if t != tag}
        if mismatched:
            raise errors.CollectiveError(f"Collective '{tag}' mismatched by ranks entering {mismatched}")
        return [mailbox[r][1] for r in range(self.num_ranks)]

    def exchange(self, tag: str, contributions: typing.Sequence[typing.Any]) -> list[typing.Any]:
        """Post one contribution per rank and complete the superstep."""
        if len(contributions) != self.num_ranks:
            raise errors.CollectiveError(f"Collective '{tag}' got {len(contributions)} contributions for {self.num_ranks} ranks")
        for rank, payload in enumerate(contributions):
            self.post(rank, tag, payload)
        return self.complete(tag)

    # accounting
    def count(self, rank: int, kind: CollectiveKind, nbytes: int) -> None:
        k = COLLECTIVE_KINDS.index(kind)
        with self._lock:
            self._calls[rank, k] += 1
            self._bytes[rank, k] += nbytes

    def advance_step(self) -> None:
        with self._lock:
            self._steps += 1

    @property
    def steps(self) -> int:
        return self._steps

    def report(self) -> CommReport:
        with self._lock:
            return CommReport(self._calls.copy(), self._bytes.copy(), self._steps)

    def reset(self) -> None:
        """Zero counters and clock between benchmark phases."""
        with self._lock:
            self._calls[:] = 0
            self._bytes[:] = 0
            self._steps = 0
        self.clock.reset()
