from __future__ import annotations

import csv
import io
import os
import typing
from dataclasses import dataclass

import numpy as np

from halognn import errors

CollectiveKind = typing.Literal["all_reduce", "all_to_all", "neighbor_all_to_all"]
COLLECTIVE_KINDS: tuple[CollectiveKind, ...] = typing.get_args(CollectiveKind)
CSV_HEADER = ("rank", "collective", "calls", "bytes")


@dataclass(slots=True, frozen=True, eq=False)
class CommReport:
    """Immutable snapshot of per-(rank, collective) call and byte counters."""

    calls: np.ndarray  # (R, kinds)
    bytes: np.ndarray  # (R, kinds)
    steps: int = 0

    def __post_init__(self):
        self.calls.setflags(write=False)
        self.bytes.setflags(write=False)

    @property
    def num_ranks(self) -> int:
        return self.calls.shape[0]

    def calls_of(self, kind: CollectiveKind, rank: int | None = None) -> int:
        column = self.calls[:, COLLECTIVE_KINDS.index(kind)]
        return int(column.sum() if rank is None else column[rank])

    def bytes_of(self, kind: CollectiveKind, rank: int | None = None) -> int:
        column = self.bytes[:, COLLECTIVE_KINDS.index(kind)]
        return int(column.sum() if rank is None else column[rank])

    @property
    def halo_bytes(self) -> int:
        return self.bytes_of("all_to_all") + self.bytes_of("neighbor_all_to_all")

    @property
    def halo_calls(self) -> int:
        """All-to-all calls entered by rank 0 (every rank enters each collective once)."""
        return self.calls_of("all_to_all", 0) + self.calls_of("neighbor_all_to_all", 0)

    @property
    def all_reduce_bytes(self) -> int:
        return self.bytes_of("all_reduce")

    def diff(self, earlier: CommReport) -> CommReport:
        """Counter deltas since an earlier snapshot of the same runtime."""
        if earlier.calls.shape != self.calls.shape:
            raise errors.CollectiveError("Cannot diff reports of runtimes with different rank counts")
        return CommReport(self.calls - earlier.calls, self.bytes - earlier.bytes, self.steps - earlier.steps)

    def rows(self) -> list[tuple[int, CollectiveKind, int, int]]:
        return [
            (rank, kind, int(self.calls[rank, k]), int(self.bytes[rank, k]))
            for rank in range(self.num_ranks)
            for k, kind in enumerate(COLLECTIVE_KINDS)
        ]

    def to_csv(self, path: str | os.PathLike | None = None) -> str:
        """Render (rank, collective, calls, bytes) rows; also written to path if given."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(self.rows())
        text = buffer.getvalue()
        if path is not None:
            with open(path, "w", newline="") as f:
                f.write(text)
        return text
