from __future__ import annotations

import time
import typing
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from halognn import errors

if typing.TYPE_CHECKING:
    from halognn.comm.clock import SimClock

# tape entries recorded outside any rank context belong to collectives
COLLECTIVE = -1


@dataclass(slots=True, eq=False)
class Var:
    """A value with an accumulated adjoint."""

    value: np.ndarray
    requires_grad: bool = False
    grad: np.ndarray | None = field(default=None, repr=False)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def accumulate(self, adjoint: np.ndarray) -> None:
        if not self.requires_grad:
            return
        if adjoint.shape != self.value.shape:
            raise errors.ShapeError(f"Adjoint shape {adjoint.shape} does not match value shape {self.value.shape}")
        self.grad = adjoint.copy() if self.grad is None else self.grad + adjoint

    def adjoint(self) -> np.ndarray:
        """Accumulated adjoint, zeros if nothing flowed back."""
        return np.zeros_like(self.value) if self.grad is None else self.grad


def constant(value: np.ndarray | float) -> Var:
    return Var(np.asarray(value, dtype=np.float64))


def parameter(value: np.ndarray | float) -> Var:
    return Var(np.asarray(value, dtype=np.float64), requires_grad=True)


class Tape:
    """Reverse-mode record of a (possibly multi-rank, lockstep) program.

    Entries carry the rank that recorded them so the backward sweep can charge compute to ranks on a `SimClock`.
    A tape can be swept backward once.
    """

    def __init__(self, clock: SimClock | None = None):
        self.clock = clock
        self.watched: dict[str, Var] = {}
        self.output: Var | None = None
        self._entries: list[tuple[int, typing.Callable[[], None]]] = []
        self._rank = COLLECTIVE
        self._swept = False

    def __len__(self):
        return len(self._entries)

    @contextmanager
    def rank(self, rank: int):
        """Record (and time) the enclosed operations as work of one rank."""
        previous, self._rank = self._rank, rank
        start = time.perf_counter()
        try:
            yield self
        finally:
            if self.clock is not None:
                self.clock.charge(rank, time.perf_counter() - start)
            self._rank = previous

    def record(self, backward: typing.Callable[[], None]) -> None:
        if self._swept:
            raise errors.NumericsError("Cannot record onto a tape that was already swept backward")
        self._entries.append((self._rank, backward))

    def watch(self, name: str, var: Var) -> Var:
        self.watched[name] = var
        return var

    def backward(self, seeds: typing.Iterable[tuple[Var, np.ndarray | float]]) -> None:
        """Seed output adjoints and sweep every recorded entry in reverse."""
        if self._swept:
            raise errors.NumericsError("Tape was already swept backward")
        self._swept = True
        for var, adjoint in seeds:
            adjoint = np.asarray(adjoint, dtype=np.float64)
            if adjoint.shape != var.shape:
                raise errors.ShapeError(f"Seed adjoint shape {adjoint.shape} does not match output shape {var.shape}")
            var.accumulate(adjoint)

        # entries are dropped as they run so intermediates are freed during the sweep
        while self._entries:
            rank, entry = self._entries.pop()
            if rank == COLLECTIVE or self.clock is None:
                entry()
            else:
                with self.clock.compute(rank):
                    entry()
            del entry
