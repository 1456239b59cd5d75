import typing
from dataclasses import dataclass

import numpy as np

from halognn import errors
from halognn._utils.text import render_table
from halognn.graph.graph import ReducedGraph

StatName = typing.Literal["local", "halo", "neighbors"]


@dataclass(slots=True, frozen=True, eq=False)
class HaloStats:
    """Per-rank sub-graph statistics: local nodes, halo nodes and neighbor ranks."""

    local: np.ndarray
    halo: np.ndarray
    neighbors: np.ndarray

    @property
    def num_ranks(self) -> int:
        return len(self.local)

    def summary(self, name: StatName) -> tuple[int, int, float]:
        """(min, max, avg) of one statistic over ranks."""
        values: np.ndarray = getattr(self, name)
        return int(values.min()), int(values.max()), float(values.mean())

    def as_dict(self) -> dict[str, tuple[int, int, float]]:
        return {name: self.summary(name) for name in typing.get_args(StatName)}

    def format_table(self) -> str:
        rows = [(name, *self.summary(name)) for name in typing.get_args(StatName)]
        return render_table((f"R={self.num_ranks}", "min", "max", "avg"), rows)


def halo_stats(graphs: typing.Sequence[ReducedGraph]) -> HaloStats:
    """Local / halo / neighbor counts of every rank."""
    if any(g.halo is None for g in graphs):
        raise errors.UninitializedError("Halo structures must be built before computing halo statistics")
    return HaloStats(
        local=np.array([g.num_local for g in graphs]),
        halo=np.array([g.num_halo for g in graphs]),
        neighbors=np.array([g.halo.num_neighbors for g in graphs]),  # type: ignore
    )
