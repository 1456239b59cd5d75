from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from halognn import errors


@dataclass(slots=True, frozen=True, eq=False)
class HaloMap:
    """Per-neighbor send/receive index masks of one rank.

    `send_masks[k]` holds the local rows whose values go to `neighbors[k]`; `recv_masks[k]` holds the halo rows
    written with the values received from it. Both list the shared global ids in ascending order.
    """

    rank: int
    neighbors: tuple[int, ...]
    send_masks: tuple[np.ndarray, ...]
    recv_masks: tuple[np.ndarray, ...]

    def __post_init__(self):
        if not (len(self.neighbors) == len(self.send_masks) == len(self.recv_masks)):
            raise errors.IntegrityError(f"Rank {self.rank} halo map has mismatched neighbor and mask counts")

    @property
    def num_neighbors(self) -> int:
        return len(self.neighbors)

    def index_of(self, neighbor: int) -> int | None:
        try:
            return self.neighbors.index(neighbor)
        except ValueError:
            return None

    def send_mask(self, neighbor: int) -> np.ndarray:
        k = self.index_of(neighbor)
        return self.send_masks[k] if k is not None else np.zeros(0, dtype=np.int64)

    def recv_mask(self, neighbor: int) -> np.ndarray:
        k = self.index_of(neighbor)
        return self.recv_masks[k] if k is not None else np.zeros(0, dtype=np.int64)

    def max_buffer_rows(self) -> int:
        return max((len(m) for m in self.send_masks), default=0)


@dataclass(slots=True, frozen=True, eq=False)
class CollapseMap:
    """Reduced local index of every raw node slot of the rank's elements (in element order)."""

    elements: np.ndarray
    raw_to_reduced: np.ndarray


@dataclass(slots=True, frozen=True, eq=False)
class ReducedGraph:
    """One rank's reduced distributed graph: local rows first, then halo rows.

    Adjacency rows are directed (receiver, sender) pairs over local rows only; the first half lists every
    undirected edge once (i < j) and the second half the same edges reversed.
    """

    rank: int
    num_local: int
    num_halo: int
    positions: np.ndarray
    global_ids: np.ndarray
    adjacency: np.ndarray
    node_degree: np.ndarray
    edge_degree: np.ndarray
    node_features: np.ndarray | None = None
    edge_features: np.ndarray | None = None
    halo: HaloMap | None = None
    sync_table: np.ndarray | None = None  # (num_local, max multiplicity) rows into [values; zero row]

    @property
    def num_nodes(self) -> int:
        return self.num_local + self.num_halo

    @property
    def num_edges(self) -> int:
        """Directed edge count N_e."""
        return len(self.adjacency)

    @property
    def num_undirected_edges(self) -> int:
        return len(self.adjacency) // 2

    @property
    def local_global_ids(self) -> np.ndarray:
        return self.global_ids[: self.num_local]

    @property
    def receivers(self) -> np.ndarray:
        return self.adjacency[:, 0]

    @property
    def senders(self) -> np.ndarray:
        return self.adjacency[:, 1]

    @property
    def has_halos(self) -> bool:
        return self.halo is not None
