from __future__ import annotations

import typing
from dataclasses import dataclass

import numpy as np

from halognn import errors
from halognn.nn.tape import Var, parameter


@dataclass(slots=True, frozen=True, eq=False)
class ModelParams:
    """Named parameter tensors in a fixed (initialization) order; also used for gradients."""

    tensors: dict[str, np.ndarray]

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.tensors)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self.tensors

    def __len__(self) -> int:
        return len(self.tensors)

    def items(self) -> typing.ItemsView[str, np.ndarray]:
        return self.tensors.items()

    def count(self) -> int:
        return sum(t.size for t in self.tensors.values())

    def copy(self) -> ModelParams:
        return ModelParams({name: t.copy() for name, t in self.tensors.items()})

    def replicate(self, num_ranks: int) -> list[ModelParams]:
        """Independent per-rank copies."""
        return [self.copy() for _ in range(num_ranks)]

    def zeros_like(self) -> ModelParams:
        return ModelParams({name: np.zeros_like(t) for name, t in self.tensors.items()})

    def check_congruent(self, other: ModelParams) -> None:
        if self.names != other.names:
            raise errors.ShapeError(f"Parameter names differ: {self.names} vs {other.names}")
        for name, t in self.tensors.items():
            if t.shape != other[name].shape:
                raise errors.ShapeError(f"Invalid shape of {name}: {other[name].shape}, expected {t.shape}")

    def flatten(self) -> np.ndarray:
        return np.concatenate([t.ravel() for t in self.tensors.values()]) if self.tensors else np.zeros(0)

    def unflatten(self, vector: np.ndarray) -> ModelParams:
        """Tensors of this layout filled from a flat vector."""
        if vector.size != self.count():
            raise errors.ShapeError(f"Cannot unflatten {vector.size} values into {self.count()} parameters")
        tensors, offset = {}, 0
        for name, t in self.tensors.items():
            tensors[name] = vector[offset : offset + t.size].reshape(t.shape).copy()
            offset += t.size
        return ModelParams(tensors)

    def equals(self, other: ModelParams) -> bool:
        """Bitwise equality of every tensor."""
        return self.names == other.names and all(np.array_equal(t, other[n]) for n, t in self.tensors.items())

    def as_vars(self) -> dict[str, Var]:
        return {name: parameter(t) for name, t in self.tensors.items()}

    @classmethod
    def from_grads(cls, variables: dict[str, Var]) -> ModelParams:
        return cls({name: v.adjoint() for name, v in variables.items()})


def param_count(params: ModelParams) -> int:
    """Total number of trainable scalars."""
    return params.count()
