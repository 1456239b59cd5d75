from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from halognn import errors
from halognn.nn.params import ModelParams


@dataclass(slots=True, frozen=True)
class AdamConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.lr <= 0:
            raise errors.OptimizerError(f"Invalid lr={self.lr}: must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise errors.OptimizerError(f"Invalid betas ({self.beta1}, {self.beta2}): must lie in [0, 1)")
        if self.eps <= 0:
            raise errors.OptimizerError(f"Invalid eps={self.eps}: must be positive")


@dataclass(slots=True, frozen=True, eq=False)
class AdamState:
    m: ModelParams
    v: ModelParams
    step: int = 0

    @classmethod
    def zeros(cls, params: ModelParams) -> AdamState:
        return cls(params.zeros_like(), params.zeros_like())

    def equals(self, other: AdamState) -> bool:
        return self.step == other.step and self.m.equals(other.m) and self.v.equals(other.v)


def adam_step(
    params: ModelParams, grads: ModelParams, state: AdamState, config: AdamConfig = AdamConfig()
) -> tuple[ModelParams, AdamState]:
    """One bias-corrected Adam update; inputs are left untouched."""
    params.check_congruent(grads)
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise errors.OptimizerError(f"Non-finite gradient in {name}")

    step = state.step + 1
    b1, b2 = config.beta1, config.beta2
    correction1, correction2 = 1.0 - b1**step, 1.0 - b2**step
    tensors, m, v = {}, {}, {}
    for name, p in params.items():
        g = grads[name]
        m[name] = b1 * state.m[name] + (1.0 - b1) * g
        v[name] = b2 * state.v[name] + (1.0 - b2) * g * g
        m_hat = m[name] / correction1
        v_hat = v[name] / correction2
        tensors[name] = p - config.lr * m_hat / (np.sqrt(v_hat) + config.eps)
    return ModelParams(tensors), AdamState(ModelParams(m), ModelParams(v), step)
