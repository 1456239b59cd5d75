from __future__ import annotations

import typing
from dataclasses import dataclass

import numpy as np

from halognn import errors
from halognn.nn import ops
from halognn.nn.params import ModelParams
from halognn.nn.tape import Tape, Var, parameter

NormPlacement = typing.Literal["hidden", "output"]
NORM_PLACEMENTS: tuple[NormPlacement, ...] = typing.get_args(NormPlacement)


@dataclass(slots=True, frozen=True)
class MlpSpec:
    """Input projection, k hidden layers of width H and an output projection.

    "hidden": each hidden layer is h + ELU(LN(h W + b)); "output": ELU after the input projection, hidden layers
    h + ELU(h W + b), and a single layer norm on the output. With k = 0 the MLP is one linear in -> out.
    """

    in_dim: int
    out_dim: int
    hidden_width: int
    num_hidden_layers: int
    use_layernorm: bool = True
    use_residual: bool = True
    norm_placement: NormPlacement = "hidden"

    def __post_init__(self):
        for name in ("in_dim", "out_dim", "hidden_width"):
            if getattr(self, name) < 1:
                raise errors.ShapeError(f"Invalid {name}={getattr(self, name)}: must be positive")
        if self.num_hidden_layers < 0:
            raise errors.ShapeError(f"Invalid num_hidden_layers={self.num_hidden_layers}: must be non-negative")
        if self.norm_placement not in NORM_PLACEMENTS:
            raise errors.ShapeError(f"Invalid norm_placement={self.norm_placement!r}: expected one of {NORM_PLACEMENTS}")

    def shapes(self, prefix: str) -> dict[str, tuple[int, ...]]:
        """Parameter shapes in initialization order."""
        H, k = self.hidden_width, self.num_hidden_layers
        if k == 0:
            return {f"{prefix}.out.weight": (self.in_dim, self.out_dim), f"{prefix}.out.bias": (self.out_dim,)}
        shapes: dict[str, tuple[int, ...]] = {f"{prefix}.in.weight": (self.in_dim, H), f"{prefix}.in.bias": (H,)}
        for layer in range(k):
            shapes[f"{prefix}.hidden{layer}.weight"] = (H, H)
            shapes[f"{prefix}.hidden{layer}.bias"] = (H,)
            if self.use_layernorm and self.norm_placement == "hidden":
                shapes[f"{prefix}.hidden{layer}.norm.scale"] = (H,)
                shapes[f"{prefix}.hidden{layer}.norm.shift"] = (H,)
        shapes[f"{prefix}.out.weight"] = (H, self.out_dim)
        shapes[f"{prefix}.out.bias"] = (self.out_dim,)
        if self.use_layernorm and self.norm_placement == "output":
            shapes[f"{prefix}.norm.scale"] = (self.out_dim,)
            shapes[f"{prefix}.norm.shift"] = (self.out_dim,)
        return shapes


def init_mlp(spec: MlpSpec, rng: np.random.Generator, prefix: str = "mlp") -> dict[str, np.ndarray]:
    """Glorot-uniform weights, zero biases, unit layer-norm scales, zero shifts."""
    tensors = {}
    for name, shape in spec.shapes(prefix).items():
        if name.endswith(".weight"):
            bound = np.sqrt(6.0 / (shape[0] + shape[1]))
            tensors[name] = rng.uniform(-bound, bound, size=shape)
        elif name.endswith(".scale"):
            tensors[name] = np.ones(shape)
        else:
            tensors[name] = np.zeros(shape)
    return tensors


def apply_mlp(tape: Tape, params: typing.Mapping[str, Var], spec: MlpSpec, x: Var, prefix: str = "mlp") -> Var:
    """Record the MLP on a tape."""
    if x.value.ndim != 2 or x.shape[1] != spec.in_dim:
        raise errors.ShapeError(f"Invalid {prefix} input shape {x.shape}: expected (rows, {spec.in_dim})")

    def dense(name: str, h: Var) -> Var:
        return ops.linear(tape, h, params[f"{name}.weight"], params[f"{name}.bias"])

    if spec.num_hidden_layers == 0:
        return dense(f"{prefix}.out", x)

    h = dense(f"{prefix}.in", x)
    if spec.norm_placement == "output":
        h = ops.elu(tape, h)
    for layer in range(spec.num_hidden_layers):
        name = f"{prefix}.hidden{layer}"
        z = dense(name, h)
        if spec.use_layernorm and spec.norm_placement == "hidden":
            z = ops.layernorm(tape, z, params[f"{name}.norm.scale"], params[f"{name}.norm.shift"])
        z = ops.elu(tape, z)
        h = ops.add(tape, h, z) if spec.use_residual else z
    y = dense(f"{prefix}.out", h)
    if spec.use_layernorm and spec.norm_placement == "output":
        y = ops.layernorm(tape, y, params[f"{prefix}.norm.scale"], params[f"{prefix}.norm.shift"])
    return y


def mlp_forward(
    params: ModelParams | typing.Mapping[str, np.ndarray], spec: MlpSpec, x: np.ndarray, prefix: str = "mlp"
) -> tuple[np.ndarray, Tape]:
    """Standalone MLP evaluation; the returned tape feeds `backward`."""
    tape = Tape()
    tensors = params.tensors if isinstance(params, ModelParams) else params
    variables = {name: tape.watch(name, parameter(t)) for name, t in tensors.items() if name.startswith(f"{prefix}.")}
    x_var = parameter(x)
    tape.output = apply_mlp(tape, variables, spec, x_var, prefix)
    tape.watched["__input__"] = x_var
    return tape.output.value, tape


def backward(tape: Tape, output_adjoint: np.ndarray) -> tuple[np.ndarray, ModelParams]:
    """Input adjoint and parameter gradients of an `mlp_forward` tape."""
    if tape.output is None:
        raise errors.NumericsError("Tape has no recorded output")
    tape.backward([(tape.output, output_adjoint)])
    x = tape.watched["__input__"]
    return x.adjoint(), ModelParams.from_grads({n: v for n, v in tape.watched.items() if n != "__input__"})
