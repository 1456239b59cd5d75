from __future__ import annotations

import typing
from dataclasses import asdict, dataclass

from halognn import errors
from halognn._utils.math import prioritize
from halognn.comm.collectives import EXCHANGE_MODES, ExchangeMode, parse_mode
from halognn.graph.features import EDGE_FEATURE_DIMS, EdgeFeatureSet
from halognn.nn.checkpoint import config_hash
from halognn.nn.mlp import NORM_PLACEMENTS, MlpSpec, NormPlacement
from halognn.nn.optim import AdamConfig

Preset = typing.Literal["small", "large"]
_PRESETS: dict[Preset, tuple[int, int, int]] = {
    # (hidden_dim, num_mp_layers, mlp_hidden_layers)
    "small": (8, 4, 2),
    "large": (32, 4, 5),
}
PRESETS: tuple[Preset, ...] = typing.get_args(Preset)


class GnnConfigKwargs(typing.TypedDict):
    """Keys accepted by `GnnConfig.from_kwargs` / `GnnConfig.preset` overrides."""

    hidden_dim: typing.NotRequired[int]
    num_mp_layers: typing.NotRequired[int]
    mlp_hidden_layers: typing.NotRequired[int]
    in_node_dim: typing.NotRequired[int]
    in_edge_dim: typing.NotRequired[int | None]
    out_dim: typing.NotRequired[int]
    exchange_mode: typing.NotRequired[str]
    norm_placement: typing.NotRequired[NormPlacement]
    edge_features: typing.NotRequired[EdgeFeatureSet]


@dataclass(slots=True, frozen=True)
class GnnConfig:
    """Encode-process-decode GNN: N_H hidden channels, M message-passing layers, k hidden layers per MLP."""

    hidden_dim: int
    num_mp_layers: int
    mlp_hidden_layers: int
    in_node_dim: int = 3
    in_edge_dim: int = 7
    out_dim: int = 3
    exchange_mode: ExchangeMode = "na2a"
    norm_placement: NormPlacement = "hidden"
    edge_features: EdgeFeatureSet = "full"

    def __post_init__(self):
        for name in ("hidden_dim", "in_node_dim", "in_edge_dim", "out_dim"):
            if getattr(self, name) < 1:
                raise errors.ModelConfigError(f"Invalid {name}={getattr(self, name)}: must be positive")
        if self.num_mp_layers < 0 or self.mlp_hidden_layers < 0:
            raise errors.ModelConfigError(
                f"Invalid depth ({self.num_mp_layers=}, {self.mlp_hidden_layers=}): must be non-negative"
            )
        if self.exchange_mode not in EXCHANGE_MODES:
            raise errors.ModelConfigError(f"Invalid exchange_mode={self.exchange_mode!r}: expected one of {EXCHANGE_MODES}")
        if self.norm_placement not in NORM_PLACEMENTS:
            raise errors.ModelConfigError(f"Invalid norm_placement={self.norm_placement!r}: expected one of {NORM_PLACEMENTS}")
        if self.edge_features not in EDGE_FEATURE_DIMS:
            raise errors.ModelConfigError(f"Invalid edge_features={self.edge_features!r}")
        if self.in_edge_dim != EDGE_FEATURE_DIMS[self.edge_features]:
            raise errors.ModelConfigError(
                f"Invalid in_edge_dim={self.in_edge_dim}: '{self.edge_features}' edge features have "
                f"{EDGE_FEATURE_DIMS[self.edge_features]} columns"
            )

    @classmethod
    def from_kwargs(cls, **kwargs: typing.Unpack[GnnConfigKwargs]) -> GnnConfig:
        small = _PRESETS["small"]
        edge_features: EdgeFeatureSet = kwargs.get("edge_features", "full")
        return cls(
            hidden_dim=kwargs.get("hidden_dim", small[0]),
            num_mp_layers=kwargs.get("num_mp_layers", small[1]),
            mlp_hidden_layers=kwargs.get("mlp_hidden_layers", small[2]),
            in_node_dim=kwargs.get("in_node_dim", 3),
            in_edge_dim=prioritize(kwargs.get("in_edge_dim"), default=EDGE_FEATURE_DIMS.get(edge_features, 7)),
            out_dim=kwargs.get("out_dim", 3),
            exchange_mode=parse_mode(kwargs.get("exchange_mode", "na2a")),
            norm_placement=kwargs.get("norm_placement", "hidden"),
            edge_features=edge_features,
        )

    @classmethod
    def preset(cls, name: Preset, **overrides: typing.Unpack[GnnConfigKwargs]) -> GnnConfig:
        if name not in _PRESETS:
            raise errors.ModelConfigError(f"Invalid preset {name=}: expected one of {PRESETS}")
        hidden_dim, num_mp_layers, mlp_hidden_layers = _PRESETS[name]
        return cls.from_kwargs(
            **{
                "hidden_dim": hidden_dim,
                "num_mp_layers": num_mp_layers,
                "mlp_hidden_layers": mlp_hidden_layers,
                **overrides,
            }  # type: ignore
        )

    def with_mode(self, mode: ExchangeMode | str) -> GnnConfig:
        return GnnConfig.from_kwargs(**{**self.to_dict(), "exchange_mode": mode})  # type: ignore

    # mlp layout
    def _spec(self, in_dim: int, out_dim: int, decoder: bool = False) -> MlpSpec:
        return MlpSpec(
            in_dim=in_dim,
            out_dim=out_dim,
            hidden_width=self.hidden_dim,
            num_hidden_layers=self.mlp_hidden_layers,
            # the output-norm convention leaves the decoder unnormalized
            use_layernorm=not (decoder and self.norm_placement == "output"),
            norm_placement=self.norm_placement,
        )

    def mlp_specs(self) -> dict[str, MlpSpec]:
        """Every MLP of the model by parameter prefix, in initialization order."""
        H = self.hidden_dim
        specs = {
            "node_encoder": self._spec(self.in_node_dim, H),
            "edge_encoder": self._spec(self.in_edge_dim, H),
        }
        for m in range(self.num_mp_layers):
            specs[f"mp{m}.edge"] = self._spec(3 * H, H)
            specs[f"mp{m}.node"] = self._spec(2 * H, H)
        specs["decoder"] = self._spec(H, self.out_dim, decoder=True)
        return specs

    def to_dict(self) -> dict[str, typing.Any]:
        return asdict(self)

    def digest(self) -> str:
        """Hash of the architecture (the exchange mode does not change the parameter layout)."""
        return config_hash({k: v for k, v in self.to_dict().items() if k != "exchange_mode"})


class TrainConfigKwargs(typing.TypedDict):
    lr: typing.NotRequired[float]
    beta1: typing.NotRequired[float]
    beta2: typing.NotRequired[float]
    eps: typing.NotRequired[float]
    iterations: typing.NotRequired[int]
    seed: typing.NotRequired[int]
    audit_interval: typing.NotRequired[int]
    log_interval: typing.NotRequired[int]


@dataclass(slots=True, frozen=True)
class TrainConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    iterations: int = 100
    seed: int = 0
    audit_interval: int = 10  # replica equality check every n steps (0 disables)
    log_interval: int = 10

    def __post_init__(self):
        if self.iterations < 1:
            raise errors.ModelConfigError(f"Invalid iterations={self.iterations}: at least one is required")
        if self.audit_interval < 0 or self.log_interval < 0:
            raise errors.ModelConfigError("Audit and log intervals must be non-negative")
        # eager optimizer validation
        self.adam()

    @classmethod
    def from_kwargs(cls, **kwargs: typing.Unpack[TrainConfigKwargs]) -> TrainConfig:
        return cls(**kwargs)

    def adam(self) -> AdamConfig:
        return AdamConfig(lr=self.lr, beta1=self.beta1, beta2=self.beta2, eps=self.eps)

    def to_dict(self) -> dict[str, typing.Any]:
        return asdict(self)
