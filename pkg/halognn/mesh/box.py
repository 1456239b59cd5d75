from __future__ import annotations

import logging
import typing
from dataclasses import dataclass, field

import numpy as np

from halognn import errors
from halognn.mesh.gll import gll_points

log = logging.getLogger(__name__)

Vector3 = tuple[float, float, float]


class MeshConfigKwargs(typing.TypedDict):
    """Keys accepted by `MeshConfig.from_kwargs`."""

    elements: int
    order: int
    domain_min: typing.NotRequired[typing.Sequence[float]]
    domain_max: typing.NotRequired[typing.Sequence[float]]


@dataclass(slots=True, frozen=True)
class MeshConfig:
    """Structured box of E^3 hexahedral elements of polynomial order p."""

    elements_per_axis: int
    poly_order: int
    domain_min: Vector3 = (0.0, 0.0, 0.0)
    domain_max: Vector3 = (1.0, 1.0, 1.0)

    def __post_init__(self):
        E, p = self.elements_per_axis, self.poly_order
        if E < 1:
            raise errors.MeshConfigError(f"Invalid {E=}: at least one element per axis is required")
        if p < 1:
            raise errors.InvalidOrderError(f"Invalid {p=}: polynomial order must be at least 1")
        if len(self.domain_min) != 3 or len(self.domain_max) != 3:
            raise errors.MeshConfigError(f"Invalid domain {self.domain_min} -> {self.domain_max}: expected 3-vectors")
        # normalize to float tuples (json / numpy inputs)
        object.__setattr__(self, "domain_min", tuple(float(v) for v in self.domain_min))
        object.__setattr__(self, "domain_max", tuple(float(v) for v in self.domain_max))
        if any(hi <= lo for lo, hi in zip(self.domain_min, self.domain_max)):
            raise errors.MeshConfigError(
                f"Invalid domain {self.domain_min} -> {self.domain_max}: max must exceed min componentwise"
            )

    @classmethod
    def from_kwargs(cls, **kwargs: typing.Unpack[MeshConfigKwargs]) -> MeshConfig:
        return cls(
            elements_per_axis=kwargs["elements"],
            poly_order=kwargs["order"],
            domain_min=tuple(kwargs.get("domain_min", (0.0, 0.0, 0.0))),  # type: ignore
            domain_max=tuple(kwargs.get("domain_max", (1.0, 1.0, 1.0))),  # type: ignore
        )

    @property
    def num_elements(self) -> int:
        return self.elements_per_axis**3

    @property
    def nodes_per_element(self) -> int:
        return (self.poly_order + 1) ** 3

    @property
    def lattice_size(self) -> int:
        """Number of unique lattice points per axis (E p + 1)."""
        return self.elements_per_axis * self.poly_order + 1

    @property
    def num_unique_nodes(self) -> int:
        return self.lattice_size**3

    @property
    def extent(self) -> float:
        return max(hi - lo for lo, hi in zip(self.domain_min, self.domain_max))

    def to_dict(self) -> dict[str, typing.Any]:
        return {
            "elements": self.elements_per_axis,
            "order": self.poly_order,
            "domain_min": list(self.domain_min),
            "domain_max": list(self.domain_max),
        }


@dataclass(slots=True, frozen=True, eq=False)
class Mesh:
    """Box mesh with per-element GLL node positions and structured global node ids.

    Element e = (ez E + ey) E + ex owns local lattice slots l = (k (p+1) + j) (p+1) + i; the slot maps to the
    global lattice point (ex p + i, ey p + j, ez p + k).
    """

    config: MeshConfig
    element_origins: np.ndarray  # (E^3, 3)
    gll_1d: np.ndarray  # (p+1,)
    node_positions: np.ndarray  # (E^3, (p+1)^3, 3)
    global_ids: np.ndarray  # (E^3, (p+1)^3)
    _lattice_coordinates: tuple[np.ndarray, np.ndarray, np.ndarray] = field(repr=False)

    @property
    def num_elements(self) -> int:
        return self.config.num_elements

    @property
    def num_raw_nodes(self) -> int:
        return self.global_ids.size

    def element_coordinates(self) -> np.ndarray:
        """Structured (ex, ey, ez) coordinates of every element, shape (E^3, 3)."""
        return _element_coordinates(self.config.elements_per_axis)

    def lattice_positions(self) -> np.ndarray:
        """Physical position of every global id, shape ((E p + 1)^3, 3)."""
        x, y, z = self._lattice_coordinates
        gz, gy, gx = np.meshgrid(z, y, x, indexing="ij")
        return np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)


def _element_coordinates(E: int) -> np.ndarray:
    e = np.arange(E**3)
    return np.stack([e % E, (e // E) % E, e // (E * E)], axis=1)


def _local_coordinates(p: int) -> np.ndarray:
    l = np.arange((p + 1) ** 3)
    return np.stack([l % (p + 1), (l // (p + 1)) % (p + 1), l // ((p + 1) ** 2)], axis=1)


def _axis_coordinates(lo: float, hi: float, E: int, gll: np.ndarray) -> np.ndarray:
    """Physical coordinate of each global lattice index along one axis."""
    p = len(gll) - 1
    h = (hi - lo) / E
    g = np.arange(E * p + 1)
    element = np.minimum(g // p, E - 1)
    local = g - element * p
    return lo + h * element + h * (gll[local] + 1.0) / 2.0


def build_box_mesh(config: MeshConfig) -> Mesh:
    """Tile the configured box with E^3 spectral elements."""
    E, p, n = config.elements_per_axis, config.poly_order, config.lattice_size
    gll = gll_points(p)

    element_xyz = _element_coordinates(E)
    local_xyz = _local_coordinates(p)
    # (E^3, (p+1)^3, 3) global lattice coordinates
    lattice = element_xyz[:, None, :] * p + local_xyz[None, :, :]
    global_ids = (lattice[..., 2] * n + lattice[..., 1]) * n + lattice[..., 0]

    # every lattice coordinate is looked up in one shared table, so coincident nodes are bitwise identical
    coordinates = tuple(
        _axis_coordinates(lo, hi, E, gll) for lo, hi in zip(config.domain_min, config.domain_max)
    )
    positions = np.stack([coordinates[axis][lattice[..., axis]] for axis in range(3)], axis=-1)

    lo = np.asarray(config.domain_min)
    h = (np.asarray(config.domain_max) - lo) / E
    origins = lo + h * element_xyz

    log.info(
        f"Built box mesh: {E**3} elements of order {p}, {global_ids.size} raw nodes, {n**3} unique nodes"
    )
    return Mesh(
        config=config,
        element_origins=origins,
        gll_1d=np.array(gll),
        node_positions=positions,
        global_ids=global_ids.astype(np.int64),
        _lattice_coordinates=coordinates,  # type: ignore
    )


def position_hash_ids(mesh: Mesh) -> np.ndarray:
    """Coincidence oracle: ids from positions snapped to a grid of spacing 1e-9 x domain extent.

    Ids are dense but not ordered like the structured lattice ids; only the induced equivalence is meaningful.
    """
    tau = 1e-9 * mesh.config.extent
    snapped = np.round((mesh.node_positions.reshape(-1, 3) - np.asarray(mesh.config.domain_min)) / tau)
    _, ids = np.unique(snapped.astype(np.int64), axis=0, return_inverse=True)
    return ids.reshape(mesh.global_ids.shape)
