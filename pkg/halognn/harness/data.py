import typing

import numpy as np

from halognn.graph.features import EdgeFeatureSet
from halognn.graph.graph import ReducedGraph
from halognn.graph.pipeline import distribute
from halognn.mesh.box import Mesh, MeshConfig, build_box_mesh
from halognn.mesh.partition import Axis, BlockFactors, PartitionStrategy, partition_mesh


def tgv_field(positions: np.ndarray) -> np.ndarray:
    """Taylor-Green vortex initial velocity (u, v, w) at positions in [0, 2 pi]^3."""
    x, y, z = np.asarray(positions, dtype=np.float64).T
    u = np.sin(x) * np.cos(y) * np.cos(z)
    v = -np.cos(x) * np.sin(y) * np.cos(z)
    return np.stack([u, v, np.zeros_like(u)], axis=1)


def rescale_to_tgv_box(positions: np.ndarray, config: MeshConfig) -> np.ndarray:
    lo, hi = np.asarray(config.domain_min), np.asarray(config.domain_max)
    return 2.0 * np.pi * (np.asarray(positions) - lo) / (hi - lo)


def tgv_features(config: MeshConfig) -> typing.Callable[[ReducedGraph], np.ndarray]:
    """Per-rank node features: the Taylor-Green field on the mesh box mapped onto [0, 2 pi]^3."""

    def features(graph: ReducedGraph) -> np.ndarray:
        return tgv_field(rescale_to_tgv_box(graph.positions[: graph.num_local], config))

    return features


def prepare_graphs(
    mesh: Mesh | MeshConfig,
    num_ranks: int,
    strategy: PartitionStrategy = "block",
    edge_features: EdgeFeatureSet = "full",
    axis: Axis = "z",
    factors: BlockFactors | None = None,
) -> list[ReducedGraph]:
    """Partition, distribute and featurize a mesh with Taylor-Green node features."""
    mesh = build_box_mesh(mesh) if isinstance(mesh, MeshConfig) else mesh
    part = partition_mesh(mesh, num_ranks, strategy, axis=axis, factors=factors)
    return distribute(mesh, part, tgv_features(mesh.config), edge_features)
