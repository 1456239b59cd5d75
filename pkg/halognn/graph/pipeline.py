import logging
import typing

from halognn.graph.assemble import assemble_rank_graph
from halognn.graph.features import EdgeFeatureSet, populate_features
from halognn.graph.graph import ReducedGraph
from halognn.graph.halo import build_halo_structures
from halognn.mesh.box import Mesh
from halognn.mesh.partition import PartitionMap

log = logging.getLogger(__name__)

FeatureFn = typing.Callable[[ReducedGraph], typing.Any]


def distribute(
    mesh: Mesh,
    part: PartitionMap,
    features: FeatureFn | None = None,
    edge_features: EdgeFeatureSet = "full",
) -> list[ReducedGraph]:
    """Assemble every rank's reduced graph and build its halo structures.

    With `features`, node features are computed per rank from its graph (local rows) and edge features derived.
    """
    graphs = build_halo_structures([assemble_rank_graph(mesh, part, r)[0] for r in range(part.num_ranks)])
    if features is not None:
        graphs = populate_features(graphs, [features(g) for g in graphs], edge_features)
    log.info(
        f"Distributed {mesh.config.num_unique_nodes} unique nodes onto {part.num_ranks} ranks "
        f"({sum(g.num_halo for g in graphs)} halo rows in total)"
    )
    return graphs
