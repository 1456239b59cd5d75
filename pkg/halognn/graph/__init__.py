from halognn.graph.assemble import assemble_rank_graph, element_edges
from halognn.graph.diagnostics import GraphDiagnostics, graph_diagnostics
from halognn.graph.features import EDGE_FEATURE_DIMS, EdgeFeatureSet, init_edge_features, populate_features
from halognn.graph.graph import CollapseMap, HaloMap, ReducedGraph
from halognn.graph.halo import build_halo_structures, compute_sync_table
from halognn.graph.io import load_graph, load_graphs, save_graphs
from halognn.graph.pipeline import distribute
from halognn.graph.stats import HaloStats, halo_stats
