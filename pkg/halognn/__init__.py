from halognn.comm import RankRuntime, comm_report
from halognn.gnn import DistributedTrainer, GnnConfig, TrainConfig, forward, init_params
from halognn.graph import ReducedGraph, distribute
from halognn.mesh import MeshConfig, build_box_mesh, partition_mesh
