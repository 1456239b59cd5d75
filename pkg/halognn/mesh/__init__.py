from halognn.mesh.box import Mesh, MeshConfig, build_box_mesh, position_hash_ids
from halognn.mesh.gll import gll_points, gll_weights
from halognn.mesh.io import load_mesh, save_mesh
from halognn.mesh.partition import PartitionMap, PartitionStrategy, block_factors, partition_mesh
