from halognn.nn.checkpoint import config_hash, load_checkpoint, save_checkpoint
from halognn.nn.gradcheck import gradient_check
from halognn.nn.mlp import MlpSpec, NormPlacement, apply_mlp, backward, init_mlp, mlp_forward
from halognn.nn.optim import AdamConfig, AdamState, adam_step
from halognn.nn.params import ModelParams, param_count
from halognn.nn.tape import Tape, Var, constant, parameter
