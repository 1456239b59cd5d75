from halognn.gnn.config import PRESETS, GnnConfig, Preset, TrainConfig
from halognn.gnn.loss import consistent_loss, standard_loss
from halognn.gnn.model import ForwardPass, consistent_nmp_layer, decode, encode, forward, init_params
from halognn.gnn.train import (
    DistributedTrainer,
    GradientResult,
    LossTrace,
    compute_gradients,
    default_targets,
    evaluate,
    train_step,
)
