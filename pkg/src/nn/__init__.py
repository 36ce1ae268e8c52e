from .mlp import LAYER_SIZES, Gradients, MlpParameters, forward, loss_and_gradients
from .optim import AdamState, TrainConfig, adam_step
from .serialization import load_model, model_to_dict, save_model
from .sparsity import magnitude_prune, sparsity_metrics
from .train import LossHistory, train

__all__ = [
    "AdamState",
    "Gradients",
    "LAYER_SIZES",
    "LossHistory",
    "MlpParameters",
    "TrainConfig",
    "adam_step",
    "forward",
    "load_model",
    "loss_and_gradients",
    "magnitude_prune",
    "model_to_dict",
    "save_model",
    "sparsity_metrics",
    "train",
]
