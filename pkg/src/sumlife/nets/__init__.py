from .adam import AdamState, adam_step
from .network import Hyper, Network, predict
from .losses import combined_loss, cross_entropy, ncontrast_loss
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "AdamState",
    "adam_step",
    "Hyper",
    "Network",
    "predict",
    "combined_loss",
    "cross_entropy",
    "ncontrast_loss",
    "load_checkpoint",
    "save_checkpoint",
]
