from .tensor import (
    Tensor,
    channel_max,
    channel_mean,
    concat_channels,
    conv2d,
    global_avg_pool,
    l1_loss,
    relu,
    sigmoid,
    tsum,
)
from .layers import (
    DAB,
    RRG,
    ChannelAttention,
    Conv2d,
    Module,
    SpatialAttention,
)
from .optim import Adam, OptimizerState, adam_step, cosine_lr
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint

__all__ = [
    "Tensor", "conv2d", "relu", "sigmoid", "global_avg_pool",
    "channel_max", "channel_mean", "concat_channels", "l1_loss", "tsum",
    "Module", "Conv2d", "ChannelAttention", "SpatialAttention", "DAB", "RRG",
    "Adam", "OptimizerState", "adam_step", "cosine_lr",
    "CheckpointError", "load_checkpoint", "save_checkpoint",
]
