"""Layer zoo: convolutions, channel/spatial attention, the dual attention
block and the recursive residual group."""

from __future__ import annotations

import numpy as np

from .tensor import (
    Tensor,
    channel_max,
    channel_mean,
    concat_channels,
    conv2d,
    global_avg_pool,
    relu,
    sigmoid,
)


class Module:
    """Parameter container with recursive discovery by attribute walk."""

    def named_parameters(self, prefix: str = ""):
        for name, value in vars(self).items():
            full = f"{prefix}{name}"
            if isinstance(value, Tensor) and value.requires_grad:
                yield full, value
            elif isinstance(value, Module):
                yield from value.named_parameters(f"{full}.")
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{full}.{i}.")

    def parameters(self) -> list[Tensor]:
        return [p for _, p in self.named_parameters()]

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    def __call__(self, *args):
        return self.forward(*args)


class Conv2d(Module):
    """Stride-1 same-padding conv; weights uniform in +-1/sqrt(fan_in)."""

    def __init__(self, in_ch: int, out_ch: int, kernel: int, rng: np.random.Generator):
        if kernel not in (1, 3):
            raise ValueError("kernel must be 1 or 3")
        bound = 1.0 / np.sqrt(in_ch * kernel * kernel)
        self.weight = Tensor(
            rng.uniform(-bound, bound, size=(out_ch, in_ch, kernel, kernel)),
            requires_grad=True,
        )
        self.bias = Tensor(np.zeros(out_ch), requires_grad=True)

    def forward(self, x: Tensor) -> Tensor:
        return conv2d(x, self.weight, self.bias)


class ChannelAttention(Module):
    """Squeeze (global average pool) -> reduce -> expand -> sigmoid gate."""

    def __init__(self, channels: int, reduction: int, rng: np.random.Generator):
        if channels % reduction != 0:
            raise ValueError(
                f"reduction {reduction} does not divide channels {channels}"
            )
        squeezed = channels // reduction
        self.reduce = Conv2d(channels, squeezed, 1, rng)
        self.expand = Conv2d(squeezed, channels, 1, rng)

    def forward(self, x: Tensor) -> Tensor:
        gate = sigmoid(self.expand(relu(self.reduce(global_avg_pool(x)))))
        return x * gate


class SpatialAttention(Module):
    """Per-pixel gate from pooled channel-max and channel-mean maps."""

    def __init__(self, rng: np.random.Generator):
        self.conv = Conv2d(2, 1, 3, rng)

    def forward(self, x: Tensor) -> Tensor:
        pooled = concat_channels(channel_max(x), channel_mean(x))
        return x * sigmoid(self.conv(pooled))


class DAB(Module):
    """Dual attention block: conv-relu-conv, then spatial and channel
    attention in series, added back to the input. Identity at zero init."""

    def __init__(self, channels: int, reduction: int, rng: np.random.Generator):
        self.conv1 = Conv2d(channels, channels, 3, rng)
        self.conv2 = Conv2d(channels, channels, 3, rng)
        self.spatial = SpatialAttention(rng)
        self.channel = ChannelAttention(channels, reduction, rng)

    def forward(self, x: Tensor) -> Tensor:
        f = self.conv2(relu(self.conv1(x)))
        return x + self.channel(self.spatial(f))


class RRG(Module):
    """Recursive residual group: two DABs and a conv, residual overall."""

    def __init__(self, channels: int, reduction: int, rng: np.random.Generator):
        self.dab1 = DAB(channels, reduction, rng)
        self.dab2 = DAB(channels, reduction, rng)
        self.conv = Conv2d(channels, channels, 3, rng)

    def forward(self, x: Tensor) -> Tensor:
        return x + self.conv(self.dab2(self.dab1(x)))
