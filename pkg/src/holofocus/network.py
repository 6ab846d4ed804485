"""Untrained convolutional hourglass mapping a hologram to a complex object.

Default architecture (input 1 x H x W):

    stage       op                               channels      spatial
    enc1        conv3x3 s2 + leaky-relu          1 -> 16       H/2
    enc2        conv3x3 s2 + leaky-relu          16 -> 32      H/4
    enc3        conv3x3 s2 + leaky-relu          32 -> 64      H/8
    enc4        conv3x3 s2 + leaky-relu          64 -> 128     H/16
    dec1        up x2, conv3x3 + leaky-relu      128 -> 64     H/8
    dec2        up x2, conv3x3 + leaky-relu      64 -> 32      H/4
    dec3        up x2, conv3x3 + leaky-relu      32 -> 16      H/2
    dec4        up x2, conv3x3 + leaky-relu      16 -> 16      H
    head        conv1x1, no activation           16 -> 2       H

196,386 parameters at the default widths.  Output channel 0 is the real
part of the object field, channel 1 the imaginary part.  Inputs whose sides
are not multiples of 16 are edge-padded up to the next multiple and the
output is cropped back, so any hologram size is accepted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .tensor import ShapeError, Tensor

__all__ = ["AutoencoderSpec", "Autoencoder", "build"]


@dataclass(frozen=True)
class AutoencoderSpec:
    in_channels: int = 1
    widths: tuple[int, ...] = (16, 32, 64, 128)
    kernel_size: int = 3
    leaky_slope: float = 0.1
    out_channels: int = 2
    # Real-channel bias of the head starts at the unit plane-wave background.
    background: float = 1.0
    # Head weights start this much smaller than fan-in scaling would give.
    head_scale: float = 0.1

    def __post_init__(self):
        if not self.widths or any(w < 1 for w in self.widths):
            raise ValueError(f"widths must be positive, got {self.widths}")
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ValueError("kernel_size must be a positive odd integer")
        if self.out_channels != 2:
            raise ValueError("output must have exactly 2 (real, imag) channels")

    @property
    def depth(self) -> int:
        return len(self.widths)

    def layer_shapes(self) -> list[tuple[str, tuple[int, int, int, int]]]:
        k = self.kernel_size
        shapes = []
        c = self.in_channels
        for i, w in enumerate(self.widths):
            shapes.append((f"enc{i + 1}", (w, c, k, k)))
            c = w
        dec_widths = list(reversed(self.widths[:-1])) + [self.widths[0]]
        for i, w in enumerate(dec_widths):
            shapes.append((f"dec{i + 1}", (w, c, k, k)))
            c = w
        shapes.append(("head", (self.out_channels, c, 1, 1)))
        return shapes

    def parameter_count(self) -> int:
        return sum(int(np.prod(s)) + s[0] for _, s in self.layer_shapes())


class Autoencoder:
    def __init__(self, spec: AutoencoderSpec, weights: dict[str, Tensor], biases: dict[str, Tensor]):
        self.spec = spec
        self.weights = weights
        self.biases = biases

    def parameters(self) -> list[Tensor]:
        out = []
        for name, _ in self.spec.layer_shapes():
            out.extend([self.weights[name], self.biases[name]])
        return out

    def named_parameters(self) -> list[tuple[str, Tensor]]:
        out = []
        for name, _ in self.spec.layer_shapes():
            out.append((f"{name}.weight", self.weights[name]))
            out.append((f"{name}.bias", self.biases[name]))
        return out

    def state_dict(self) -> dict[str, np.ndarray]:
        return {k: v.data.copy() for k, v in self.named_parameters()}

    def forward(self, x: Tensor) -> Tensor:
        """(N, 1, H, W) hologram -> (N, 2, H, W) object estimate."""
        spec = self.spec
        if x.ndim != 4 or x.shape[1] != spec.in_channels:
            raise ShapeError("Autoencoder.forward", x.shape, detail=f"expected (N, {spec.in_channels}, H, W)")
        if not np.all(np.isfinite(x.data)):
            raise ValueError("Autoencoder.forward: non-finite input")
        factor = 2 ** spec.depth
        h0, w0 = x.shape[2:]
        extra = (-h0 % factor, -w0 % factor)
        if any(extra):
            if x.requires_grad:
                raise ShapeError("Autoencoder.forward", x.shape,
                                 detail=f"differentiable inputs must be divisible by {factor}")
            x = Tensor(np.pad(x.data, ((0, 0), (0, 0), (0, extra[0]), (0, extra[1])), mode="edge"))
        pad = spec.kernel_size // 2
        h = x
        for i in range(spec.depth):
            name = f"enc{i + 1}"
            h = T.conv2d(h, self.weights[name], self.biases[name], stride=2, padding=pad)
            h = T.leaky_relu(h, spec.leaky_slope)
        for i in range(spec.depth):
            name = f"dec{i + 1}"
            h = T.upsample2d(h, 2)
            h = T.conv2d(h, self.weights[name], self.biases[name], stride=1, padding=pad)
            h = T.leaky_relu(h, spec.leaky_slope)
        out = T.conv2d(h, self.weights["head"], self.biases["head"])
        return out[:, :, :h0, :w0] if any(extra) else out

    __call__ = forward


def build(spec: AutoencoderSpec | None = None, seed: int = 0,
          dtype=np.float32) -> Autoencoder:
    """Kaiming-uniform fan-in initialization, deterministic in ``seed``."""
    spec = spec or AutoencoderSpec()
    rng = np.random.default_rng(seed)
    weights, biases = {}, {}
    for name, shape in spec.layer_shapes():
        fan_in = shape[1] * shape[2] * shape[3]
        gain = np.sqrt(2.0 / (1.0 + spec.leaky_slope ** 2)) if name != "head" else spec.head_scale
        bound = gain * np.sqrt(3.0 / fan_in)
        w = rng.uniform(-bound, bound, size=shape).astype(dtype)
        b = np.zeros(shape[0], dtype=dtype)
        if name == "head":
            b[0] = spec.background
        weights[name] = Tensor(w, requires_grad=True)
        biases[name] = Tensor(b, requires_grad=True)
    return Autoencoder(spec, weights, biases)
