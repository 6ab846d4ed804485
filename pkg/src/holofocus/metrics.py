"""PSNR and SSIM for images on a [0, 1] scale."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

__all__ = ["ImagePair", "psnr", "ssim", "normalize_amplitude", "gaussian_window"]

K1 = 0.01
K2 = 0.03
WINDOW = 11
SIGMA = 1.5


@dataclass
class ImagePair:
    reference: np.ndarray
    test: np.ndarray

    def __post_init__(self):
        ref = np.asarray(self.reference, dtype=np.float64)
        test = np.asarray(self.test, dtype=np.float64)
        if ref.ndim != 2 or ref.shape != test.shape:
            raise ValueError(f"image shapes differ or are not 2-D: {ref.shape} vs {test.shape}")
        self.reference = np.clip(ref, 0.0, 1.0)
        self.test = np.clip(test, 0.0, 1.0)


def _pair(reference, test) -> ImagePair:
    return reference if isinstance(reference, ImagePair) else ImagePair(reference, test)


def normalize_amplitude(values: np.ndarray) -> np.ndarray:
    """Min-max scale to [0, 1]; a constant image maps to zeros."""
    a = np.abs(np.asarray(values))
    span = a.max() - a.min()
    return (a - a.min()) / span if span > 0 else np.zeros_like(a, dtype=np.float64)


def psnr(reference, test=None) -> float:
    """Peak signal-to-noise ratio in dB with peak 1; ``inf`` for identical images."""
    pair = _pair(reference, test)
    mse = float(np.mean((pair.reference - pair.test) ** 2))
    if mse == 0.0:
        return float("inf")
    return 10.0 * np.log10(1.0 / mse)


def gaussian_window(size: int = WINDOW, sigma: float = SIGMA) -> np.ndarray:
    """Normalized 1-D Gaussian taps; the 2-D window is its outer product."""
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


def _filter_valid(img: np.ndarray, taps: np.ndarray) -> np.ndarray:
    k = taps.size
    rows = sliding_window_view(img, k, axis=0) @ taps
    return sliding_window_view(rows, k, axis=1) @ taps


def ssim(reference, test=None) -> float:
    """Mean structural similarity over all fully-covered 11x11 Gaussian windows."""
    pair = _pair(reference, test)
    x, y = pair.reference, pair.test
    if min(x.shape) < WINDOW:
        raise ValueError(f"image {x.shape} smaller than the {WINDOW}x{WINDOW} window")
    taps = gaussian_window()
    c1 = (K1 * 1.0) ** 2
    c2 = (K2 * 1.0) ** 2
    mx = _filter_valid(x, taps)
    my = _filter_valid(y, taps)
    sxx = _filter_valid(x * x, taps) - mx * mx
    syy = _filter_valid(y * y, taps) - my * my
    sxy = _filter_valid(x * y, taps) - mx * my
    num = (2.0 * mx * my + c1) * (2.0 * sxy + c2)
    den = (mx * mx + my * my + c1) * (sxx + syy + c2)
    return float(np.mean(num / den))
