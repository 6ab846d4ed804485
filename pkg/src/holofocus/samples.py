"""Procedural stand-ins for the bar-target, cell and dendrite-tag samples.

All generators return float64 images in [0, 1] where 1 marks the object.
"""

from __future__ import annotations

import numpy as np

__all__ = ["bar_target", "cells", "dendrite", "SAMPLES", "make_sample"]


# (x, y, bar width) of each three-bar group at 128 px; scaled for other sizes
_BAR_GROUPS = [(4, 4, 6), (76, 4, 4), (76, 30, 3), (4, 52, 2), (30, 50, 5)]


def bar_target(size: int = 128) -> np.ndarray:
    """Resolution-target stand-in: vertical+horizontal bar triplets, a square, a ring."""
    img = np.zeros((size, size))
    s = size / 128.0
    for gx, gy, gw in _BAR_GROUPS:
        x, y, w = int(round(gx * s)), int(round(gy * s)), max(1, int(round(gw * s)))
        length = 5 * w
        for b in range(3):
            img[y:y + length, x + 2 * b * w:x + 2 * b * w + w] = 1.0
            img[y + 2 * b * w:y + 2 * b * w + w, x + 6 * w:x + 6 * w + length] = 1.0
    yy, xx = np.mgrid[:size, :size]
    img[int(84 * s):int(106 * s), int(92 * s):int(114 * s)] = 1.0
    ring = np.hypot(yy - 100 * s, xx - 30 * s)
    img[(ring >= 8 * s) & (ring <= 12 * s)] = 1.0
    img[np.hypot(yy - 104 * s, xx - 64 * s) <= 7 * s] = 1.0
    return img


def cells(size: int = 128, seed: int = 1) -> np.ndarray:
    """Overlapping soft-edged ellipses with darker nuclei."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[:size, :size].astype(float)
    img = np.zeros((size, size))
    count = max(4, int(12 * (size / 128.0) ** 2))
    for _ in range(count):
        cy, cx = rng.uniform(0.12, 0.88, 2) * size
        ry, rx = rng.uniform(0.05, 0.11, 2) * size
        theta = rng.uniform(0, np.pi)
        dy, dx = yy - cy, xx - cx
        u = (dx * np.cos(theta) + dy * np.sin(theta)) / rx
        v = (-dx * np.sin(theta) + dy * np.cos(theta)) / ry
        r = np.sqrt(u * u + v * v)
        body = 0.6 / (1.0 + np.exp((r - 1.0) * 12.0))
        nucleus = 0.4 / (1.0 + np.exp((r - 0.35) * 20.0))
        img = np.maximum(img, body + nucleus)
    return img / img.max()


def dendrite(size: int = 128, seed: int = 2) -> np.ndarray:
    """Branching random-walk filaments grown from a few seeds."""
    rng = np.random.default_rng(seed)
    img = np.zeros((size, size))
    tips = [(size * rng.uniform(0.3, 0.7), size * rng.uniform(0.3, 0.7), rng.uniform(0, 2 * np.pi))
            for _ in range(3)]
    steps = int(1.2 * size)
    while tips:
        y, x, a = tips.pop()
        for k in range(steps):
            a += rng.normal(0.0, 0.25)
            y += np.sin(a)
            x += np.cos(a)
            iy, ix = int(round(y)), int(round(x))
            if not (1 <= iy < size - 1 and 1 <= ix < size - 1):
                break
            img[iy - 1:iy + 1, ix - 1:ix + 1] = 1.0
            if rng.random() < 0.03 and len(tips) < 40:
                tips.append((y, x, a + rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 1.0)))
        steps = max(8, int(steps * 0.6))
    return img


SAMPLES = {"target": bar_target, "cell": cells, "dendrite": dendrite}


def make_sample(name: str, size: int = 128) -> np.ndarray:
    try:
        return SAMPLES[name](size)
    except KeyError:
        raise ValueError(f"unknown sample {name!r}; choose from {sorted(SAMPLES)}") from None
