"""Hologram-matching losses and the reverse-attention weighting.

The reverse-attention objective over candidate distances z_1..z_n is

    total = sum_i W_i * L_i,    W_i = exp(1/L_i) / sum_j exp(1/L_j)

with the weights treated as constants during backward, so the gradient is
exactly ``sum_i W_i * grad(L_i)``.  A lower candidate loss earns a larger
weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import tensor as T
from .tensor import ShapeError, Tensor

__all__ = [
    "LOSS_FLOOR",
    "CandidateSet",
    "CandidateLossReport",
    "hologram_loss",
    "reverse_attention_weights",
    "reverse_attention_loss",
    "predicted_index",
]

LOSS_FLOOR = 1e-12


@dataclass(frozen=True)
class CandidateSet:
    distances: tuple[float, ...]
    true_index: int | None = None

    def __post_init__(self):
        d = tuple(float(z) for z in self.distances)
        object.__setattr__(self, "distances", d)
        if not d:
            raise ValueError("candidate set must contain at least one distance")
        if any(b <= a for a, b in zip(d, d[1:])):
            raise ValueError("candidate distances must be strictly increasing")
        if self.true_index is not None and not 0 <= self.true_index < len(d):
            raise ValueError(f"true_index {self.true_index} out of range for {len(d)} candidates")

    @classmethod
    def from_range(cls, zmin: float, zmax: float, step: float,
                   true_distance: float | None = None) -> "CandidateSet":
        """Inclusive grid ``zmin, zmin+step, ..., zmax``; snaps ``true_distance``."""
        if step <= 0:
            raise ValueError("step must be positive")
        n = int(math.floor((zmax - zmin) / step + 1e-9)) + 1
        distances = tuple(zmin + i * step for i in range(n))
        true_index = None
        if true_distance is not None:
            gaps = [abs(z - true_distance) for z in distances]
            i = int(np.argmin(gaps))
            if gaps[i] <= 1e-6 * step:
                true_index = i
        return cls(distances, true_index)

    def __len__(self) -> int:
        return len(self.distances)

    @property
    def true_distance(self) -> float | None:
        return None if self.true_index is None else self.distances[self.true_index]


@dataclass
class CandidateLossReport:
    epoch: int
    losses: np.ndarray
    weights: np.ndarray
    total: float

    def rows(self, distances: Sequence[float]):
        for z, loss, w in zip(distances, self.losses, self.weights):
            yield {"epoch": self.epoch, "z": z, "loss": float(loss),
                   "weight": float(w), "total": self.total}


def hologram_loss(pred: Tensor, target: Tensor) -> Tensor:
    """Mean squared error between a reproduced and a captured hologram."""
    if pred.shape != target.shape:
        raise ShapeError("hologram_loss", pred.shape, target.shape)
    return T.mean(T.square(T.sub(pred, target)))


def reverse_attention_weights(losses: Sequence[float]) -> np.ndarray:
    """Softmax of 1/L with max-subtraction; plain constants, never differentiated.

    Candidates at or below ``LOSS_FLOOR`` share all the weight equally (the
    limit of the softmax as their 1/L diverges).
    """
    losses = np.asarray(losses, dtype=np.float64).reshape(-1)
    if losses.size == 0:
        raise ValueError("need at least one loss")
    if np.any(np.isnan(losses)):
        raise ValueError(f"NaN candidate loss: {losses.tolist()}")
    floored = losses <= LOSS_FLOOR
    if floored.any():
        return floored / floored.sum()
    inv = 1.0 / losses
    e = np.exp(inv - inv.max())
    return e / e.sum()


def reverse_attention_loss(candidate_losses: Sequence[Tensor],
                           epoch: int = 0) -> tuple[Tensor, CandidateLossReport]:
    values = np.array([float(loss.data) for loss in candidate_losses])
    weights = reverse_attention_weights(values)
    total = None
    for w, loss in zip(weights, candidate_losses):
        term = T.mul(loss, T.detach(Tensor(np.asarray(w, dtype=loss.dtype))))
        total = term if total is None else T.add(total, term)
    report = CandidateLossReport(epoch, values, weights, float(np.dot(weights, values)))
    return total, report


def predicted_index(weights: Sequence[float]) -> int:
    """Argmax of the weights; ties go to the lowest index."""
    return int(np.argmax(np.asarray(weights)))
