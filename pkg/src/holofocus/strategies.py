"""Reconstruction loop and the autofocusing strategies compared against each other.

Every strategy trains the same untrained autoencoder from the same seed on
the same normalized hologram.  Only the objective differs:

* ``known``: MSE at the true distance (upper bound).
* ``random``: MSE at one candidate fixed before training.
* ``non-weighted``: plain mean of all candidate MSEs.
* ``alternating``: per epoch, backward through the smallest candidate MSE.
* ``reverse-attention``: softmax(1/L)-weighted sum with detached weights.
"""

from __future__ import annotations

import enum
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import tensor as T
from .losses import CandidateLossReport, CandidateSet, predicted_index, reverse_attention_weights
from .metrics import ImagePair, normalize_amplitude, psnr, ssim
from .network import AutoencoderSpec, build
from .optics import ComplexField, Hologram, OpticalConfig, intensity, make_kernel, normalize_hologram, \
    propagate_stack

log = logging.getLogger(__name__)

__all__ = [
    "StrategyKind",
    "ReconstructionConfig",
    "ReconstructionResult",
    "ReconstructionAborted",
    "reconstruct",
    "random_distance_expectation",
    "score",
]


class StrategyKind(str, enum.Enum):
    KNOWN = "known"
    RANDOM = "random"
    NON_WEIGHTED = "non-weighted"
    ALTERNATING = "alternating"
    REVERSE_ATTENTION = "reverse-attention"


@dataclass
class ReconstructionConfig:
    epochs: int = 1500
    learning_rate: float = 1e-3
    seed: int = 0
    architecture: AutoencoderSpec = field(default_factory=AutoencoderSpec)
    dtype: str = "float32"
    log_every: int = 0


@dataclass
class ReconstructionResult:
    strategy: StrategyKind
    object_estimate: ComplexField
    distances: tuple[float, ...]  # candidate distances the objective touched
    losses: np.ndarray  # (epochs, len(distances))
    weights: np.ndarray  # (epochs, len(distances))
    totals: np.ndarray  # (epochs,)
    predicted_distance: float | None
    wall_time: float
    epochs: int
    seed: int
    status: str = "ok"

    def trace_rows(self):
        for epoch in range(self.losses.shape[0]):
            report = CandidateLossReport(epoch, self.losses[epoch], self.weights[epoch],
                                         float(self.totals[epoch]))
            yield from report.rows(self.distances)


class ReconstructionAborted(RuntimeError):
    """Non-finite loss; ``partial`` carries the trace up to the failing epoch."""

    def __init__(self, message: str, partial: ReconstructionResult):
        super().__init__(message)
        self.partial = partial


def _hologram_array(hologram) -> np.ndarray:
    return hologram.intensity if isinstance(hologram, Hologram) else np.asarray(hologram, dtype=np.float64)


def _objective_distances(candidates: CandidateSet, strategy: StrategyKind,
                         distance_index: int | None) -> tuple[float, ...]:
    if strategy is StrategyKind.KNOWN:
        if candidates.true_index is None:
            raise ValueError("known-distance reconstruction needs candidates.true_index")
        return (candidates.true_distance,)
    if strategy is StrategyKind.RANDOM:
        if distance_index is None:
            raise ValueError("random-distance reconstruction needs distance_index")
        return (candidates.distances[distance_index],)
    return candidates.distances


def reconstruct(hologram, candidates: CandidateSet, strategy: StrategyKind | str,
                config: OpticalConfig, settings: ReconstructionConfig | None = None,
                distance_index: int | None = None,
                normalize: bool = True) -> ReconstructionResult:
    """Train a fresh autoencoder on one hologram under one strategy.

    ``distance_index`` picks the fixed candidate for ``random``; pass
    ``None`` with a seeded ``settings`` to draw it from the seed.
    """
    strategy = StrategyKind(strategy)
    settings = settings or ReconstructionConfig()
    if settings.epochs < 1:
        raise ValueError("epochs must be >= 1")
    dtype = np.dtype(settings.dtype)
    if strategy is StrategyKind.RANDOM and distance_index is None:
        distance_index = int(np.random.default_rng(settings.seed).integers(len(candidates)))
    distances = _objective_distances(candidates, strategy, distance_index)
    kernels = [make_kernel(config, z) for z in distances]
    n = len(distances)

    holo = _hologram_array(hologram)
    holo = normalize_hologram(holo) if normalize else holo
    net = build(settings.architecture, seed=settings.seed, dtype=dtype)
    opt = T.Adam(net.parameters(), lr=settings.learning_rate)
    x = T.Tensor(holo[None, None].astype(dtype))
    target = T.Tensor(holo[None].astype(dtype))

    epochs = settings.epochs
    losses = np.zeros((epochs, n))
    weights = np.zeros((epochs, n))
    totals = np.zeros(epochs)
    uniform = np.full(n, 1.0 / n)

    def result(upto: int, wall: float, out: np.ndarray, status: str) -> ReconstructionResult:
        pred = None
        if upto > 0:
            if strategy is StrategyKind.REVERSE_ATTENTION:
                pred = distances[predicted_index(weights[upto - 1])]
            elif strategy is StrategyKind.ALTERNATING:
                pred = distances[predicted_index(weights[upto - 1])]
            elif strategy in (StrategyKind.KNOWN, StrategyKind.RANDOM):
                pred = distances[0]
        est = ComplexField(out[0, 0].astype(np.float64), out[0, 1].astype(np.float64), config)
        return ReconstructionResult(strategy, est, distances, losses[:upto], weights[:upto],
                                    totals[:upto], pred, wall, upto, settings.seed, status)

    start = time.perf_counter()
    for epoch in range(epochs):
        out = net(x)
        # (n,) vector of per-candidate MSEs, all candidates in one graph
        cand = T.mean(T.square(T.sub(intensity(propagate_stack(out, kernels)), target)), axis=(1, 2))
        values = cand.data.astype(np.float64)
        if not np.all(np.isfinite(values)):
            wall = time.perf_counter() - start
            losses[epoch] = values
            raise ReconstructionAborted(
                f"non-finite loss at epoch {epoch} ({strategy.value})",
                result(epoch + 1, wall, out.data, "aborted"))

        if strategy is StrategyKind.REVERSE_ATTENTION:
            w = reverse_attention_weights(values)
        elif strategy is StrategyKind.ALTERNATING:
            w = np.zeros(n)
            w[predicted_index(-values)] = 1.0
        else:
            w = uniform
        # weights enter as constants: the gradient is sum_i w_i * grad L_i
        loss = T.sum(T.mul(cand, T.detach(T.Tensor(w.astype(dtype)))))

        losses[epoch] = values
        weights[epoch] = w
        totals[epoch] = float(loss.data)
        opt.zero_grad()
        loss.backward()
        opt.step()
        if settings.log_every and epoch % settings.log_every == 0:
            log.info("%s epoch %d loss %.6g", strategy.value, epoch, totals[epoch])
    wall = time.perf_counter() - start

    final = net(x).data
    return result(epochs, wall, final, "ok")


def score(result: ReconstructionResult | ComplexField, reference: np.ndarray) -> tuple[float, float]:
    """(PSNR, SSIM) of the min-max normalized amplitude against ``reference``.

    ``reference`` is the ground-truth amplitude (or any image of the same
    shape); it is min-max normalized the same way.
    """
    fld = result.object_estimate if isinstance(result, ReconstructionResult) else result
    pair = ImagePair(normalize_amplitude(reference), normalize_amplitude(fld.amplitude))
    return psnr(pair), ssim(pair)


def random_distance_expectation(hologram, candidates: CandidateSet, mode: str,
                                config: OpticalConfig, reference: np.ndarray,
                                settings: ReconstructionConfig | None = None,
                                cache: dict[int, ReconstructionResult] | None = None) -> dict:
    """Mean PSNR/SSIM over single-distance runs at every eligible candidate.

    ``mode='include'`` averages all n candidates, ``'exclude'`` drops the
    true one.  ``cache`` (index -> result) is read and filled so include and
    exclude can share runs.
    """
    if mode not in ("include", "exclude"):
        raise ValueError("mode must be 'include' or 'exclude'")
    if candidates.true_index is None:
        raise ValueError("random-distance expectation needs candidates.true_index")
    indices = [i for i in range(len(candidates))
               if mode == "include" or i != candidates.true_index]
    if not indices:
        raise ValueError("exclude mode with a single candidate leaves nothing to average")
    cache = {} if cache is None else cache
    per = []
    for i in indices:
        if i not in cache:
            cache[i] = reconstruct(hologram, candidates, StrategyKind.RANDOM, config, settings,
                                   distance_index=i)
        p, s = score(cache[i], reference)
        per.append({"index": i, "distance": candidates.distances[i], "psnr": p, "ssim": s,
                    "wall_time": cache[i].wall_time})
    return {
        "mode": mode,
        "psnr": float(np.mean([r["psnr"] for r in per])),
        "ssim": float(np.mean([r["ssim"] for r in per])),
        "runs": per,
    }
