"""Synthetic noisy-quadratic convergence lab.

An ensemble of candidate losses ``f_i(x) = ||a_i x - b_i||^2 + c_i`` stands
in for the per-distance reconstruction losses; the ground member has
``c = 0`` so only it reaches zero.  Plain gradient descent with step
``t = 1/C``, ``C = max_i 2 a_i^2``, is run on the ground loss or on one of
the combined objectives.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .losses import reverse_attention_weights

__all__ = [
    "LOSS_KINDS",
    "QuadraticEnsemble",
    "DescentTrace",
    "DivergenceError",
    "generate",
    "descend",
    "compare_rates",
    "rate_bound",
    "error_surface",
]

LOSS_KINDS = ("ground", "reverse_attention", "non_weighted", "alternating")
DIVERGENCE_LIMIT = 1e6


class DivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadraticEnsemble:
    a: np.ndarray
    b: np.ndarray  # (n, dim)
    c: np.ndarray
    ground_index: int
    seed: int

    @property
    def n(self) -> int:
        return self.a.size

    @property
    def dim(self) -> int:
        return self.b.shape[1]

    @property
    def lipschitz(self) -> float:
        """Largest gradient Lipschitz constant over the members."""
        return float(np.max(2.0 * self.a ** 2))

    @property
    def optimum(self) -> np.ndarray:
        g = self.ground_index
        return self.b[g] / self.a[g]

    def losses(self, x: np.ndarray) -> np.ndarray:
        r = self.a[:, None] * np.asarray(x, dtype=np.float64)[None, :] - self.b
        return np.sum(r * r, axis=1) + self.c

    def gradients(self, x: np.ndarray) -> np.ndarray:
        """(n, dim) per-member gradients at ``x``."""
        r = self.a[:, None] * np.asarray(x, dtype=np.float64)[None, :] - self.b
        return 2.0 * self.a[:, None] * r


def generate(n: int, seed: int, dim: int = 1) -> QuadraticEnsemble:
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    a = rng.uniform(1.0, 3.0, n)
    b = rng.uniform(-5.0, 5.0, (n, dim))
    c = rng.uniform(0.0, 400.0, n)
    ground = int(rng.integers(n))
    c[ground] = 0.0
    return QuadraticEnsemble(a, b, c, ground, seed)


@dataclass
class DescentTrace:
    loss_kind: str
    step_size: float
    lipschitz: float
    x0: np.ndarray
    iterates: np.ndarray  # (K+1, dim)
    member_losses: np.ndarray  # (K+1, n)
    weights: np.ndarray  # (K+1, n), weights used in the objective at each iterate
    totals: np.ndarray  # (K+1,)
    meta: dict = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return self.iterates.shape[0] - 1

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]

    def gaps(self, optimal_value: float = 0.0) -> np.ndarray:
        return self.totals - optimal_value

    def rows(self):
        """One dict per iterate, for CSV export."""
        for k in range(self.iterates.shape[0]):
            row = {"iteration": k, "x": float(self.iterates[k, 0]), "total": float(self.totals[k])}
            for i, (loss, w) in enumerate(zip(self.member_losses[k], self.weights[k])):
                row[f"loss_{i}"] = float(loss)
                row[f"weight_{i}"] = float(w)
            yield row


def _objective_weights(ens: QuadraticEnsemble, kind: str, losses: np.ndarray) -> np.ndarray:
    n = ens.n
    if kind == "ground":
        w = np.zeros(n)
        w[ens.ground_index] = 1.0
    elif kind == "reverse_attention":
        w = reverse_attention_weights(losses)
    elif kind == "non_weighted":
        w = np.full(n, 1.0 / n)
    elif kind == "alternating":
        w = np.zeros(n)
        w[int(np.argmin(losses))] = 1.0
    else:
        raise ValueError(f"unknown loss kind {kind!r}; choose from {LOSS_KINDS}")
    return w


def descend(ens: QuadraticEnsemble, loss_kind: str = "reverse_attention", x0=10.0,
            iterations: int = 500, step_size: float | None = None) -> DescentTrace:
    """Fixed-step gradient descent; weights are recomputed, then frozen, per step."""
    if loss_kind not in LOSS_KINDS:
        raise ValueError(f"unknown loss kind {loss_kind!r}; choose from {LOSS_KINDS}")
    C = ens.lipschitz
    t = 1.0 / C if step_size is None else float(step_size)
    x = np.broadcast_to(np.asarray(x0, dtype=np.float64), (ens.dim,)).copy()
    xs = np.empty((iterations + 1, ens.dim))
    member = np.empty((iterations + 1, ens.n))
    weights = np.empty((iterations + 1, ens.n))
    totals = np.empty(iterations + 1)
    for k in range(iterations + 1):
        losses = ens.losses(x)
        w = _objective_weights(ens, loss_kind, losses)
        xs[k], member[k], weights[k] = x, losses, w
        totals[k] = float(w @ losses)
        if k == iterations:
            break
        x = x - t * (w @ ens.gradients(x))
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > DIVERGENCE_LIMIT:
            raise DivergenceError(f"{loss_kind} descent diverged at iteration {k + 1}")
    return DescentTrace(loss_kind, t, C, np.atleast_1d(np.asarray(x0, dtype=np.float64)),
                        xs, member, weights, totals,
                        meta={"n": ens.n, "seed": ens.seed, "ground_index": ens.ground_index})


def iterations_to_threshold(trace: DescentTrace, threshold: float) -> float:
    below = np.flatnonzero(trace.gaps() < threshold)
    return float(below[0]) if below.size else float("inf")


def compare_rates(trace_a: DescentTrace, trace_b: DescentTrace,
                  threshold: float = 1e-4) -> tuple[float, float]:
    """First iteration at which each trace's objective gap drops below ``threshold``.

    Gaps are measured against 0, the optimal value shared by the ground and
    reverse-attention objectives.  ``inf`` marks a trace that never gets there.
    """
    return iterations_to_threshold(trace_a, threshold), iterations_to_threshold(trace_b, threshold)


def rate_bound(trace: DescentTrace, x_star: np.ndarray) -> np.ndarray:
    """``C * ||x0 - x*||^2 / (2k)`` for k = 1..K (index 0 holds ``inf``)."""
    r2 = float(np.sum((trace.x0 - np.asarray(x_star)) ** 2))
    k = np.arange(trace.iterates.shape[0], dtype=np.float64)
    with np.errstate(divide="ignore"):
        return trace.lipschitz * r2 / (2.0 * k)


def error_surface(ens: QuadraticEnsemble, xs: np.ndarray) -> dict[str, np.ndarray]:
    """Member, ground and reverse-attention values sampled on a scalar x grid."""
    xs = np.asarray(xs, dtype=np.float64)
    members = np.stack([ens.losses(np.full(ens.dim, x)) for x in xs])
    ra = np.array([reverse_attention_weights(m) @ m for m in members])
    return {"x": xs, "members": members, "ground": members[:, ens.ground_index],
            "reverse_attention": ra}
