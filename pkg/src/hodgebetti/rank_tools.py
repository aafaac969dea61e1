"""Exact and stochastic rank estimation.

The stochastic estimator counts eigenvalues of a PSD operator above a gap
``Delta_g`` as ``tr p(M)`` where ``p`` is a Jackson-damped Chebyshev
approximation of a step function, and the trace is estimated with
Rademacher probes (Hutchinson).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as C

__all__ = [
    "StochasticRankConfig",
    "exact_rank",
    "spectral_upper_bound",
    "step_coefficients",
    "step_degree",
    "step_error",
    "hutchinson_trace",
    "stochastic_rank",
    "default_probes",
]

Matvec = Callable[[np.ndarray], np.ndarray]


def exact_rank(M, rel_threshold: float = 1e-8, scale: float | None = None) -> int:
    """Number of singular values above ``rel_threshold * scale``.

    ``scale`` defaults to the largest singular value of ``M``.

    >>> exact_rank(np.diag([1, 1, 1, 1e-14, 0]))
    3
    """
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    s = np.linalg.svd(M, compute_uv=False)
    ref = s[0] if scale is None else scale
    if ref == 0:
        return 0
    return int(np.count_nonzero(s > rel_threshold * ref))


def spectral_upper_bound(matvec: Matvec, n: int, iters: int = 50, seed: int = 0) -> float:
    """Power-iteration estimate of ``lambda_max`` for a PSD operator, times 1.01."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max(iters, 1)):
        w = matvec(v)
        lam = float(v @ w)
        norm = np.linalg.norm(w)
        if norm == 0:
            return 0.0
        v = w / norm
    return 1.01 * max(lam, float(np.linalg.norm(matvec(v))))


def _jackson(degree: int) -> np.ndarray:
    k = np.arange(degree + 1)
    a = math.pi / (degree + 2)
    return ((degree - k + 2) * np.cos(k * a) + np.sin(k * a) / math.tan(a)) / (degree + 2)


def step_coefficients(gap: float, degree: int, damping: bool = True) -> np.ndarray:
    """Chebyshev coefficients (in ``x = 2t - 1``) of ``1[t >= 3 gap / 4]``.

    The step sits mid-way across the don't-care band ``(gap/2, gap)``.
    """
    tau = 0.75 * gap
    theta = math.acos(2 * tau - 1)
    k = np.arange(1, degree + 1)
    c = np.concatenate([[theta / math.pi], 2 * np.sin(k * theta) / (k * math.pi)])
    if damping:
        c = c * _jackson(degree)
    return c


def step_error(gap: float, degree: int, points: int = 10_000) -> float:
    """Sup-error of the damped step outside ``(gap/2, gap)`` on a grid of [0, 1]."""
    t = np.concatenate([np.linspace(0, gap / 2, points // 2), np.linspace(gap, 1, points - points // 2)])
    target = (t >= gap).astype(float)
    return float(np.max(np.abs(C.chebval(2 * t - 1, step_coefficients(gap, degree)) - target)))


@lru_cache(maxsize=64)
def step_degree(gap: float, tol: float = 0.01) -> int:
    """Smallest degree with :func:`step_error` below ``tol``."""
    if not 0 < gap < 1:
        raise ValueError("gap must lie in (0, 1)")
    hi = 8
    while step_error(gap, hi) > tol:
        hi *= 2
        if hi > 1 << 20:
            raise ValueError(f"gap {gap} needs an impractically high degree")
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if step_error(gap, mid) <= tol:
            hi = mid
        else:
            lo = mid
    return hi


def _apply_chebyshev(matvec: Matvec, coeffs: np.ndarray, Z: np.ndarray, scale: float) -> np.ndarray:
    """``p(M / scale) Z`` with ``p = sum c_k T_k(2t - 1)`` (three-term recurrence)."""
    op = lambda X: 2.0 * matvec(X) / scale - X  # noqa: E731
    T_prev, T_cur = Z, op(Z)
    out = coeffs[0] * T_prev
    if len(coeffs) > 1:
        out = out + coeffs[1] * T_cur
    for c in coeffs[2:]:
        T_prev, T_cur = T_cur, 2.0 * op(T_cur) - T_prev
        out = out + c * T_cur
    return out


def hutchinson_trace(
    matvec: Matvec, n: int, coeffs: np.ndarray, n_probes: int, seed: int = 0,
    scale: float = 1.0, block: int = 64,
) -> tuple[float, float]:
    """Rademacher estimate of ``tr p(M / scale)`` and its standard error.

    ``matvec`` must accept an ``(n, m)`` block of vectors.
    """
    rng = np.random.default_rng(seed)
    samples = []
    for start in range(0, n_probes, block):
        m = min(block, n_probes - start)
        Z = rng.integers(0, 2, size=(n, m)) * 2.0 - 1.0
        Y = _apply_chebyshev(matvec, coeffs, Z, scale)
        samples.append(np.einsum("ij,ij->j", Z, Y))
    samples = np.concatenate(samples)
    stderr = samples.std(ddof=1) / math.sqrt(n_probes) if n_probes > 1 else float("inf")
    return float(samples.mean()), float(stderr)


def default_probes(n: int, epsilon: float) -> int:
    """Probe count so the estimator's spread sits well inside ``epsilon``.

    For a projector the per-probe variance of ``z^T P z / n`` is below
    ``2 / n``, so ``8 / (n eps^2)`` probes keep one standard deviation under
    ``eps / 2``.
    """
    return max(10, math.ceil(8.0 / (n * epsilon**2)))


@dataclass(frozen=True)
class StochasticRankConfig:
    """Parameters of :func:`stochastic_rank`.

    ``n_probes`` and ``cheb_degree`` default to :func:`default_probes` and
    :func:`step_degree`; ``epsilon`` only feeds the probe default.
    """

    gap: float = 1e-3
    n_probes: int | None = None
    cheb_degree: int | None = None
    epsilon: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.gap < 1:
            raise ValueError("gap must lie in (0, 1)")
        if self.n_probes is not None and self.n_probes < 1:
            raise ValueError("n_probes must be >= 1")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")


def stochastic_rank(matvec: Matvec, n: int, cfg: StochasticRankConfig, scale: float = 1.0) -> float:
    """Estimate ``rank(M) / n`` for PSD ``M`` with spectrum of ``M / scale`` in [0, 1].

    Eigenvalues of ``M / scale`` are assumed to avoid ``(gap/2, gap)``.
    """
    degree = cfg.cheb_degree if cfg.cheb_degree is not None else step_degree(cfg.gap)
    needed = step_degree(cfg.gap)
    if degree < needed:
        warnings.warn(
            f"Chebyshev degree {degree} is below {needed} for gap {cfg.gap}; "
            f"per-eigenvalue bias up to {step_error(cfg.gap, degree):.3f}",
            stacklevel=2,
        )
    probes = cfg.n_probes if cfg.n_probes is not None else default_probes(n, cfg.epsilon)
    trace, _ = hutchinson_trace(matvec, n, step_coefficients(cfg.gap, degree), probes, cfg.seed, scale)
    return trace / n
