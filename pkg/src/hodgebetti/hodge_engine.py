"""Betti numbers from the Hodge decomposition of random cochains.

Each column ``w`` of a random matrix ``W`` is split as
``w = delta Omega + d eta + h``; the harmonic parts ``h`` span the harmonic
space, whose dimension is the Betti number.  The homology oracle computes
the same numbers from exact integer ranks of the boundary matrices.
"""
from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import lsqr

from .complex_core import SimplicialComplex, boundary_matrix
from .dec_geometry import HodgeSystem, build_hodge_system
from .rank_tools import StochasticRankConfig, exact_rank, spectral_upper_bound, stochastic_rank

__all__ = [
    "RandomFormMatrix",
    "HarmonicMatrix",
    "BettiReport",
    "SolverWarning",
    "random_forms",
    "coexact_term",
    "exact_term",
    "harmonic_matrix",
    "betti_via_cohomology",
    "betti_via_homology_oracle",
    "homology_betti_numbers",
    "integer_rank",
]

DENSE_LIMIT = 500
PINV_RCOND = 1e-10
GAMMA_MARGIN = 8


class SolverWarning(RuntimeWarning):
    """An iterative least-squares solve stopped short of its tolerance."""


@dataclass(frozen=True)
class RandomFormMatrix:
    """Columns are random ``r``-cochains drawn from ``seed``."""

    W: np.ndarray
    seed: int
    r: int


def random_forms(r: int, size: int, seed: int = 0) -> RandomFormMatrix:
    """``size x size`` matrix of i.i.d. standard normals."""
    if size < 1:
        raise ValueError("size must be >= 1")
    W = np.random.default_rng(seed).standard_normal((size, size))
    return RandomFormMatrix(W=W, seed=seed, r=r)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("HODGEBETTI_THREADS", "1")))
    except ValueError:
        return 1


def _min_norm_solve(M: sp.spmatrix, rhs: np.ndarray) -> np.ndarray:
    """Minimum-norm least-squares solution of ``M X = rhs`` column by column."""
    if M.shape[1] < DENSE_LIMIT:
        return np.linalg.pinv(M.toarray(), rcond=PINV_RCOND) @ rhs
    M = M.tocsr()

    def column(b):
        sol = lsqr(M, b, atol=1e-14, btol=1e-14, iter_lim=20 * M.shape[1])
        x, istop, res = sol[0], sol[1], sol[3]
        if istop not in (1, 2, 4, 5):
            warnings.warn(f"lsqr stopped with code {istop}, residual {res:.3e}", SolverWarning, stacklevel=3)
        return x

    cols = [rhs[:, j] for j in range(rhs.shape[1])]
    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            out = list(pool.map(column, cols))
    else:
        out = [column(b) for b in cols]
    return np.column_stack(out) if out else np.zeros((M.shape[1], 0))


def coexact_term(H: HodgeSystem, W: np.ndarray) -> np.ndarray:
    """``P A^+ C W``: the coexact components of the columns of ``W``."""
    if not H.has_coexact:
        raise ValueError(f"degree {H.r} has no coexact block")
    W = np.asarray(W, dtype=float)
    return H.P @ _min_norm_solve(H.A, H.C @ W)


def exact_term(H: HodgeSystem, W: np.ndarray) -> np.ndarray:
    """``Q K^+ (M D W)``: the exact components of the columns of ``W``."""
    if not H.has_exact:
        raise ValueError(f"degree {H.r} has no exact block")
    W = np.asarray(W, dtype=float)
    rhs = H.k_rhs[:, None] * (H.D @ W)
    return H.Q @ _min_norm_solve(H.K, rhs)


@dataclass
class HarmonicMatrix:
    """``H = W - delta Omega - d eta`` with per-column harmonicity residuals.

    ``residuals[j] = (||d h_j||, ||delta h_j||) / ||h_j||``; ``nan`` where
    ``h_j`` is numerically zero.
    """

    H: np.ndarray
    residuals: np.ndarray
    coexact: np.ndarray
    exact: np.ndarray

    def sub(self, gamma: int) -> np.ndarray:
        return self.H[:gamma, :gamma]

    def max_residual(self) -> float:
        finite = self.residuals[np.isfinite(self.residuals)]
        return float(finite.max()) if finite.size else 0.0


def harmonic_matrix(H: HodgeSystem, W: np.ndarray, zero_tol: float = 1e-8) -> HarmonicMatrix:
    """Harmonic parts of the columns of ``W``.

    Columns with ``||h|| <= zero_tol * ||w||`` get ``nan`` residuals.
    """
    W = np.asarray(W, dtype=float)
    co = coexact_term(H, W) if H.has_coexact else np.zeros_like(W)
    ex = exact_term(H, W) if H.has_exact else np.zeros_like(W)
    Hm = W - co - ex
    norms = np.linalg.norm(Hm, axis=0)
    dh = np.linalg.norm(H.C @ Hm, axis=0) if H.has_coexact else np.zeros(W.shape[1])
    deltah = np.linalg.norm(H.D @ Hm, axis=0) if H.has_exact else np.zeros(W.shape[1])
    res = np.full((W.shape[1], 2), np.nan)
    keep = norms > zero_tol * np.linalg.norm(W, axis=0)
    res[keep, 0] = dh[keep] / norms[keep]
    res[keep, 1] = deltah[keep] / norms[keep]
    return HarmonicMatrix(H=Hm, residuals=res, coexact=co, exact=ex)


@dataclass
class BettiReport:
    """Betti number of one degree together with how it was obtained.

    ``normalized`` is ``betti / gamma`` for the cohomology methods (the
    stochastic method reports its raw estimate) and ``betti / |S_r|`` for
    the oracle.
    """

    degree: int
    betti: int
    normalized: float
    method: str
    gamma: int
    seed: int | None = None
    residual: float | None = None
    tolerances: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)


def betti_via_cohomology(
    K: SimplicialComplex,
    r: int,
    gamma: int | None = None,
    method: str = "exact_rank",
    seed: int = 0,
    mode: str = "uniform",
    rank_threshold: float = 1e-8,
    stochastic: StochasticRankConfig | None = None,
    system: HodgeSystem | None = None,
) -> BettiReport:
    """Betti number of degree ``r`` from the rank of the ``gamma x gamma`` block of the harmonic matrix.

    Parameters
    ----------
    gamma : int, optional
        Sub-block size, ``1 <= gamma <= |S_r|``; defaults to ``|S_r|``.
    method : {"exact_rank", "stochastic"}
        Thresholded SVD of the block, or the Chebyshev-Hutchinson estimate
        on its Gram matrix.
    rank_threshold : float
        Singular values below ``rank_threshold * sigma_max(W_block)`` count as
        zero.  The reference is the random block itself since the harmonic
        block may vanish entirely.
    stochastic : StochasticRankConfig, optional
        Its ``seed`` is overridden by ``seed``.
    """
    size = K.size(r)
    if not 0 <= r <= K.dim:
        raise ValueError(f"degree {r} out of range 0..{K.dim}")
    gamma = size if gamma is None else int(gamma)
    if not 1 <= gamma <= size:
        raise ValueError(f"gamma must lie in 1..{size}, got {gamma}")
    if method not in ("exact_rank", "stochastic"):
        raise ValueError(f"unknown method {method!r}")
    H = system if system is not None else build_hodge_system(K, r, mode)
    W = random_forms(r, size, seed).W
    harm = harmonic_matrix(H, W)
    block = harm.sub(gamma)
    ref = float(np.linalg.norm(W[:gamma, :gamma], 2))
    tol = {"rank_threshold": rank_threshold, "pinv_rcond": PINV_RCOND}
    notes = []

    if method == "exact_rank":
        beta = exact_rank(block, rank_threshold, scale=ref)
        normalized = beta / gamma
        name = "cohomology_exact_rank"
    else:
        cfg = stochastic or StochasticRankConfig()
        cfg = StochasticRankConfig(cfg.gap, cfg.n_probes, cfg.cheb_degree, cfg.epsilon, seed)
        gram = block.T @ block
        matvec = lambda X: gram @ X  # noqa: E731
        bound = spectral_upper_bound(matvec, gamma, seed=seed)
        tol.update(gap=cfg.gap, epsilon=cfg.epsilon)
        if bound <= (rank_threshold * ref) ** 2:
            normalized = 0.0
        else:
            normalized = stochastic_rank(matvec, gamma, cfg, scale=bound)
        beta = int(round(normalized * gamma))
        name = "cohomology_stochastic"

    if gamma < size and gamma < beta + GAMMA_MARGIN:
        msg = f"gamma={gamma} is within {GAMMA_MARGIN} of the detected rank {beta}; the block may undersample"
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)
    return BettiReport(
        degree=r, betti=beta, normalized=float(normalized), method=name, gamma=gamma,
        seed=seed, residual=harm.max_residual(), tolerances=tol, warnings=notes,
    )


def integer_rank(B) -> int:
    """Rank over the rationals of an integer matrix (fraction-free elimination)."""
    B = sp.csr_matrix(B)
    if B.shape[0] > B.shape[1]:
        B = B.T.tocsr()
    rows = []
    by_col: dict[int, set] = {}
    for i in range(B.shape[0]):
        lo, hi = B.indptr[i], B.indptr[i + 1]
        row = {int(j): int(v) for j, v in zip(B.indices[lo:hi], B.data[lo:hi]) if v != 0}
        if row:
            rows.append(row)
            for j in row:
                by_col.setdefault(j, set()).add(len(rows) - 1)
    rank = 0
    for j in sorted(by_col):
        cands = by_col[j]
        if not cands:
            continue
        piv = min(cands, key=lambda i: (abs(rows[i][j]) != 1, len(rows[i]), i))
        prow = rows[piv]
        pv = prow[j]
        for q in sorted(cands - {piv}):
            qrow = rows[q]
            a = qrow[j]
            g = math.gcd(pv, a)
            mp, mq = a // g, pv // g
            new = {k: mq * v for k, v in qrow.items()}
            for k, v in prow.items():
                new[k] = new.get(k, 0) - mp * v
            new = {k: v for k, v in new.items() if v != 0}
            if new:
                d = math.gcd(*new.values())
                if d > 1:
                    new = {k: v // d for k, v in new.items()}
            for k in qrow.keys() - new.keys():
                by_col[k].discard(q)
            for k in new.keys() - qrow.keys():
                by_col.setdefault(k, set()).add(q)
            rows[q] = new
        for k in prow:
            by_col[k].discard(piv)
        rank += 1
    return rank


def _boundary_rank_cached(K: SimplicialComplex, r: int) -> int:
    if r < 1 or r > K.dim:
        return 0
    cache = K.__dict__.setdefault("_integer_ranks", {})
    if r not in cache:
        cache[r] = integer_rank(boundary_matrix(K, r))
    return cache[r]


def betti_via_homology_oracle(K: SimplicialComplex, r: int) -> BettiReport:
    """``beta_r = |S_r| - rank B_r - rank B_{r+1}`` with exact ranks."""
    if not 0 <= r <= K.dim:
        raise ValueError(f"degree {r} out of range 0..{K.dim}")
    beta = K.size(r) - _boundary_rank_cached(K, r) - _boundary_rank_cached(K, r + 1)
    return BettiReport(
        degree=r, betti=beta, normalized=beta / K.size(r), method="homology_oracle", gamma=K.size(r)
    )


def homology_betti_numbers(K: SimplicialComplex) -> tuple[int, ...]:
    return tuple(betti_via_homology_oracle(K, r).betti for r in range(K.dim + 1))
