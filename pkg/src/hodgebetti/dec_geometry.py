"""Discrete exterior calculus on simplicial manifolds.

Dual cells are circumcentric.  The diagonal Hodge star in degree ``r`` is the
ratio ``|dual(sigma)| / |sigma|``; the codifferential is assembled as
``delta_r = s(n, r) * M_{r-1}^{-1} B_r M_r`` so that ``delta delta = 0`` holds
by construction.

Two measure modes are available:

``uniform``
    Every top simplex is treated as regular with edge length ``a``.  In two
    dimensions the triangle measure follows the convention
    ``|f| = sqrt(3) a^2 / 2`` so that ``1 / (w |f|) = 2`` and the classical
    ``{-6, 2}`` stencil of the 2-form system appears verbatim.
``geometric``
    Measures come from vertex coordinates, with signed circumcentric duals
    (obtuse configurations give negative contributions and a warning).
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .complex_core import SimplicialComplex, boundary_matrix, validate_closed_manifold

__all__ = [
    "DualCellMeasures",
    "HodgeSystem",
    "GeometryError",
    "codifferential_sign",
    "dual_cell_measures",
    "cotangent_weights",
    "coboundary_matrix",
    "codifferential_matrix",
    "build_hodge_system",
]


class GeometryError(ValueError):
    """Degenerate or unsupported geometry."""


def codifferential_sign(n: int, r: int) -> int:
    """Sign ``s(n, r)`` in ``delta_r = s M^{-1} B_r M`` on an ``n``-manifold.

    The classical prefactor ``(-1)^(nr+n+1) (-1)^((n-r+1)(r-1))`` times an
    overall ``-1`` from orienting dual boundaries against the primal
    incidence signs.  In 2-d this gives ``s(2,1) = +1`` and ``s(2,2) = -1``.
    """
    return -((-1) ** (n * r + n + 1)) * (-1) ** ((n - r + 1) * (r - 1))


@dataclass(frozen=True)
class DualCellMeasures:
    """Primal and dual measures per degree.

    ``primal[r][i]`` is ``|sigma|`` and ``dual[r][i]`` is ``|dual(sigma)|``
    for the ``i``-th ``r``-simplex.
    """

    mode: str
    primal: tuple
    dual: tuple

    def star(self, r: int) -> np.ndarray:
        """Diagonal of the Hodge star, ``|dual| / |primal|``."""
        return self.dual[r] / self.primal[r]

    def scaled(self, factor: float) -> "DualCellMeasures":
        """All dual measures multiplied by a positive constant."""
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return replace(self, dual=tuple(d * factor for d in self.dual))


@lru_cache(maxsize=None)
def _regular_constants(n: int):
    """Primal volume and per-top-simplex dual piece for a unit regular n-simplex.

    The piece of ``dual(sigma_r)`` inside one top simplex is the union of
    ``(n-r)!`` congruent flag simplexes joining the centroids of
    ``sigma_r < sigma_{r+1} < ... < top``.
    """
    verts = np.eye(n + 1) / math.sqrt(2)  # unit edges
    primal, piece = [], []
    for r in range(n + 1):
        primal.append(_simplex_volume(verts[None, : r + 1])[0])
        chain = np.array([verts[: k + 1].mean(axis=0) for k in range(r, n + 1)])
        piece.append(math.factorial(n - r) * _simplex_volume(chain[None])[0])
    return np.array(primal), np.array(piece)


def _simplex_volume(points: np.ndarray) -> np.ndarray:
    """Unsigned volumes of a batch of simplexes, ``points`` shape (m, k+1, d)."""
    k = points.shape[1] - 1
    if k == 0:
        return np.ones(points.shape[0])
    edges = points[:, 1:] - points[:, :1]
    gram = edges @ edges.transpose(0, 2, 1)
    det = np.clip(np.linalg.det(gram), 0.0, None)
    return np.sqrt(det) / math.factorial(k)


def _circumcentre_barycentric(points: np.ndarray) -> np.ndarray:
    """Barycentric coordinates of circumcentres, ``points`` shape (m, k+1, d)."""
    m, k1, _ = points.shape
    if k1 == 1:
        return np.ones((m, 1))
    gram = points @ points.transpose(0, 2, 1)
    lhs = np.zeros((m, k1 + 1, k1 + 1))
    lhs[:, :k1, :k1] = 2 * gram
    lhs[:, :k1, k1] = 1
    lhs[:, k1, :k1] = 1
    rhs = np.zeros((m, k1 + 1))
    rhs[:, :k1] = np.einsum("mii->mi", gram)
    rhs[:, k1] = 1
    return np.linalg.solve(lhs, rhs[..., None])[:, :k1, 0]


def _coface_counts(K: SimplicialComplex) -> list:
    n = K.dim
    tops = K.skeletons[n]
    counts = []
    for r in range(n + 1):
        c = np.zeros(K.size(r))
        for cols in itertools.combinations(range(n + 1), r + 1):
            np.add.at(c, K.index_of(r, tops[:, list(cols)]), 1)
        counts.append(c)
    return counts


def _uniform(K: SimplicialComplex) -> DualCellMeasures:
    n, a = K.dim, K.edge_length
    prim_c, piece_c = _regular_constants(n)
    counts = _coface_counts(K)
    primal, dual = [], []
    for r in range(n + 1):
        p = prim_c[r] * a**r
        if n == 2 and r == 2:
            p = math.sqrt(3) * a**2 / 2
        primal.append(np.full(K.size(r), p))
        dual.append(counts[r] * piece_c[r] * a ** (n - r))
    return DualCellMeasures("uniform", tuple(primal), tuple(dual))


def _geometric(K: SimplicialComplex) -> DualCellMeasures:
    if K.coords is None:
        raise GeometryError("geometric mode needs vertex coordinates")
    n = K.dim
    X = K.coords
    primal, centres = [], []
    for r in range(n + 1):
        pts = X[K.skeletons[r]]
        vol = _simplex_volume(pts)
        if r > 0:
            bad = np.flatnonzero(vol <= 1e-12 * np.max(vol))
            if bad.size:
                i = int(bad[0])
                raise GeometryError(f"degenerate {r}-simplex #{i} {tuple(K.skeletons[r][i])}")
        primal.append(vol)
        bary = _circumcentre_barycentric(pts)
        centres.append((bary, np.einsum("mi,mid->md", bary, pts)))

    tops = K.skeletons[n]
    dual = [np.zeros(K.size(r)) for r in range(n + 1)]
    dual[n][:] = 1.0
    for perm in itertools.permutations(range(n + 1)):
        ids, signs = [], []
        for k in range(n + 1):
            cols = sorted(perm[: k + 1])
            ids.append(K.index_of(k, tops[:, cols]))
            if k > 0:
                # is the circumcentre of sigma_k on the same side of sigma_{k-1}
                # as the vertex just added?
                pos = cols.index(perm[k])
                signs.append(np.sign(centres[k][0][ids[k], pos]))
        for r in range(n):
            chain = np.stack([centres[k][1][ids[k]] for k in range(r, n + 1)], axis=1)
            vol = _simplex_volume(chain)
            sign = np.prod(np.stack(signs[r:], axis=0), axis=0)
            np.add.at(dual[r], ids[r], sign * vol / math.factorial(r + 1))
    for r in range(n):
        span = np.max(np.abs(dual[r]))
        zero = np.flatnonzero(np.abs(dual[r]) <= 1e-12 * span)
        if zero.size:
            i = int(zero[0])
            raise GeometryError(f"zero dual measure at {r}-simplex #{i} {tuple(K.skeletons[r][i])}")
        neg = np.flatnonzero(dual[r] < 0)
        if neg.size:
            warnings.warn(
                f"{neg.size} negative circumcentric dual measure(s) in degree {r} "
                f"(first: simplex #{int(neg[0])})",
                stacklevel=3,
            )
    return DualCellMeasures("geometric", tuple(primal), tuple(dual))


def dual_cell_measures(K: SimplicialComplex, mode: str = "uniform") -> DualCellMeasures:
    """Primal and dual-cell measures for every degree of ``K``.

    Parameters
    ----------
    mode : {"uniform", "geometric"}

    Raises
    ------
    GeometryError
        Missing coordinates, or a zero-measure simplex or dual cell.
    """
    if mode == "uniform":
        return _uniform(K)
    if mode == "geometric":
        return _geometric(K)
    raise ValueError(f"unknown mode {mode!r}")


def _require_closed(K: SimplicialComplex):
    report = validate_closed_manifold(K)
    if not report.ok:
        facet, count = report.violations[0]
        raise GeometryError(
            f"{len(report.violations)} facet(s) not shared by exactly two top simplexes "
            f"(first: {facet} in {count}); consider double_cover"
        )


def cotangent_weights(K: SimplicialComplex, mode: str = "uniform", measures=None) -> np.ndarray:
    """Cotangent weight per edge of a closed triangulated surface.

    In geometric mode this is ``(cot alpha + cot beta) / 2`` over the two
    angles opposite the edge, equal to ``|dual edge| / |edge|``.
    """
    if K.dim != 2:
        raise GeometryError("cotangent weights are defined for surfaces")
    _require_closed(K)
    if measures is None:
        measures = dual_cell_measures(K, mode)
    return measures.star(1)


def coboundary_matrix(K: SimplicialComplex, r: int) -> sp.csr_matrix:
    """``d_r : C^r -> C^{r+1}``, the transpose of ``B_{r+1}``."""
    if not 0 <= r < K.dim:
        raise ValueError(f"coboundary degree {r} out of range 0..{K.dim - 1}")
    return boundary_matrix(K, r + 1).T.tocsr().astype(float)


def codifferential_matrix(K: SimplicialComplex, r: int, measures: DualCellMeasures) -> sp.csr_matrix:
    """``delta_r : C^r -> C^{r-1}`` built from diagonal Hodge stars."""
    if not 1 <= r <= K.dim:
        raise ValueError(f"codifferential degree {r} out of range 1..{K.dim}")
    _require_closed(K)
    s = codifferential_sign(K.dim, r)
    B = boundary_matrix(K, r).astype(float)
    return (sp.diags(s / measures.star(r - 1)) @ B @ sp.diags(measures.star(r))).tocsr()


@dataclass
class HodgeSystem:
    """Sparse matrices of the coexact and exact solves in degree ``r``.

    Coexact part: ``A Omega = C w`` and ``delta Omega = P Omega`` with
    ``A = d_r delta_{r+1}``, ``C = d_r``, ``P = delta_{r+1}``.
    Exact part: ``K eta = diag(k_rhs) D w`` and ``d eta = Q eta`` with
    ``D = delta_r``, ``Q = d_{r-1}`` and the symmetric ``K = s B_r M_r B_r^T``
    (the codifferential without its ``M_{r-1}^{-1}`` prefactor, which
    ``k_rhs`` restores on the right-hand side).  Absent blocks are ``None``.
    """

    r: int
    measures: DualCellMeasures
    A: sp.csr_matrix | None = None
    C: sp.csr_matrix | None = None
    P: sp.csr_matrix | None = None
    K: sp.csr_matrix | None = None
    D: sp.csr_matrix | None = None
    Q: sp.csr_matrix | None = None
    k_rhs: np.ndarray | None = None
    _meta: dict = field(default_factory=dict, repr=False)

    @property
    def has_coexact(self) -> bool:
        return self.A is not None

    @property
    def has_exact(self) -> bool:
        return self.K is not None

    def inner_product_weights(self) -> np.ndarray:
        """Diagonal of the Hodge inner product on ``r``-cochains."""
        return self.measures.star(self.r)

    def scale_metadata(self) -> dict:
        """``N = kappa_A ||P||_F ||C||_F`` and ``M = kappa_K ||Q||_F ||D||_F``.

        ``kappa`` is the ratio of largest to smallest nonzero singular value
        (dense SVD, so only for small systems).
        """
        if not self._meta:
            out = {}
            if self.has_coexact:
                out["kappa_A"] = _kappa(self.A)
                out["N"] = out["kappa_A"] * sp.linalg.norm(self.P) * sp.linalg.norm(self.C)
            if self.has_exact:
                out["kappa_K"] = _kappa(self.K)
                out["M"] = out["kappa_K"] * sp.linalg.norm(self.Q) * sp.linalg.norm(self.D)
            self._meta.update(out)
        return dict(self._meta)


def _kappa(M, rel: float = 1e-10) -> float:
    s = np.linalg.svd(M.toarray(), compute_uv=False)
    s = s[s > rel * s[0]]
    return float(s[0] / s[-1])


def build_hodge_system(
    K: SimplicialComplex, r: int, mode: str = "uniform", measures: DualCellMeasures | None = None
) -> HodgeSystem:
    """Assemble the Hodge system for degree ``r``.

    ``r = 0`` has no exact block and ``r = dim`` no coexact block.

    Examples
    --------
    >>> from hodgebetti.generators import sphere_tetra
    >>> H = build_hodge_system(sphere_tetra(), 1)
    >>> H.A.toarray()[0].tolist()
    [-6.0, 2.0, 2.0, 2.0]
    """
    n = K.dim
    if not 0 <= r <= n:
        raise ValueError(f"degree {r} out of range 0..{n}")
    _require_closed(K)
    if measures is None:
        measures = dual_cell_measures(K, mode)
    H = HodgeSystem(r=r, measures=measures)
    if r < n:
        H.C = coboundary_matrix(K, r)
        H.P = codifferential_matrix(K, r + 1, measures)
        H.A = (H.C @ H.P).tocsr()
    if r > 0:
        B = boundary_matrix(K, r).astype(float)
        s = codifferential_sign(n, r)
        H.Q = B.T.tocsr()
        H.D = codifferential_matrix(K, r, measures)
        H.K = (s * (B @ sp.diags(measures.star(r)) @ B.T)).tocsr()
        H.k_rhs = measures.star(r - 1)
    return H
