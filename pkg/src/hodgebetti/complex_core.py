"""Simplicial complexes, boundary operators and incidence matrices.

A complex is stored as one integer array per degree ``r`` holding the
vertex tuples of its ``r``-simplexes, each tuple ascending and the rows in
lexicographic order.  Orientation is carried only by the signs of the
boundary matrices: alternating signs over the sorted vertices, with the top
simplexes additionally flipped to a coherent orientation when one exists.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "SimplicialComplex",
    "ManifoldReport",
    "AdjacencyMatrices",
    "build_from_simplexes",
    "validate_closed_manifold",
    "barycentric_subdivision",
    "double_cover",
    "boundary_matrix",
    "incidence_matrices",
    "euler_characteristic",
]


def _keys(rows: np.ndarray, base: int):
    """Scalar sort keys for lexicographically ordered vertex tuples."""
    width = rows.shape[1]
    if width == 0:
        return np.zeros(len(rows), dtype=np.int64)
    if base ** width < 2**62:
        weights = base ** np.arange(width - 1, -1, -1, dtype=np.int64)
        return rows.astype(np.int64) @ weights
    return None


class SimplicialComplex:
    """An abstract simplicial complex with optional vertex coordinates.

    Parameters
    ----------
    skeletons : sequence of ndarray
        ``skeletons[r]`` has shape ``(|S_r|, r + 1)``.  Rows must be
        ascending and the array sorted lexicographically; use
        :func:`build_from_simplexes` rather than calling this directly.
    n_points : int
        Size of the vertex label space.
    coords : ndarray, optional
        ``(n_points, d)`` vertex positions, needed for geometric measures.
    edge_length : float
        Edge length ``a`` assumed by the uniform-triangulation model.
    """

    def __init__(
        self,
        skeletons: Sequence[np.ndarray],
        n_points: int,
        coords: np.ndarray | None = None,
        edge_length: float = 1.0,
    ):
        self.skeletons = tuple(np.asarray(s, dtype=np.int64) for s in skeletons)
        for s in self.skeletons:
            s.setflags(write=False)
        self.n_points = int(n_points)
        if coords is not None:
            coords = np.asarray(coords, dtype=float)
            if coords.shape[0] != self.n_points:
                raise ValueError("coords must have one row per point")
            coords.setflags(write=False)
        self.coords = coords
        self.edge_length = float(edge_length)

    @property
    def dim(self) -> int:
        return len(self.skeletons) - 1

    def size(self, r: int) -> int:
        """Number of ``r``-simplexes, ``|S_r|`` (zero outside ``0..dim``)."""
        if 0 <= r <= self.dim:
            return len(self.skeletons[r])
        return 0

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.skeletons)

    def __repr__(self) -> str:
        return f"SimplicialComplex(dim={self.dim}, sizes={self.sizes})"

    def index_of(self, r: int, simplexes: np.ndarray) -> np.ndarray:
        """Row indices in ``S_r`` of the given sorted vertex tuples.

        Raises ``KeyError`` if any tuple is not in the complex.
        """
        simplexes = np.atleast_2d(np.asarray(simplexes, dtype=np.int64))
        if simplexes.size and (simplexes.min() < 0 or simplexes.max() >= self.n_points):
            bad = (simplexes < 0).any(1) | (simplexes >= self.n_points).any(1)
            raise KeyError(tuple(int(v) for v in simplexes[np.argmax(bad)]))
        keys = _keys(simplexes, self.n_points)
        if keys is not None and self._sorted_keys[r] is not None:
            ref = self._sorted_keys[r]
            pos = np.searchsorted(ref, keys)
            pos = np.minimum(pos, len(ref) - 1)
            bad = ref[pos] != keys
            if bad.any():
                raise KeyError(tuple(simplexes[np.argmax(bad)]))
            return pos
        lookup = self._lookup[r]
        return np.array([lookup[tuple(row)] for row in simplexes], dtype=np.int64)

    @cached_property
    def _sorted_keys(self):
        return [_keys(s, self.n_points) for s in self.skeletons]

    @cached_property
    def _lookup(self):
        return [{tuple(row): i for i, row in enumerate(s)} for s in self.skeletons]

    @cached_property
    def top_orientation(self) -> np.ndarray:
        """Sign per top simplex giving a coherent orientation where possible."""
        signs, _ = _orient(self)
        signs.setflags(write=False)
        return signs

    @cached_property
    def orientable(self) -> bool:
        return _orient(self)[1]

    def to_json_dict(self) -> dict:
        out = {
            "n_points": self.n_points,
            "top_simplexes": self.skeletons[-1].tolist(),
        }
        if self.coords is not None:
            out["coords"] = self.coords.tolist()
        return out


@dataclass(frozen=True)
class ManifoldReport:
    """Outcome of :func:`validate_closed_manifold`.

    ``violations`` lists ``(facet, count)`` for every ``(n-1)``-simplex that
    is not shared by exactly two top simplexes.
    """

    ok: bool
    violations: list = field(default_factory=list)

    @property
    def boundary(self) -> list:
        return [f for f, c in self.violations if c == 1]

    @property
    def singular(self) -> list:
        return [f for f, c in self.violations if c > 2]

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class AdjacencyMatrices:
    """The ``F_r`` (adjacency) and ``G_r`` (inclusion) matrices per degree.

    ``G[0]`` is ``None`` since vertices have no faces.
    """

    F: list
    G: list


def build_from_simplexes(
    top_simplexes: Iterable[Sequence[int]],
    n_points: int | None = None,
    coords=None,
    edge_length: float = 1.0,
) -> SimplicialComplex:
    """Close a list of top simplexes under taking faces.

    Parameters
    ----------
    top_simplexes : iterable of int sequences
        All of the same length ``n + 1``.
    n_points : int, optional
        Vertex labels must lie in ``range(n_points)``; defaults to
        ``max label + 1``.

    Examples
    --------
    >>> K = build_from_simplexes([[0, 1, 2]])
    >>> K.sizes
    (3, 3, 1)
    """
    tops = [tuple(int(v) for v in s) for s in top_simplexes]
    if not tops:
        raise ValueError("need at least one simplex")
    width = len(tops[0])
    if width == 0 or any(len(s) != width for s in tops):
        raise ValueError("top simplexes must be non-empty and of equal dimension")
    arr = np.array(tops, dtype=np.int64)
    if n_points is None:
        n_points = int(arr.max()) + 1
    if arr.min() < 0 or arr.max() >= n_points:
        bad = tops[int(np.argmax((arr < 0).any(1) | (arr >= n_points).any(1)))]
        raise ValueError(f"vertex index out of range in simplex {bad}")
    arr = np.sort(arr, axis=1)
    if width > 1 and (np.diff(arr, axis=1) == 0).any():
        bad = arr[int(np.argmax((np.diff(arr, axis=1) == 0).any(1)))]
        raise ValueError(f"repeated vertex in simplex {tuple(bad)}")
    uniq, counts = np.unique(arr, axis=0, return_counts=True)
    if (counts > 1).any():
        raise ValueError(f"duplicate top simplex {tuple(uniq[np.argmax(counts > 1)])}")

    skeletons = []
    for r in range(width):
        cols = list(itertools.combinations(range(width), r + 1))
        faces = np.concatenate([uniq[:, c] for c in cols], axis=0)
        skeletons.append(np.unique(faces, axis=0))
    return SimplicialComplex(skeletons, n_points, coords=coords, edge_length=edge_length)


def euler_characteristic(K: SimplicialComplex) -> int:
    return int(sum((-1) ** r * n for r, n in enumerate(K.sizes)))


def _facet_incidence(K: SimplicialComplex, r: int):
    """For each ``r``-simplex and each omitted position ``i``: face index."""
    simplexes = K.skeletons[r]
    faces = np.empty((len(simplexes), r + 1), dtype=np.int64)
    for i in range(r + 1):
        faces[:, i] = K.index_of(r - 1, np.delete(simplexes, i, axis=1))
    return faces


def _orient(K: SimplicialComplex):
    n = K.dim
    m = K.size(n)
    signs = np.ones(m, dtype=np.int64)
    if n == 0:
        return signs, True
    faces = _facet_incidence(K, n)
    base = (-1) ** np.arange(n + 1)
    cofaces: dict[int, list] = {}
    for t in range(m):
        for i in range(n + 1):
            cofaces.setdefault(int(faces[t, i]), []).append((t, int(base[i])))
    seen = np.zeros(m, dtype=bool)
    orientable = True
    for start in range(m):
        if seen[start]:
            continue
        seen[start] = True
        queue = deque([start])
        while queue:
            t = queue.popleft()
            for i in range(n + 1):
                pair = cofaces[int(faces[t, i])]
                if len(pair) != 2:
                    continue
                (t1, s1), (t2, s2) = pair
                other, s_other = (t2, s2) if t1 == t else (t1, s1)
                s_self = s1 if t1 == t else s2
                want = -s_self * signs[t] * s_other
                if not seen[other]:
                    seen[other] = True
                    signs[other] = want
                    queue.append(other)
                elif signs[other] != want:
                    orientable = False
    if not orientable:
        signs[:] = 1
    return signs, orientable


def boundary_matrix(K: SimplicialComplex, r: int) -> sp.csr_matrix:
    """Signed boundary operator ``B_r : C_r -> C_{r-1}`` as a sparse int matrix.

    Column ``j`` is ``sum_i (-1)^i [v_0, ..., v_i omitted, ..., v_r]`` for the
    ``j``-th ``r``-simplex.  Top-degree columns are multiplied by
    :attr:`SimplicialComplex.top_orientation`.
    """
    if not 1 <= r <= K.dim:
        raise ValueError(f"degree {r} out of range 1..{K.dim}")
    faces = _facet_incidence(K, r)
    m = faces.shape[0]
    vals = np.tile((-1) ** np.arange(r + 1), (m, 1))
    if r == K.dim:
        vals = vals * K.top_orientation[:, None]
    cols = np.repeat(np.arange(m), r + 1)
    B = sp.csr_matrix(
        (vals.ravel(), (faces.ravel(), cols)), shape=(K.size(r - 1), m), dtype=np.int64
    )
    return B


def incidence_matrices(K: SimplicialComplex) -> AdjacencyMatrices:
    """Adjacency ``F_r`` and inclusion ``G_r`` matrices (0/1, sparse).

    ``G_r[i, j] = 1`` when the ``j``-th ``(r-1)``-simplex is a face of the
    ``i``-th ``r``-simplex.  ``F_r[i, j] = 1`` when the two ``r``-simplexes
    share a face; for ``r = 0`` two vertices are adjacent when joined by an
    edge.
    """
    F, G = [], [None]
    for r in range(1, K.dim + 1):
        G.append(abs(boundary_matrix(K, r)).T.tocsr().astype(np.int8))
    for r in range(K.dim + 1):
        if r == 0:
            if K.dim == 0:
                F.append(sp.csr_matrix((K.size(0), K.size(0)), dtype=np.int8))
                continue
            inc = G[1].T.astype(np.int64)
        else:
            inc = G[r].astype(np.int64)
        adj = (inc @ inc.T).tolil()
        adj.setdiag(0)
        adj = adj.tocsr()
        adj.eliminate_zeros()
        adj.data[:] = 1
        F.append(adj.astype(np.int8))
    return AdjacencyMatrices(F=F, G=G)


def validate_closed_manifold(K: SimplicialComplex) -> ManifoldReport:
    """Check that every ``(n-1)``-simplex borders exactly two ``n``-simplexes."""
    n = K.dim
    if n == 0:
        return ManifoldReport(ok=True)
    counts = np.asarray(abs(boundary_matrix(K, n)).sum(axis=1)).ravel()
    bad = np.flatnonzero(counts != 2)
    violations = [(tuple(int(v) for v in K.skeletons[n - 1][i]), int(counts[i])) for i in bad]
    return ManifoldReport(ok=not violations, violations=violations)


def barycentric_subdivision(K: SimplicialComplex) -> tuple[SimplicialComplex, np.ndarray]:
    """First barycentric subdivision.

    Returns the subdivided complex and, for each new vertex, its
    ``(degree, index)`` in ``K``.  New vertices are numbered degree by
    degree, so the original vertices keep positions ``0..|S_0|-1``.
    """
    n = K.dim
    offsets = np.concatenate([[0], np.cumsum(K.sizes)])
    origin = np.concatenate(
        [np.column_stack([np.full(k, r), np.arange(k)]) for r, k in enumerate(K.sizes)]
    )
    tops = K.skeletons[n]
    flags = []
    for perm in itertools.permutations(range(n + 1)):
        # chain {perm[0]} < {perm[0], perm[1]} < ... < top
        ids = []
        for k in range(n + 1):
            cols = sorted(perm[: k + 1])
            ids.append(offsets[k] + K.index_of(k, tops[:, cols]))
        flags.append(np.column_stack(ids))
    flags = np.concatenate(flags, axis=0)
    coords = None
    if K.coords is not None:
        coords = np.concatenate(
            [K.coords[s].mean(axis=1) for s in K.skeletons], axis=0
        )
    sd = build_from_simplexes(flags, int(offsets[-1]), coords=coords, edge_length=K.edge_length)
    return sd, origin


def double_cover(K: SimplicialComplex) -> SimplicialComplex:
    """Glue two copies of a manifold-with-boundary along the boundary.

    ``K`` is barycentrically subdivided first so that every simplex whose
    vertices all lie on the boundary is itself a boundary simplex; without
    that step the two copies of, e.g., a single triangle would coincide.
    A complex that is already closed is returned unchanged.
    """
    report = validate_closed_manifold(K)
    if report.singular:
        raise ValueError(f"non-manifold input: facets {report.singular[:5]} lie in >= 3 simplexes")
    if report.ok:
        return K
    sd, origin = barycentric_subdivision(K)
    n = K.dim
    # boundary vertices of sd = barycenters of faces of boundary facets of K
    on_boundary = np.zeros(sd.n_points, dtype=bool)
    offsets = np.concatenate([[0], np.cumsum(K.sizes)])
    bfacets = np.array([f for f in report.boundary], dtype=np.int64)
    for r in range(n):
        for cols in itertools.combinations(range(n), r + 1):
            idx = K.index_of(r, bfacets[:, list(cols)])
            on_boundary[offsets[r] + idx] = True
    mirror = np.arange(sd.n_points)
    interior = np.flatnonzero(~on_boundary)
    mirror[interior] = sd.n_points + np.arange(len(interior))
    tops = sd.skeletons[n]
    n_out = sd.n_points + len(interior)
    coords = None
    if sd.coords is not None:
        coords = np.concatenate([sd.coords, sd.coords[interior]], axis=0)
    return build_from_simplexes(
        np.concatenate([tops, mirror[tops]], axis=0), n_out, coords=coords, edge_length=K.edge_length
    )
