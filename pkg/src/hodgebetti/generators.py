"""Triangulations of standard closed manifolds."""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from .complex_core import SimplicialComplex, build_from_simplexes

__all__ = [
    "sphere_tetra",
    "sphere_icosa",
    "torus",
    "genus_g_surface",
    "three_torus",
    "generate",
]


def sphere_tetra() -> SimplicialComplex:
    """Boundary of the regular tetrahedron with unit edges."""
    pts = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], float)
    pts /= 2 * np.sqrt(2)
    return build_from_simplexes(itertools.combinations(range(4), 3), 4, coords=pts)


def sphere_icosa() -> SimplicialComplex:
    """Regular icosahedron with unit edges; faces found from the geometry."""
    phi = (1 + np.sqrt(5)) / 2
    pts = []
    for a, b in itertools.product((-1, 1), repeat=2):
        pts += [(0, a, b * phi), (a, b * phi, 0), (b * phi, 0, a)]
    pts = np.array(pts) / 2
    dist = np.linalg.norm(pts[:, None] - pts[None], axis=-1)
    near = np.isclose(dist, 1.0)
    faces = [t for t in itertools.combinations(range(12), 3)
             if near[t[0], t[1]] and near[t[1], t[2]] and near[t[0], t[2]]]
    return build_from_simplexes(faces, 12, coords=pts)


def torus(m: int, n: int, major: float = 3.0, minor: float = 1.0) -> SimplicialComplex:
    """Periodic ``m x n`` grid with each square split along its diagonal.

    Vertex ``(i, j)`` has index ``i * n + j``.  Coordinates place the grid on
    a ring torus in R^3.
    """
    if m < 3 or n < 3:
        raise ValueError("torus needs m, n >= 3 to be a simplicial complex")
    idx = lambda i, j: (i % m) * n + (j % n)  # noqa: E731
    tris = []
    for i in range(m):
        for j in range(n):
            tris.append((idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)))
            tris.append((idx(i, j), idx(i, j + 1), idx(i + 1, j + 1)))
    u = 2 * np.pi * np.repeat(np.arange(m), n) / m
    v = 2 * np.pi * np.tile(np.arange(n), m) / n
    pts = np.column_stack([
        (major + minor * np.cos(v)) * np.cos(u),
        (major + minor * np.cos(v)) * np.sin(u),
        minor * np.sin(v),
    ])
    return build_from_simplexes(tris, m * n, coords=pts)


def _disk_subdivide(verts, tris):
    """One barycentric subdivision of a 2-d complex given by exact weights."""
    new_verts = list(verts)
    index = {w: i for i, w in enumerate(new_verts)}

    def vertex(weights):
        if weights not in index:
            index[weights] = len(new_verts)
            new_verts.append(weights)
        return index[weights]

    def mean(ids):
        return tuple(sum((verts[i][k] for i in ids), Fraction(0)) / len(ids)
                     for k in range(len(verts[0])))

    new_tris = []
    for t in tris:
        centre = vertex(mean(t))
        for a, b, c in itertools.permutations(t):
            mid = vertex(mean(sorted((a, b))))
            new_tris.append((a, mid, centre))
    return new_verts, new_tris


def genus_g_surface(g: int, subdivisions: int = 2) -> SimplicialComplex:
    """Closed orientable surface of genus ``g`` (no coordinates).

    A cone over the boundary of a ``4g``-gon is barycentrically subdivided
    ``subdivisions`` times and its sides are glued following the word
    ``a1 b1 a1^-1 b1^-1 ... ag bg ag^-1 bg^-1``.  At least two rounds are
    needed for the quotient to remain a simplicial complex.
    """
    if g < 1:
        raise ValueError("genus must be >= 1")
    if subdivisions < 2:
        raise ValueError("subdivisions must be >= 2")
    p = 4 * g
    dim = p + 1  # weight slot 0 is the centre, 1..p are the corners
    one = lambda k: tuple(Fraction(int(i == k)) for i in range(dim))  # noqa: E731
    verts = [one(k) for k in range(dim)]
    tris = [(0, 1 + k, 1 + (k + 1) % p) for k in range(p)]
    for _ in range(subdivisions):
        verts, tris = _disk_subdivide(verts, tris)

    def key(w):
        support = [k for k in range(dim) if w[k] != 0]
        if 0 in support:
            return ("int", w)
        if len(support) == 1:
            return ("corner",)
        lo, hi = support
        side = lo - 1
        if hi - lo != 1:  # side p-1 wraps from corner p back to corner 1
            side = p - 1
            lo, hi = hi, lo
        t = w[hi]  # distance from corner lo along the side
        letter = ("ab"[side % 2], side // 4)
        return ("side", letter, t if side % 4 < 2 else 1 - t)

    labels: dict = {}
    vmap = [labels.setdefault(key(w), len(labels)) for w in verts]
    glued = [tuple(vmap[i] for i in t) for t in tris]
    return build_from_simplexes(glued, len(labels))


def three_torus(k: int) -> SimplicialComplex:
    """Periodic ``k^3`` grid, each cube cut into six tetrahedra.

    Uses the Freudenthal (Kuhn) subdivision: one tetrahedron per ordering of
    the three axes, so neighbouring cubes match up across shared faces.
    """
    if k < 3:
        raise ValueError("three_torus needs k >= 3")
    idx = lambda x, y, z: ((x % k) * k + (y % k)) * k + (z % k)  # noqa: E731
    tets = []
    for x, y, z in itertools.product(range(k), repeat=3):
        for perm in itertools.permutations(range(3)):
            pos = [x, y, z]
            chain = [idx(*pos)]
            for axis in perm:
                pos[axis] += 1
                chain.append(idx(*pos))
            tets.append(chain)
    return build_from_simplexes(tets, k**3)


_SHAPES = {
    "sphere": lambda kind="icosa": {"icosa": sphere_icosa, "tetra": sphere_tetra}[kind](),
    "sphere_icosa": lambda: sphere_icosa(),
    "sphere_tetra": lambda: sphere_tetra(),
    "torus": lambda m=8, n=None: torus(int(m), int(n if n is not None else m)),
    "genus": lambda g=2, s=2: genus_g_surface(int(g), int(s)),
    "three_torus": lambda k=3: three_torus(int(k)),
}


def generate(shape: str) -> SimplicialComplex:
    """Build a complex from a short description such as ``"torus:8,8"``.

    Recognised names: ``sphere:icosa``, ``sphere:tetra``, ``torus:m,n``,
    ``genus:g[,subdivisions]``, ``three_torus:k``.
    """
    name, _, args = shape.partition(":")
    name = name.strip().lower()
    if name not in _SHAPES:
        raise ValueError(f"unknown shape {name!r}; choose from {sorted(_SHAPES)}")
    params = [a.strip() for a in args.split(",") if a.strip()] if args else []
    try:
        return _SHAPES[name](*params)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"bad parameters for {name!r}: {args!r}") from exc
