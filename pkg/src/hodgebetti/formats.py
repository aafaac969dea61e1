"""Reading and writing complexes (JSON, OFF) and sparse triplet dumps."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .complex_core import SimplicialComplex, build_from_simplexes

__all__ = ["ParseError", "load_json", "save_json", "load_off", "load_complex", "write_triplets", "read_triplets"]


class ParseError(ValueError):
    """Malformed input file; ``line`` is 1-based when known."""

    def __init__(self, message: str, path=None, line: int | None = None):
        where = f"{path}:{line}: " if line is not None else (f"{path}: " if path else "")
        super().__init__(where + message)
        self.path = path
        self.line = line


def load_json(path) -> SimplicialComplex:
    """Load ``{"n_points": N, "top_simplexes": [...], "coords": [...]?}``."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path, exc.lineno) from exc
    if not isinstance(data, dict) or "top_simplexes" not in data:
        raise ParseError("expected an object with 'top_simplexes'", path)
    try:
        return build_from_simplexes(
            data["top_simplexes"],
            data.get("n_points"),
            coords=data.get("coords"),
            edge_length=data.get("edge_length", 1.0),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(str(exc), path) from exc


def save_json(K: SimplicialComplex, path) -> None:
    Path(path).write_text(json.dumps(K.to_json_dict()) + "\n")


def _off_lines(text: str):
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield number, line.split()


def load_off(path) -> SimplicialComplex:
    """Read an ASCII OFF surface mesh made of triangles."""
    lines = _off_lines(Path(path).read_text())
    try:
        number, tokens = next(lines)
    except StopIteration:
        raise ParseError("empty file", path) from None
    if tokens[0].upper() == "OFF":
        tokens = tokens[1:]
        if not tokens:
            try:
                number, tokens = next(lines)
            except StopIteration:
                raise ParseError("missing counts line", path) from None
    try:
        n_verts, n_faces = int(tokens[0]), int(tokens[1])
    except (IndexError, ValueError):
        raise ParseError("bad counts line", path, number) from None

    coords = np.empty((n_verts, 3))
    faces = []
    try:
        for i in range(n_verts):
            number, tokens = next(lines)
            coords[i] = [float(t) for t in tokens[:3]]
        for _ in range(n_faces):
            number, tokens = next(lines)
            count = int(tokens[0])
            if count != 3:
                raise ParseError(f"only triangles are supported, got a {count}-gon", path, number)
            faces.append([int(t) for t in tokens[1:4]])
    except StopIteration:
        raise ParseError("unexpected end of file", path) from None
    except (IndexError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed record: {exc}", path, number) from None
    try:
        return build_from_simplexes(faces, n_verts, coords=coords)
    except ValueError as exc:
        raise ParseError(str(exc), path) from exc


def load_complex(path) -> SimplicialComplex:
    """Dispatch on file suffix (``.json`` or ``.off``)."""
    suffix = Path(path).suffix.lower()
    if suffix == ".json":
        return load_json(path)
    if suffix == ".off":
        return load_off(path)
    raise ParseError(f"unsupported file type {suffix!r}", path)


def write_triplets(M, path) -> None:
    """Write ``rows cols nnz`` then one ``row col value`` line per entry."""
    M = sp.coo_matrix(M)
    with open(path, "w") as fh:
        fh.write(f"{M.shape[0]} {M.shape[1]} {M.nnz}\n")
        order = np.lexsort((M.col, M.row))
        for i, j, v in zip(M.row[order], M.col[order], M.data[order]):
            fh.write(f"{i} {j} {float(v).__repr__()}\n")


def read_triplets(path) -> sp.csr_matrix:
    with open(path) as fh:
        rows, cols, nnz = (int(t) for t in fh.readline().split())
        data = np.loadtxt(fh, ndmin=2) if nnz else np.zeros((0, 3))
    return sp.csr_matrix((data[:, 2], (data[:, 0].astype(int), data[:, 1].astype(int))), shape=(rows, cols))
