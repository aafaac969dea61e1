import itertools

import numpy as np
import pytest

from hodgebetti import generators


def naive_boundary(tops, r):
    """Boundary matrix of degree ``r`` built from scratch (no package code)."""
    width = len(tops[0])
    faces = {k: sorted({tuple(sorted(c)) for t in tops for c in itertools.combinations(t, k + 1)})
             for k in range(width)}
    rows = {s: i for i, s in enumerate(faces[r - 1])}
    B = np.zeros((len(faces[r - 1]), len(faces[r])))
    for j, s in enumerate(faces[r]):
        for i in range(len(s)):
            B[rows[s[:i] + s[i + 1:]], j] = (-1) ** i
    return B, faces


def naive_betti(tops):
    """Betti numbers over the rationals from dense numpy ranks."""
    width = len(tops[0])
    faces = naive_boundary(tops, 1)[1] if width > 1 else {0: sorted({tuple(t) for t in tops})}
    ranks = [0] + [np.linalg.matrix_rank(naive_boundary(tops, r)[0]) for r in range(1, width)] + [0]
    return tuple(len(faces[r]) - ranks[r] - ranks[r + 1] for r in range(width))


@pytest.fixture(scope="session")
def tetra():
    return generators.sphere_tetra()


@pytest.fixture(scope="session")
def icosa():
    return generators.sphere_icosa()


@pytest.fixture(scope="session")
def torus88():
    return generators.torus(8, 8)


@pytest.fixture(scope="session")
def torus44():
    return generators.torus(4, 4)


ACCEPTANCE_LINES = []


@pytest.fixture
def verdict(request):
    """Record one pass/fail line for the terminal summary; returns a callable
    taking ``(ok, detail)`` that also asserts ``ok``."""
    name = request.node.name

    def record(ok, detail=""):
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip())
        assert ok, detail

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
