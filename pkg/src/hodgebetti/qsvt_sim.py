"""Dense simulation of block encodings and polynomial matrix inversion.

A :class:`BlockEncoding` is a unitary ``U`` on ``C^k (ancilla) x C^N
(system)`` whose top-left ``N x N`` block equals ``A / alpha`` (``A`` is
zero-padded to ``N x N`` when rectangular).  All constructions are explicit
matrices, so unitarity and block fidelity can be checked directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.optimize import linprog

__all__ = [
    "BlockEncoding",
    "InversePolynomial",
    "encode_dense",
    "product",
    "linear_combination",
    "scale_down",
    "tensor",
    "hermitian_dilation",
    "gram_encoding",
    "density_block_encoding",
    "inverse_polynomial",
    "rescaled_degree",
    "invert_rescaled",
    "cohomology_chain",
]


@dataclass
class BlockEncoding:
    """Unitary ``U`` with ``U[:m, :n] = A / alpha`` up to ``error``.

    Attributes
    ----------
    U : ndarray
        ``(k N) x (k N)`` unitary, ancilla index major.
    system_dim : int
        ``N``.
    block_shape : tuple
        ``(m, n)``, the shape of the encoded matrix.
    alpha : float
        Scale factor.
    error : float
        Bound on ``||U[:m, :n] - A / alpha||``.
    """

    U: np.ndarray
    system_dim: int
    block_shape: tuple
    alpha: float = 1.0
    error: float = 0.0
    label: str = ""
    meta: dict = field(default_factory=dict, repr=False)

    @property
    def ancilla_dim(self) -> int:
        return self.U.shape[0] // self.system_dim

    @property
    def block(self) -> np.ndarray:
        m, n = self.block_shape
        return self.U[:m, :n]

    @property
    def matrix(self) -> np.ndarray:
        """``alpha * block``, the approximated matrix."""
        return self.alpha * self.block

    def unitarity_error(self) -> float:
        U = self.U
        return float(np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0]), 2))

    def check(self, A=None, tol: float = 1e-12) -> None:
        """Raise ``AssertionError`` if unitarity or block fidelity fails."""
        err = self.unitarity_error()
        if err > tol:
            raise AssertionError(f"{self.label or 'encoding'} not unitary: {err:.2e}")
        pad = self.U[: self.system_dim, : self.system_dim].copy()
        pad[: self.block_shape[0], : self.block_shape[1]] = 0
        if np.linalg.norm(pad) > tol:
            raise AssertionError("nonzero entries outside the encoded block")
        if A is not None:
            gap = np.linalg.norm(self.block - np.asarray(A) / self.alpha, 2)
            if gap > self.error + tol:
                raise AssertionError(f"block off by {gap:.2e} (error bound {self.error:.2e})")


def _psd_sqrt(M: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh((M + M.conj().T) / 2)
    return (V * np.sqrt(np.clip(w, 0, None))) @ V.conj().T


def _complete(A: np.ndarray) -> np.ndarray:
    """Unitary ``[[A, sqrt(I - A A*)], [sqrt(I - A* A), -A*]]``."""
    N = A.shape[0]
    I = np.eye(N)
    Ah = A.conj().T
    top = np.hstack([A, _psd_sqrt(I - A @ Ah)])
    bottom = np.hstack([_psd_sqrt(I - Ah @ A), -Ah])
    return np.vstack([top, bottom])


def _pad(A: np.ndarray, N: int) -> np.ndarray:
    out = np.zeros((N, N), dtype=A.dtype)
    out[: A.shape[0], : A.shape[1]] = A
    return out


def encode_dense(A, alpha: float | None = None, dim: int | None = None, label: str = "") -> BlockEncoding:
    """Exact block encoding of ``A / alpha`` by unitary completion.

    Parameters
    ----------
    A : array_like
        Matrix to encode; with ``alpha=None`` it must satisfy ``||A|| < 1``.
    alpha : float, optional
        Encode ``A / alpha`` instead, requiring ``||A|| <= alpha``.
    dim : int, optional
        System dimension ``N`` to pad into; defaults to ``max(A.shape)``.

    A square unitary input with ``alpha=None`` encodes itself (no ancilla).
    """
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValueError("A must be a matrix")
    if not np.iscomplexobj(A):
        A = A.astype(float)
    m, n = A.shape
    N = max(m, n) if dim is None else int(dim)
    if N < max(m, n):
        raise ValueError("dim smaller than the matrix")
    norm = np.linalg.norm(A, 2) if A.size else 0.0
    if alpha is None:
        if m == n == N and np.allclose(A.conj().T @ A, np.eye(n), atol=1e-12):
            return BlockEncoding(A.copy(), N, (m, n), 1.0, 0.0, label or "unitary")
        if norm >= 1:
            raise ValueError(f"operator norm {norm:.6g} >= 1; rescale or pass alpha")
        alpha = 1.0
    elif norm > alpha * (1 + 1e-12):
        raise ValueError(f"operator norm {norm:.6g} exceeds alpha {alpha:.6g}")
    scaled = _pad(A / alpha, N)
    norm_scaled = np.linalg.norm(scaled, 2)
    if norm_scaled > 1:
        scaled = scaled / norm_scaled  # clip rounding above 1
    return BlockEncoding(_complete(scaled), N, (m, n), float(alpha), 0.0, label)


def _embed_middle(U: np.ndarray, k_outer: int, k_mid: int, N: int) -> np.ndarray:
    """Act with ``U`` on (outer ancilla, system), identity on a middle register."""
    T = U.reshape(k_outer, N, k_outer, N)
    full = np.einsum("asbt,cd->acsbdt", T, np.eye(k_mid))
    d = k_outer * k_mid * N
    return full.reshape(d, d)


def product(e1: BlockEncoding, e2: BlockEncoding) -> BlockEncoding:
    """Encoding of ``A1 A2`` with ``alpha = alpha1 alpha2``.

    Registers are ordered (ancilla2, ancilla1, system).
    """
    if e1.system_dim != e2.system_dim:
        raise ValueError("encodings act on different system dimensions")
    if e1.block_shape[1] != e2.block_shape[0]:
        raise ValueError(f"inner dimensions differ: {e1.block_shape} x {e2.block_shape}")
    N, k1, k2 = e1.system_dim, e1.ancilla_dim, e2.ancilla_dim
    U1 = np.kron(np.eye(k2), e1.U)
    U2 = _embed_middle(e2.U, k2, k1, N)
    return BlockEncoding(
        U1 @ U2, N, (e1.block_shape[0], e2.block_shape[1]),
        e1.alpha * e2.alpha, e1.error + e2.error, f"({e1.label})*({e2.label})",
    )


def tensor(e1: BlockEncoding, e2: BlockEncoding) -> BlockEncoding:
    """Encoding of ``A1 (x) A2`` with ``alpha = alpha1 alpha2``.

    Registers are reordered to (anc1, anc2, sys1, sys2).  Both blocks must
    fill their system registers, except that ``e1`` may be a scalar
    (``N1 = 1``) encoding.
    """
    k1, N1, k2, N2 = e1.ancilla_dim, e1.system_dim, e2.ancilla_dim, e2.system_dim
    full1 = e1.block_shape == (N1, N1)
    full2 = e2.block_shape == (N2, N2)
    if not (full1 and (full2 or N1 == 1)):
        raise ValueError("tensor needs square blocks filling their systems")
    T = np.kron(e1.U, e2.U).reshape(k1, N1, k2, N2, k1, N1, k2, N2)
    d = k1 * k2 * N1 * N2
    U = T.transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(d, d)
    m2, n2 = e2.block_shape
    return BlockEncoding(U, N1 * N2, (N1 * m2, N1 * n2), e1.alpha * e2.alpha, e1.error + e2.error,
                         f"({e1.label})(x)({e2.label})")


def _rotation(p: float) -> BlockEncoding:
    theta = 2 * math.acos(1 / p)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return BlockEncoding(np.array([[c, -s], [s, c]]), 1, (1, 1), 1.0, 0.0, f"RY(1/{p:.4g})")


def scale_down(e: BlockEncoding, p: float) -> BlockEncoding:
    """Encoding of ``A / p`` (``alpha`` multiplied by ``p``) via an ``R_Y`` rotation.

    The rotation angle satisfies ``cos(theta / 2) = 1 / p``.
    """
    if p <= 1:
        raise ValueError("scale factor must exceed 1")
    out = tensor(_rotation(p), e)
    out.alpha = e.alpha * p
    out.error = e.error / p
    out.block_shape = e.block_shape
    out.label = f"({e.label})/{p:.4g}"
    return out


def _pad_ancilla(U: np.ndarray, d: int) -> np.ndarray:
    out = np.eye(d, dtype=U.dtype)
    out[: U.shape[0], : U.shape[0]] = U
    return out


def _uniform_prep(m: int) -> np.ndarray:
    """Real orthogonal matrix whose first column is ``1 / sqrt(m)``."""
    u = np.full(m, 1 / math.sqrt(m))
    v = u.copy()
    v[0] -= 1
    if np.linalg.norm(v) < 1e-15:
        return np.eye(m)
    return -(np.eye(m) - 2 * np.outer(v, v) / (v @ v))


def linear_combination(encodings, signs=None) -> BlockEncoding:
    """Encoding of ``sum_i s_i A_i / m`` with ``alpha = m * max_i alpha_i``.

    Encodings with smaller ``alpha`` are first brought to the common maximum
    with :func:`scale_down`.
    """
    encodings = list(encodings)
    if not encodings:
        raise ValueError("need at least one encoding")
    m = len(encodings)
    signs = [1] * m if signs is None else list(signs)
    if len(signs) != m or any(s not in (1, -1) for s in signs):
        raise ValueError("signs must be a list of +-1, one per encoding")
    N, shape = encodings[0].system_dim, encodings[0].block_shape
    if any(e.system_dim != N or e.block_shape != shape for e in encodings):
        raise ValueError("encodings must share system dimension and block shape")
    a_max = max(e.alpha for e in encodings)
    aligned = [e if math.isclose(e.alpha, a_max, rel_tol=1e-15) else scale_down(e, a_max / e.alpha)
               for e in encodings]
    d = max(e.U.shape[0] for e in aligned)
    dtype = np.result_type(*[e.U.dtype for e in aligned])
    select = np.zeros((m * d, m * d), dtype=dtype)
    for i, (e, s) in enumerate(zip(aligned, signs)):
        select[i * d:(i + 1) * d, i * d:(i + 1) * d] = s * _pad_ancilla(e.U, d)
    prep = np.kron(_uniform_prep(m), np.eye(d))
    U = prep.conj().T @ select @ prep
    return BlockEncoding(U, N, shape, m * a_max, max(e.error for e in aligned),
                         "LCU[" + ", ".join(("+" if s > 0 else "-") + e.label for e, s in zip(encodings, signs)) + "]")


def hermitian_dilation(A) -> np.ndarray:
    """``[[0, A], [A*, 0]]``; its eigenvalues are the singular values of ``A`` with both signs."""
    A = np.asarray(A)
    m, n = A.shape
    out = np.zeros((m + n, m + n), dtype=A.dtype)
    out[:m, m:] = A
    out[m:, :m] = A.conj().T
    return out


def _column_state(A: np.ndarray) -> np.ndarray:
    """``|Phi> = sum_i |i> (x) conj(A^i) / ||A||_F``, column label first."""
    frob = np.linalg.norm(A)
    if frob == 0:
        raise ValueError("zero matrix has no Gram state")
    return (A.conj().T / frob).reshape(-1)


def gram_encoding(A) -> np.ndarray:
    """Reduced state of the column-stacked state: ``A* A / ||A||_F^2``.

    The row-index register is traced out and the column label kept.
    """
    A = np.asarray(A)
    n = A.shape[1]
    phi = _column_state(A).reshape(n, A.shape[0])
    return phi @ phi.conj().T


def density_block_encoding(A) -> BlockEncoding:
    """Exact block encoding of ``A* A`` with ``alpha = ||A||_F^2``.

    Uses ``(G* (x) I) (SWAP (x) I) (G (x) I)`` with ``G |0> = |Phi>``.
    """
    A = np.asarray(A)
    m, n = A.shape
    phi = _column_state(A)
    d = n * m
    M = np.eye(d, dtype=phi.dtype)
    M[:, 0] = phi
    Q, R = np.linalg.qr(M)
    G = Q.copy()
    G[:, 0] *= R[0, 0]
    # registers (keep a: n, env b: m, system s: n); swap a <-> s
    perm = np.arange(n * m * n).reshape(n, m, n).transpose(2, 1, 0).reshape(-1)
    swap = np.eye(n * m * n)[perm]
    Gs = np.kron(G, np.eye(n))
    U = Gs.conj().T @ swap @ Gs
    frob2 = float(np.linalg.norm(A) ** 2)
    return BlockEncoding(U, n, (n, n), frob2, 0.0, "gram")


@dataclass(frozen=True)
class InversePolynomial:
    """Odd polynomial ``p`` with ``|p(x) - 1/(kappa x)| <= eps`` on ``1/kappa <= |x| <= 1``.

    ``|p| <= 1`` on ``|x| <= 1/(2 kappa)``; inside the transition band
    ``1/(2 kappa) < |x| < 1/kappa`` it is only held below ``1/(kappa |x|)``,
    so ``sup_norm`` (over [-1, 1]) may exceed 1 by up to a factor 2.
    ``coeffs`` are Chebyshev coefficients (even ones are zero).  When a
    ``floor`` above ``1/kappa`` is given the window becomes ``[floor, 1]``
    and the band ``(floor/2, floor)``; with ``kappa * floor >= 2`` the
    polynomial is bounded by 1 everywhere.
    """

    coeffs: np.ndarray
    kappa: float
    eps: float
    max_error: float
    sup_norm: float
    floor: float = 0.0

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        return cheb.chebval(x, self.coeffs)


MAX_DEGREE = 801


def _cheb_points(a: float, b: float, n: int) -> np.ndarray:
    t = np.cos(np.pi * (np.arange(n) + 0.5) / n)
    return np.concatenate([[a, b], (a + b) / 2 + (b - a) / 2 * t])


def _odd_basis(x: np.ndarray, degree: int) -> np.ndarray:
    return cheb.chebvander(x, degree)[:, 1::2]


def _fit_odd(kappa: float, degree: int, floor: float | None = None):
    """Minimax LP for the window error under the boundedness constraints."""
    n_pts = max(1000, 4 * degree)
    lo = 1 / kappa if floor is None else floor
    xw = _cheb_points(lo, 1.0, n_pts)
    xb = _cheb_points(0.0, lo / 2, n_pts)
    xm = _cheb_points(lo / 2, lo, n_pts)
    Vw, Vb, Vm = (_odd_basis(x, degree) for x in (xw, xb, xm))
    target = 1 / (kappa * xw)
    cap = 1 / (kappa * xm)
    nc = Vw.shape[1]
    col = lambda n, v: np.full((n, 1), v)  # noqa: E731
    A_ub = np.vstack([
        np.hstack([Vw, col(len(xw), -1)]), np.hstack([-Vw, col(len(xw), -1)]),
        np.hstack([Vb, col(len(xb), 0)]), np.hstack([-Vb, col(len(xb), 0)]),
        np.hstack([Vm, col(len(xm), 0)]), np.hstack([-Vm, col(len(xm), 0)]),
    ])
    # margin absorbs overshoot between grid points; this region is never pinned by the target
    b_ub = np.concatenate([target, -target, np.full(2 * len(xb), 1 - 1e-3), cap, cap])
    cost = np.zeros(nc + 1)
    cost[-1] = 1
    res = linprog(
        cost, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * nc + [(0, None)], method="highs",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status != 0:
        return None
    coeffs = np.zeros(degree + 1)
    coeffs[1::2] = res.x[:nc]
    return coeffs


def _verify(coeffs: np.ndarray, kappa: float, floor: float | None = None, points: int = 10_000):
    """Window sup-error, sup below half the floor and sup over [0, 1]."""
    lo = 1 / kappa if floor is None else floor
    x = np.linspace(lo, 1, points)
    err = float(np.max(np.abs(cheb.chebval(x, coeffs) - 1 / (kappa * x))))
    low = float(np.max(np.abs(cheb.chebval(np.linspace(0, lo / 2, points), coeffs))))
    sup = float(np.max(np.abs(cheb.chebval(np.linspace(0, 1, 4 * points), coeffs))))
    return err, low, sup


def _attempt(kappa, eps, degree, floor=None):
    """``(polynomial or None, window error)`` for one degree."""
    coeffs = _fit_odd(kappa, degree, floor)
    if coeffs is None:
        return None, math.inf
    err, low, sup = _verify(coeffs, kappa, floor)
    if err > eps or low > 1:
        return None, err
    return InversePolynomial(coeffs, kappa, eps, err, sup, 1 / kappa if floor is None else floor), err


def _accept(kappa, eps, degree, floor=None):
    return _attempt(kappa, eps, degree, floor)[0]


@lru_cache(maxsize=128)
def inverse_polynomial(kappa: float, eps: float, floor: float | None = None) -> InversePolynomial:
    """Lowest-degree odd polynomial found approximating ``1/(kappa x)`` to ``eps``.

    Coefficients come from a minimax linear program on Chebyshev grids
    (minimise the window error subject to the bounds described in
    :class:`InversePolynomial`); acceptance is checked on a 10^4-point grid
    of ``[1/kappa, 1]``.  Odd symmetry holds exactly since only odd
    Chebyshev terms are used.
    """
    kappa, eps = float(kappa), float(eps)
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    if floor is not None and not 1 / kappa <= floor <= 1:
        raise ValueError("floor must lie in [1/kappa, 1]")
    lo, hi = 0, 1  # odd degrees 2j+1, search over j
    best = _accept(kappa, eps, 1, floor)
    if best is not None:
        return best
    best, err = _attempt(kappa, eps, 3, floor)
    while best is None:
        lo, hi = hi, hi * 2
        if 2 * hi + 1 > MAX_DEGREE:
            raise ValueError(f"no polynomial of degree <= {MAX_DEGREE} reaches eps={eps} for kappa={kappa}")
        prev = err
        best, err = _attempt(kappa, eps, 2 * hi + 1, floor)
        if best is None and hi >= 32 and err > 0.5 * prev:
            # doubling the degree no longer helps: the LP has hit its precision floor
            raise ValueError(f"eps={eps} is out of reach for kappa={kappa}: window error stalled at {err:.2e}")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        cand = _accept(kappa, eps, 2 * mid + 1, floor)
        if cand is not None:
            hi, best = mid, cand
        else:
            lo = mid
    return best


def rescaled_degree(kappa: float, eps: float, frob: float) -> int:
    """Degree needed when the accuracy target is tightened to ``eps / frob``."""
    return inverse_polynomial(float(kappa), eps / frob).degree


def invert_rescaled(e: BlockEncoding, kappa_eff: float | None = None, eps: float = 1e-6) -> BlockEncoding:
    """Encode ``A^+`` with ``alpha = kappa_eff`` from an encoding of ``A / ||A||_F``.

    Parameters
    ----------
    e : BlockEncoding
        Encodes ``A`` with ``alpha = ||A||_F`` (as from
        ``encode_dense(A, alpha=||A||_F)``).
    kappa_eff : float, optional
        Nonzero singular values of ``A`` must be at least ``1 / kappa_eff``
        and at most ``||A||_F``.  Defaults to the smallest valid value,
        ``max(sigma_max, 1) / sigma_min``.
    eps : float
        Relative accuracy: ``||alpha * block - A^+|| <= eps ||A^+||``.

    The odd polynomial is applied to the singular values of the block by
    dense SVD; zero singular values stay zero, giving the pseudo-inverse.
    """
    B = e.U[: e.system_dim, : e.system_dim]
    U, s, Vh = np.linalg.svd(B)
    nz = s > 1e-10 * s[0] if s[0] > 0 else np.zeros_like(s, dtype=bool)
    if not nz.any():
        raise ValueError("cannot invert the zero matrix")
    frob = e.alpha
    sig = s[nz] * frob  # singular values of A
    if kappa_eff is None:
        kappa_eff = max(sig.max(), 1.0) / sig.min()
    floor = 1 / kappa_eff
    if sig.min() < floor * (1 - 1e-12):
        raise ValueError(f"singular value {sig.min():.6g} below the window floor {floor:.6g}")
    window = frob * kappa_eff
    eps_poly = min(eps / (kappa_eff * sig.min()), 0.25)
    # fit only where the spectrum lives; this keeps |p| <= 1 when sigma_max >= 2
    poly = inverse_polynomial(float(window), float(eps_poly), float(min(sig.min() / frob, 1.0)))
    ps = np.where(nz, poly(s), 0.0)
    block = (Vh.conj().T * ps) @ U.conj().T
    m, n = e.block_shape
    out = encode_dense(block[:n, :m], alpha=1.0, dim=e.system_dim)
    out.alpha = float(kappa_eff)
    out.error = poly.max_error
    out.block_shape = (n, m)
    out.label = f"inv({e.label})"
    out.meta = {"degree": poly.degree, "window_kappa": window, "poly_eps": eps_poly, "sup_norm": poly.sup_norm}
    return out


def cohomology_chain(H, eps: float = 1e-7):
    """Compose ``e(P/||P||_F) e(A^+/kappa) e(C/||C||_F)`` for a Hodge system.

    Returns the final encoding, the per-step trace ``[(label, encoding)]``
    and the relative error of ``alpha * block`` against ``P A^+ C``.
    """
    if not H.has_coexact:
        raise ValueError("degree has no coexact block")
    A, C, P = H.A.toarray(), H.C.toarray(), H.P.toarray()
    N = max(A.shape[0], C.shape[1])
    fa, fc, fp = (np.linalg.norm(M) for M in (A, C, P))
    eC = encode_dense(C, alpha=fc, dim=N, label="C/|C|_F")
    eA = encode_dense(A, alpha=fa, dim=N, label="A/|A|_F")
    s = np.linalg.svd(A, compute_uv=False)
    s = s[s > 1e-10 * s[0]]
    kappa = float(s[0] / s[-1])
    eInv = invert_rescaled(eA, kappa_eff=kappa if s[0] >= 1 else None, eps=eps)
    eP = encode_dense(P, alpha=fp, dim=N, label="P/|P|_F")
    eInvC = product(eInv, eC)
    eAll = product(eP, eInvC)
    trace = [("C/|C|_F", eC), ("A/|A|_F", eA), ("A^+/kappa", eInv), ("P/|P|_F", eP),
             ("A^+ C", eInvC), ("P A^+ C", eAll)]
    classical = P @ np.linalg.pinv(A, rcond=1e-10) @ C
    rel = float(np.linalg.norm(eAll.matrix - classical, 2) / np.linalg.norm(classical, 2))
    return eAll, trace, rel
