import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hodgebetti.dec_geometry import build_hodge_system
from hodgebetti.qsvt_sim import (
    cohomology_chain,
    density_block_encoding,
    encode_dense,
    gram_encoding,
    hermitian_dilation,
    inverse_polynomial,
    invert_rescaled,
    linear_combination,
    product,
    rescaled_degree,
    scale_down,
    tensor,
)


def _contraction(rng, m, n=None, norm=0.9):
    A = rng.standard_normal((m, n or m))
    return norm * A / np.linalg.norm(A, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def test_encode_half_identity():
    e = encode_dense(0.5 * np.eye(2))
    assert e.U.shape == (4, 4) and e.alpha == 1.0
    np.testing.assert_allclose(e.block, 0.5 * np.eye(2))
    e.check(0.5 * np.eye(2))


def test_unitary_encodes_itself(rng):
    V = np.linalg.qr(rng.standard_normal((3, 3)))[0]
    e = encode_dense(V)
    assert np.array_equal(e.U, V) and e.ancilla_dim == 1


def test_encode_random_contraction(rng):
    A = _contraction(rng, 3)
    e = encode_dense(A)
    assert np.linalg.norm(e.block - A, 2) <= 1e-12
    assert e.unitarity_error() <= 1e-12


def test_encode_complex_and_rectangular(rng):
    A = _contraction(rng, 2, 3) * (1 + 0.5j)
    A /= np.linalg.norm(A, 2) * 1.1
    e = encode_dense(A)
    assert e.block_shape == (2, 3) and e.system_dim == 3
    e.check(A)


def test_encode_rejects_large_norm():
    with pytest.raises(ValueError, match=">= 1"):
        encode_dense(np.eye(2) * 1.0 + 0.1)
    with pytest.raises(ValueError, match="exceeds alpha"):
        encode_dense(3 * np.eye(2), alpha=2.0)


def test_encode_with_alpha(rng):
    A = rng.standard_normal((4, 4))
    e = encode_dense(A, alpha=np.linalg.norm(A))
    np.testing.assert_allclose(e.matrix, A, atol=1e-12)


def test_product_identity():
    e = encode_dense(np.eye(2) * 0.999999)
    np.testing.assert_allclose(product(e, e).block, 0.999999**2 * np.eye(2))


def test_product_of_contractions(rng):
    A, B = _contraction(rng, 3), _contraction(rng, 3)
    e = product(encode_dense(A, alpha=2.0), encode_dense(B, alpha=3.0))
    assert e.alpha == 6.0
    assert np.linalg.norm(e.matrix - A @ B, 2) <= 1e-10
    e.check(A @ B)


def test_product_rectangular_chain(rng):
    A, B = _contraction(rng, 2, 4), _contraction(rng, 4, 3)
    e = product(encode_dense(A, dim=4), encode_dense(B, dim=4))
    assert e.block_shape == (2, 3)
    e.check(A @ B)


def test_product_dimension_mismatch(rng):
    with pytest.raises(ValueError):
        product(encode_dense(_contraction(rng, 2, 3), dim=3), encode_dense(_contraction(rng, 2, 3), dim=3))


def test_lcu_examples(rng):
    A = _contraction(rng, 2)
    e = encode_dense(A)
    np.testing.assert_allclose(linear_combination([e, e]).block, A, atol=1e-12)
    np.testing.assert_allclose(linear_combination([e, e], [1, -1]).block, 0, atol=1e-12)
    A1, A2, A3 = (_contraction(rng, 2) for _ in range(3))
    lcu = linear_combination([encode_dense(M) for M in (A1, A2, A3)], [1, -1, 1])
    assert np.linalg.norm(lcu.block - (A1 - A2 + A3) / 3, 2) <= 1e-10
    lcu.check()


def test_lcu_aligns_alphas(rng):
    A, B = _contraction(rng, 2), _contraction(rng, 2)
    lcu = linear_combination([encode_dense(A, alpha=1.0), encode_dense(B, alpha=4.0)])
    assert lcu.alpha == 8.0
    np.testing.assert_allclose(lcu.matrix, A + B, atol=1e-12)


def test_lcu_rejects_empty_and_bad_signs(rng):
    with pytest.raises(ValueError):
        linear_combination([])
    with pytest.raises(ValueError):
        linear_combination([encode_dense(_contraction(rng, 2))], [2])


def test_scale_down_examples(rng):
    e = scale_down(encode_dense(0.4 * np.eye(2)), 2)
    np.testing.assert_allclose(e.block, 0.2 * np.eye(2), atol=1e-15)
    assert e.alpha == 2.0
    A = _contraction(rng, 3)
    e = scale_down(encode_dense(A), 3.7)
    assert np.linalg.norm(e.block - A / 3.7, 2) <= 1e-12
    e.check()


def test_scale_down_composes(rng):
    A = _contraction(rng, 2)
    twice = scale_down(scale_down(encode_dense(A), 1.5), 2.0)
    once = scale_down(encode_dense(A), 3.0)
    np.testing.assert_allclose(twice.block, once.block, atol=1e-14)
    assert twice.alpha == pytest.approx(once.alpha)


def test_scale_down_rejects_small_factor(rng):
    with pytest.raises(ValueError):
        scale_down(encode_dense(_contraction(rng, 2)), 1.0)


def test_tensor_of_encodings(rng):
    A, B = _contraction(rng, 2), _contraction(rng, 3)
    e = tensor(encode_dense(A, alpha=2.0), encode_dense(B))
    np.testing.assert_allclose(e.matrix, np.kron(A, B), atol=1e-12)
    e.check()


def test_hermitian_dilation():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    D = hermitian_dilation(A)
    assert D.shape == (4, 4) and np.count_nonzero(D) == 2 and D[0, 3] == D[3, 0] == 1


def test_hermitian_dilation_spectrum_and_norm(rng):
    A = rng.standard_normal((2, 3))
    D = hermitian_dilation(A)
    s = np.linalg.svd(A, compute_uv=False)
    ev = np.sort(np.linalg.eigvalsh(D))
    np.testing.assert_allclose(ev, np.sort(np.r_[s, -s, 0.0]), atol=1e-12)
    assert np.linalg.norm(D) / np.linalg.norm(A) == pytest.approx(math.sqrt(2), abs=1e-14)


def test_gram_encoding(rng):
    assert np.allclose(gram_encoding(np.eye(4)), np.eye(4) / 4)
    A = rng.standard_normal((3, 3))
    G = gram_encoding(A)
    assert np.trace(G) == pytest.approx(1.0)
    assert np.linalg.norm(G - A.T @ A / np.linalg.norm(A) ** 2) <= 1e-12
    with pytest.raises(ValueError):
        gram_encoding(np.zeros((2, 2)))


def test_density_block_encoding(rng):
    A = rng.standard_normal((3, 2))
    e = density_block_encoding(A)
    assert e.alpha == pytest.approx(np.linalg.norm(A) ** 2)
    e.check(A.T @ A, tol=1e-12)


def test_inverse_polynomial_kappa_one():
    for eps in (0.1, 1e-3):
        P = inverse_polynomial(1, eps)
        assert 1 - eps <= P(1.0) <= 1 + eps


@pytest.mark.parametrize("kappa, eps", [(2, 1e-3), (8, 1e-4)])
def test_inverse_polynomial_grid_error(kappa, eps):
    P = inverse_polynomial(kappa, eps)
    x = np.linspace(1 / kappa, 1, 10_000)
    assert np.abs(P(x) - 1 / (kappa * x)).max() <= eps
    assert np.abs(P(np.linspace(0, 0.5 / kappa, 10_000))).max() <= 1
    assert P.sup_norm <= 2


def test_inverse_polynomial_is_odd():
    P = inverse_polynomial(4, 1e-3)
    assert np.all(P.coeffs[::2] == 0)
    x = np.linspace(0, 1, 101)
    assert np.array_equal(P(-x), -P(x))


def test_inverse_polynomial_degree_scaling():
    ratios = [inverse_polynomial(k, 1e-3).degree / (k * math.log(1e3)) for k in (2, 4, 8, 16)]
    assert max(ratios) / min(ratios) <= 2


def test_inverse_polynomial_rejects_bad_input():
    with pytest.raises(ValueError):
        inverse_polynomial(0.5, 1e-3)
    with pytest.raises(ValueError):
        inverse_polynomial(2, 0.7)


def test_rescaled_degree_scaling():
    eps, kappa = 0.1, 4
    ratios = [rescaled_degree(kappa, eps, F) / (kappa * math.log(F / eps)) for F in (10, 100, 1000)]
    assert max(ratios) / min(ratios) <= 2


def test_invert_diagonal():
    A = np.diag([0.5, 0.25])
    out = invert_rescaled(encode_dense(A, alpha=np.linalg.norm(A)), eps=1e-6)
    assert out.alpha == 4.0
    assert np.linalg.norm(out.matrix - np.diag([2.0, 4.0]), 2) <= 1e-6 * 4
    out.check()


def test_invert_orthogonal(rng):
    Q = np.linalg.qr(rng.standard_normal((3, 3)))[0]
    out = invert_rescaled(encode_dense(Q, alpha=np.linalg.norm(Q)), eps=1e-6)
    assert np.linalg.norm(out.matrix - Q.T, 2) <= 1e-6


def test_invert_singular_tetra(tetra):
    A = build_hodge_system(tetra, 1).A.toarray()
    out = invert_rescaled(encode_dense(A, alpha=np.linalg.norm(A)), eps=1e-8)
    X = out.matrix
    assert np.linalg.norm(A @ X @ A - A, 2) <= 1e-8 * np.linalg.norm(A, 2)
    np.testing.assert_allclose(X, np.linalg.pinv(A), atol=1e-8 / 8)


def test_invert_rejects_out_of_window():
    A = np.diag([1.0, 0.01])
    with pytest.raises(ValueError, match="singular value"):
        invert_rescaled(encode_dense(A, alpha=np.linalg.norm(A)), kappa_eff=10.0)


def test_cohomology_chain_tetra(tetra):
    H = build_hodge_system(tetra, 1)
    final, trace, rel = cohomology_chain(H)
    assert rel <= 1e-6
    assert final.alpha == pytest.approx(H.scale_metadata()["N"], rel=1e-12)
    for _, e in trace:
        assert e.unitarity_error() <= 1e-12


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(0, 2**31))
def test_product_block_is_product_of_blocks(m, n, seed):
    r = np.random.default_rng(seed)
    k = max(m, n)
    A, B = _contraction(r, m, k), _contraction(r, k, n)
    e = product(encode_dense(A, dim=k), encode_dense(B, dim=k))
    assert e.unitarity_error() <= 1e-12
    assert np.linalg.norm(e.block - A @ B, 2) <= 1e-10


@settings(max_examples=15, deadline=None)
@given(st.lists(st.sampled_from([1, -1]), min_size=1, max_size=4), st.integers(0, 2**31))
def test_lcu_property(signs, seed):
    r = np.random.default_rng(seed)
    mats = [_contraction(r, 2) for _ in signs]
    lcu = linear_combination([encode_dense(M) for M in mats], signs)
    expected = sum(s * M for s, M in zip(signs, mats)) / len(signs)
    assert lcu.unitarity_error() <= 1e-12
    assert np.linalg.norm(lcu.block - expected, 2) <= 1e-10
