import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import chebyshev as C

from hodgebetti.rank_tools import (
    StochasticRankConfig,
    default_probes,
    exact_rank,
    hutchinson_trace,
    spectral_upper_bound,
    step_coefficients,
    step_degree,
    step_error,
    stochastic_rank,
)


def _projector(k=10, n=100, rotate=False):
    P = np.diag(np.r_[np.ones(k), np.zeros(n - k)])
    if rotate:
        Q = np.linalg.qr(np.random.default_rng(0).standard_normal((n, n)))[0]
        P = Q @ P @ Q.T
    return P


def test_exact_rank_examples():
    assert exact_rank(np.eye(10)) == 10
    assert exact_rank(np.zeros((4, 4))) == 0
    assert exact_rank(np.diag([1, 1, 1, 1e-14, 0]), 1e-8) == 3
    assert exact_rank(np.zeros((0, 3))) == 0


def test_exact_rank_with_external_scale():
    M = np.diag([1e-3, 1e-3])
    assert exact_rank(M, 1e-8, scale=1.0) == 2
    assert exact_rank(M, 1e-2, scale=1.0) == 0


def test_exact_rank_rejects_nan():
    with pytest.raises(ValueError):
        exact_rank(np.array([[np.nan]]))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.integers(0, 12), st.integers(0, 2**31))
def test_exact_rank_of_low_rank_products(m, n, k, seed):
    rng = np.random.default_rng(seed)
    k = min(k, m, n)
    M = rng.standard_normal((m, k)) @ rng.standard_normal((k, n))
    assert exact_rank(M) == k


def test_spectral_upper_bound_examples():
    assert spectral_upper_bound(lambda x: x, 5) == pytest.approx(1.01)
    b = spectral_upper_bound(lambda x: np.diag([4.0, 1, 1]) @ x, 3)
    assert 4 <= b <= 4.2
    v = np.array([2.0, 2.0, 1.0])
    b = spectral_upper_bound(lambda x: np.outer(v, v) @ x, 3)
    assert 9 <= b <= 9.2
    assert spectral_upper_bound(lambda x: 0 * x, 3) == 0.0


@pytest.mark.parametrize("gap, degree", [(0.5, 25), (0.1, 74), (0.01, 247), (1e-3, 788)])
def test_step_degree_frozen(gap, degree):
    assert step_degree(gap) == degree
    assert step_error(gap, degree) <= 0.01 < step_error(gap, degree - 1)


@pytest.mark.parametrize("gap", [0.5, 0.2, 0.1, 0.05, 0.01])
def test_step_error_at_reference_degree(gap):
    # degree 3 / gap * log(100) always suffices; the true requirement grows like 1 / sqrt(gap)
    assert step_error(gap, math.ceil(3 / gap * math.log(100))) <= 0.01


def test_step_polynomial_is_bounded():
    c = step_coefficients(0.01, 300)
    t = np.linspace(0, 1, 20001)
    vals = C.chebval(2 * t - 1, c)
    assert vals.min() > -0.01 and vals.max() < 1.01


def test_damping_beats_plain_truncation():
    gap, deg = 0.05, 120
    t = np.r_[np.linspace(0, gap / 2, 5000), np.linspace(gap, 1, 5000)]
    target = (t >= gap).astype(float)
    plain = np.abs(C.chebval(2 * t - 1, step_coefficients(gap, deg, damping=False)) - target).max()
    assert step_error(gap, deg) < plain


def test_hutchinson_identity_is_exact():
    mean, err = hutchinson_trace(lambda X: X, 16, np.array([1.0]), 30)
    assert mean == 16.0 and err == 0.0


@pytest.mark.parametrize("seed", range(5))
def test_hutchinson_unbiased_on_small_psd(seed):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((5, 5))
    M = G @ G.T
    scale = np.linalg.eigvalsh(M).max() * 1.01
    coeffs = rng.standard_normal(6)
    lam = np.linalg.eigvalsh(M) / scale
    exact = C.chebval(2 * lam - 1, coeffs).sum()
    mean, err = hutchinson_trace(lambda X: M @ X, 5, coeffs, 4000, seed=seed, scale=scale)
    assert abs(mean - exact) <= 3 * err


def test_hutchinson_is_deterministic_per_seed():
    M = np.diag(np.linspace(0, 1, 20))
    c = step_coefficients(0.3, 40)
    a = hutchinson_trace(lambda X: M @ X, 20, c, 100, seed=3, block=7)
    b = hutchinson_trace(lambda X: M @ X, 20, c, 100, seed=3, block=7)
    assert a == b


@pytest.mark.parametrize("rotate", [False, True], ids=["diagonal", "rotated"])
def test_projector_accuracy_over_seeds(rotate):
    P = _projector(rotate=rotate)
    hits = 0
    for seed in range(100):
        cfg = StochasticRankConfig(gap=0.5, n_probes=200, cheb_degree=80, seed=seed)
        est = stochastic_rank(lambda X: P @ X, 100, cfg, scale=1.0)
        hits += abs(est - 0.10) <= 0.02
    assert hits >= 95


def test_identity_and_zero():
    cfg = StochasticRankConfig(gap=0.5, n_probes=50, cheb_degree=80)
    assert stochastic_rank(lambda X: X, 64, cfg, scale=1.01) == pytest.approx(1.0, abs=0.02)
    assert stochastic_rank(lambda X: 0 * X, 64, cfg, scale=1.0) == pytest.approx(0.0, abs=0.02)


def test_diagonal_projector_has_no_rademacher_variance():
    P = _projector()
    ests = {stochastic_rank(lambda X: P @ X, 100, StochasticRankConfig(0.5, 3, 80, seed=s), 1.0) for s in range(5)}
    assert max(ests) - min(ests) < 1e-12


def test_variance_decays_like_inverse_probes():
    # a rotated projector: the diagonal one is estimated exactly by sign probes
    P = _projector(rotate=True)
    probes = [10, 30, 100, 300, 1000]
    variances = []
    for n in probes:
        est = [stochastic_rank(lambda X: P @ X, 100, StochasticRankConfig(0.5, n, 80, seed=s), 1.0)
               for s in range(60)]
        variances.append(np.var(est, ddof=1))
    slope = np.polyfit(np.log(probes), np.log(variances), 1)[0]
    assert -1.2 <= slope <= -0.8


def test_low_degree_warns_with_bias():
    with pytest.warns(UserWarning, match="bias"):
        stochastic_rank(lambda X: X, 8, StochasticRankConfig(gap=0.1, n_probes=5, cheb_degree=10), 1.01)


def test_matvec_errors_propagate():
    def boom(X):
        raise RuntimeError("matvec failed")

    with pytest.raises(RuntimeError, match="matvec"):
        stochastic_rank(boom, 4, StochasticRankConfig(gap=0.5, n_probes=2, cheb_degree=30), 1.0)


@pytest.mark.parametrize("kwargs", [dict(gap=0), dict(gap=1), dict(n_probes=0), dict(epsilon=1.5)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        StochasticRankConfig(**kwargs)


def test_default_probes():
    assert default_probes(192, 0.05) == 17
    assert default_probes(10_000, 0.05) == 10
