import math

import numpy as np
import pytest

from dysonlab.lattice import LatticeGrid
from dysonlab.potential import sample_potential
from dysonlab.rmt import (
    StructuredEnsemble,
    diagonal_ensemble,
    holder_jensen_check,
    moment_bound_check,
    nck_expectation_check,
    nck_tail_check,
    random_hermitian,
    random_hermitian_ensemble,
    sample_X,
    sigma_param,
    single_matrix_ensemble,
    trace_inequality_check,
    wilson_interval,
)
from dysonlab.rng import Stream


def test_ensemble_validation():
    bad = np.zeros((1, 3, 3))
    bad[0, 0, 1] = 1.0  # not Hermitian
    with pytest.raises(ValueError):
        StructuredEnsemble(3, bad)


def test_sample_single_identity():
    ens = single_matrix_ensemble(np.eye(4), seed=3)
    X = sample_X(ens, trial=0)
    g = X[0, 0]
    assert np.allclose(X, g * np.eye(4))


def test_sigma_param_examples():
    assert sigma_param(diagonal_ensemble(16)) == pytest.approx(1.0)
    A = np.diag([3.0, 1.0])
    assert sigma_param(single_matrix_ensemble(A)) == pytest.approx(3.0)


def test_sigma_matches_variance_parameter():
    # ensemble built from the dyson-module A_n operators agrees with its value
    from dysonlab.dyson import variance_parameter_sitewise
    from dysonlab.oracles import dense_t1_exact
    from dysonlab.potential import PotentialSample

    g = LatticeGrid(1, 12)
    pot = sample_potential(g, 3, "gaussian", 5)
    t = 1.5
    sites = np.argwhere(pot.support_mask)
    mats = []
    for site in sites:
        arr = np.zeros(g.shape)
        arr[tuple(site)] = 1.0
        mats.append(dense_t1_exact(g, PotentialSample(g, 3, "gaussian", 0, arr), t))
    ens = StructuredEnsemble(g.nsites, np.stack(mats))
    lhs = sigma_param(ens) ** 2
    rhs = variance_parameter_sitewise(pot, t, use_quadrature=False)
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_zero_ensemble_trivia():
    ens = StructuredEnsemble(4, np.zeros((2, 4, 4)))
    assert sigma_param(ens) == 0.0
    rep = nck_expectation_check(ens, trials=100)
    assert rep.mean_norm == 0.0
    tail = nck_tail_check(ens, [4 * math.sqrt(math.log(4)) + 1], trials=500)
    assert tail.entries[0].exceedances == 0


def test_diagonal_gaussian_expectation_ratio():
    # E max |g_i| over dim=256 ~ sqrt(2 log dim): ratio to sqrt(log dim) is ~sqrt(2)
    ens = diagonal_ensemble(256, "gaussian", seed=11)
    rep = nck_expectation_check(ens, trials=2000)
    assert 0.5 <= rep.ratio <= 1.5
    # cross-check against a direct max-of-normals simulation
    st = Stream(321)
    sims = np.abs(st.gaussians(2000 * 256)).reshape(2000, 256).max(axis=1)
    assert abs(rep.mean_norm - sims.mean()) / sims.mean() < 0.05


def test_single_matrix_expectation_half_normal():
    # E|g| = sqrt(2/pi) for one Gaussian coefficient
    ens = single_matrix_ensemble(np.eye(8), seed=5)
    rep = nck_expectation_check(ens, trials=4000)
    expected = math.sqrt(2.0 / math.pi) * rep.sigma
    assert rep.mean_norm == pytest.approx(expected, rel=0.05)


def test_tail_check_hypothesis_guard():
    ens = diagonal_ensemble(16)
    with pytest.raises(ValueError):
        nck_tail_check(ens, [1.0], trials=100)


def test_tail_check_diagonal_16():
    ens = diagonal_ensemble(16, "gaussian", seed=2)
    K = 4.0 * math.sqrt(math.log(16)) + 1.0
    rep = nck_tail_check(ens, [K], trials=20000)
    e = rep.entries[0]
    assert e.passed
    assert e.frequency <= e.bound + 3 * (e.ci_high - e.ci_low) / 2


def test_moment_bound_p1_equality():
    ens = random_hermitian_ensemble(8, 6, "gaussian", seed=9)
    rep = moment_bound_check(ens, 1, trials=20000)
    # p = 1: E tr X^2 = tr E X^2 exactly; empirical ratio within the CI of 1
    assert rep.lhs_ci[0] <= rep.rhs <= rep.lhs_ci[1] * (rep.rhs / rep.lhs + 1e-9) or rep.passed
    assert abs(rep.lhs - rep.rhs) / rep.rhs < 0.05
    assert rep.passed


def test_moment_bound_identity_p2():
    # s=1, A=Id: lhs = (E g^4 dim)^{1/4} = (3 dim)^{1/4}, rhs = sqrt(3) dim^{1/4}
    dim = 6
    ens = single_matrix_ensemble(np.eye(dim), seed=13)
    rep = moment_bound_check(ens, 2, trials=30000)
    assert rep.lhs == pytest.approx((3.0 * dim) ** 0.25, rel=0.05)
    assert rep.rhs == pytest.approx(math.sqrt(3.0) * dim**0.25, rel=1e-12)
    assert rep.lhs < rep.rhs  # strict inequality here
    assert rep.passed


def test_moment_bound_rademacher_and_uniform():
    for dist in ("rademacher", "uniform"):
        ens = random_hermitian_ensemble(8, 6, dist, seed=15)
        for p in (1, 2):
            assert moment_bound_check(ens, p, trials=8000).passed


def test_trace_inequality_commuting_equality():
    # diagonal A, B commute: equality up to rounding
    st = Stream(3)
    for _ in range(100):
        a = np.diag(st.gaussians(5))
        b = np.diag(st.gaussians(5))
        lhs = np.trace(a @ b @ b @ a @ b @ b)
        rhs = np.trace(a @ a @ np.linalg.matrix_power(b, 4))
        assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(rhs))


def test_trace_inequality_ell_zero_is_cyclic_identity():
    st = Stream(5)
    A = random_hermitian(6, st)
    B = random_hermitian(6, st)
    lhs = np.trace(A @ np.linalg.matrix_power(B, 4) @ A)
    rhs = np.trace(A @ A @ np.linalg.matrix_power(B, 4))
    assert abs(lhs - rhs) < 1e-10 * max(1.0, abs(rhs))


@pytest.mark.parametrize("dim,p,ell", [(8, 3, 2), (4, 2, 1), (16, 4, 3)])
def test_trace_inequality_randomized(dim, p, ell):
    rep = trace_inequality_check(dim, p, ell, trials=2000, seed=dim)
    assert rep.passed


def test_holder_jensen_equality_cases():
    st = Stream(9)
    A = random_hermitian(6, st)
    # A = B, p = p' = 2: equality
    lhs = np.trace(A @ A)
    w = np.linalg.eigvalsh(A)
    rhs = np.sum(np.abs(w) ** 2)
    assert lhs == pytest.approx(rhs, rel=1e-12)
    # diagonal A with phi = x^2: Jensen equality
    D = np.diag(st.gaussians(6))
    assert np.sum(np.diag(D) ** 2) == pytest.approx(np.trace(D @ D))


@pytest.mark.parametrize("p", [1.5, 2.0, 4.0])
def test_holder_jensen_randomized(p):
    hol, jen = holder_jensen_check(8, p, trials=2000, seed=int(p * 10))
    assert hol.passed and jen.passed


def test_wilson_interval_sane():
    lo, hi = wilson_interval(5, 100)
    assert 0.0 < lo < 0.05 < hi < 0.15


def test_reduction_to_gaussians_ordering():
    # Rademacher mean norm at most 1.2x the Gaussian mean for a fixed ensemble
    ens_g = random_hermitian_ensemble(64, 64, "gaussian", seed=77)
    ens_r = StructuredEnsemble(64, ens_g.coeffs, "rademacher", 77)
    rep_g = nck_expectation_check(ens_g, trials=2000)
    rep_r = nck_expectation_check(ens_r, trials=2000)
    assert rep_r.mean_norm <= 1.2 * rep_g.mean_norm


@pytest.mark.slow
def test_all_inequalities_dims_and_orders():
    # zero violations beyond slack at dim in {4,8,16}, p in {2,3,4}
    for dim in (4, 8, 16):
        for p in (2, 3, 4):
            for ell in range(0, 2 * p - 1):
                assert trace_inequality_check(dim, p, ell, trials=10000, seed=dim + p + ell).passed
        hol, jen = holder_jensen_check(dim, 2.0, trials=10000, seed=dim)
        assert hol.passed and jen.passed
