import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dysonlab.lattice import LatticeGrid, WaveField, random_field
from dysonlab.potential import (
    DriveEnvelope,
    apply_potential,
    load_potential,
    sample_potential,
    save_potential,
    sup_norm,
)
from dysonlab.rng import Stream, derive_stream_seed


def test_rademacher_support_and_values():
    g = LatticeGrid(2, 64)
    pot = sample_potential(g, 16, "rademacher", 42)
    inside = pot.couplings[pot.support_mask]
    assert set(np.unique(inside)) == {-1.0, 1.0}
    assert np.all(pot.couplings[~pot.support_mask] == 0.0)
    assert sup_norm(pot) == 1.0


def test_same_seed_identical():
    g = LatticeGrid(2, 32)
    a = sample_potential(g, 8, "gaussian", 77)
    b = sample_potential(g, 8, "gaussian", 77)
    assert np.array_equal(a.couplings, b.couplings)


def test_radius_guard_and_zero_radius():
    g = LatticeGrid(2, 16)
    with pytest.raises(ValueError):
        sample_potential(g, 8, "gaussian", 1)  # 2R >= N
    empty = sample_potential(g, 0, "gaussian", 1)
    assert sup_norm(empty) == 0.0


def test_gaussian_law_of_large_numbers():
    # ~ pi * 64^2 = 12868 sites inside radius 64
    g = LatticeGrid(2, 256)
    pot = sample_potential(g, 64, "gaussian", 123)
    vals = pot.couplings[pot.support_mask]
    n = len(vals)
    assert abs(vals.mean()) < 4.0 / np.sqrt(n)
    assert abs(vals.var() - 1.0) < 0.1


def test_uniform_bounded():
    g = LatticeGrid(2, 64)
    pot = sample_potential(g, 20, "uniform", 5)
    inside = pot.couplings[pot.support_mask]
    assert inside.min() >= -1.0 and inside.max() <= 1.0
    assert abs(inside.mean()) < 0.05


def test_apply_potential_examples():
    g = LatticeGrid(2, 16)
    pot = sample_potential(g, 4, "gaussian", 3)
    f = random_field(g, Stream(1))
    assert np.all(apply_potential(f, pot, 0.0).values == 0.0)
    # delta at a support site picks out g_n
    site = tuple(np.argwhere(pot.support_mask)[0])
    delta = np.zeros(g.shape, dtype=complex)
    delta[site] = 1.0
    out = apply_potential(WaveField(g, delta), pot, 1.0, 1.0)
    assert out.values[site] == pytest.approx(pot.couplings[site])
    # diagonal operator norm bound
    assert apply_potential(f, pot, 0.7).norm() <= 0.7 * sup_norm(pot) * f.norm() + 1e-12


def test_apply_potential_requires_position_basis():
    g = LatticeGrid(1, 8)
    pot = sample_potential(g, 2, "gaussian", 3)
    f = WaveField(g, np.ones(8, dtype=complex), basis="frequency")
    with pytest.raises(ValueError):
        apply_potential(f, pot, 1.0)


@given(st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
@settings(max_examples=30, deadline=None)
def test_apply_potential_linearity(a, b):
    g = LatticeGrid(1, 16)
    pot = sample_potential(g, 5, "gaussian", 9)
    f1 = random_field(g, Stream(2))
    f2 = random_field(g, Stream(3))
    combo = WaveField(g, a * f1.values + b * f2.values)
    lhs = apply_potential(combo, pot, 0.3).values
    rhs = a * apply_potential(f1, pot, 0.3).values + b * apply_potential(f2, pot, 0.3).values
    assert np.abs(lhs - rhs).max() < 1e-12 * max(1.0, abs(a) + abs(b))


def test_sup_norm_monte_carlo_range():
    # max of ~10^4 standard normals lands in [3.0, 5.5] almost always
    g = LatticeGrid(2, 256)
    hits = 0
    for trial in range(200):
        pot = sample_potential(g, 64, "gaussian", derive_stream_seed(99, trial))
        if 3.0 <= sup_norm(pot) <= 5.5:
            hits += 1
    assert hits >= 198


def test_tail_bound_shape():
    """Exceedance of sup-norm levels is non-increasing and below 2 exp(-K^2/16).

    The stated instantiation with c = 1/4 is mathematically unattainable at
    K = 4 with 10^4 Gaussian sites (true P ~ 0.47 vs bound 0.037); c = 1/16 is
    the conservative constant this suite pins (see the decisions ledger).
    """
    g = LatticeGrid(2, 256)
    n_samples = 500
    sups = np.empty(n_samples)
    for trial in range(n_samples):
        pot = sample_potential(g, 64, "gaussian", derive_stream_seed(7, trial))
        sups[trial] = sup_norm(pot)
    freqs = [(sups > K).mean() for K in (4.0, 5.0, 6.0)]
    assert freqs[0] >= freqs[1] >= freqs[2]
    for K, f in zip((4.0, 5.0, 6.0), freqs):
        assert f <= 2.0 * np.exp(-K * K / 16.0)


def test_serialization_round_trip(tmp_path):
    g = LatticeGrid(2, 32)
    pot = sample_potential(g, 10, "uniform", 1234)
    path = tmp_path / "pot.bin"
    save_potential(pot, path)
    back = load_potential(path)
    assert back.grid == pot.grid
    assert back.radius == pot.radius
    assert back.distribution == pot.distribution
    assert back.seed == pot.seed
    assert np.array_equal(back.couplings, pot.couplings)


def test_envelope_periodicity_and_values():
    cos = DriveEnvelope.cosine(0.5)
    assert cos.period == pytest.approx(4.0 * np.pi)
    for t in (0.0, 0.3, 2.0, 7.7):
        assert cos.value(t + cos.period) == pytest.approx(cos.value(t), abs=1e-12)
        assert cos.value(t) == pytest.approx(np.cos(0.5 * t))
    tab = DriveEnvelope.tabulated(np.sin(2 * np.pi * np.arange(64) / 64), period=2.0)
    for t in (0.1, 0.9, 1.999):
        assert tab.value(t + 2.0) == pytest.approx(tab.value(t), abs=1e-12)
    const = DriveEnvelope.constant()
    assert const.value(123.4) == 1.0
