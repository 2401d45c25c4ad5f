"""Smooth spectral windows via Fourier quadrature of propagators, circle
filters for period maps, approximate-eigenstate extraction, and frequency
localization diagnostics.

The window profile rho is the convolution of the indicator of [-3/4, 3/4]
with a standard mollifier of width 1/4, so rho = 1 on [-1/2, 1/2] and
rho = 0 outside [-1, 1] exactly.  rho_{delta,E}(A) is realized as
delta * int rho_hat(delta t) exp(it(A-E)) dt, truncated where the cached
tail integral of rho_hat drops below the requested budget.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.integrate

from .lattice import (
    FREQUENCY,
    POSITION,
    LatticeGrid,
    WaveField,
    dispersion_multiplier,
    random_field,
    to_frequency,
    to_position,
)
from .potential import PotentialSample, sup_norm
from .evolve import EvolutionConfig, evolve
from .dyson import NormEstimate, OperatorHandle, operator_norm
from .rng import Stream


def _mollifier(y: np.ndarray) -> np.ndarray:
    """Bump of width 1/4: c * exp(-1/(1-(4y)^2)) on |y| < 1/4, unit mass."""
    y = np.asarray(y, dtype=np.float64)
    out = np.zeros_like(y)
    u = 4.0 * y
    inside = np.abs(u) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return out / _MOLL_MASS


@lru_cache(maxsize=1)
def _moll_mass() -> float:
    grid = np.linspace(-0.25, 0.25, 1 << 14 | 1)
    u = 4.0 * grid
    vals = np.zeros_like(grid)
    inside = np.abs(u) < 1.0
    vals[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return float(scipy.integrate.simpson(vals, x=grid))


_MOLL_MASS = _moll_mass()


class BumpFunction:
    """Even smooth profile: 1 on [-1/2, 1/2], 0 outside [-1, 1]."""

    def __init__(self, cdf_points: int = (1 << 16) + 1, umax: float = 600.0, du: float = 0.05):
        ys = np.linspace(-0.25, 0.25, cdf_points)
        self._ys = ys
        self._cdf = scipy.integrate.cumulative_simpson(_mollifier(ys), x=ys, initial=0.0)
        self._cdf /= self._cdf[-1]
        self._umax = umax
        ugrid = np.arange(0.0, umax + du, du)
        self._ugrid = ugrid
        self._abs_hat = np.abs(self.rho_hat(ugrid))
        # integral of |rho_hat| from u to the grid end, trapezoid on the grid,
        # plus a geometric extrapolation of the beyond-grid mass
        tail = np.concatenate([[0.0], np.cumsum(0.5 * du * (self._abs_hat[1:] + self._abs_hat[:-1]))])
        a_end = max(float(np.max(self._abs_hat[-200:])), 1e-300)
        a_mid = max(float(np.max(self._abs_hat[-400:-200])), a_end)
        ratio = min(a_end / a_mid, 0.999)
        beyond = a_end * (200 * du) / (1.0 - ratio)
        self._tail_from = (tail[-1] - tail) + beyond

    def rho(self, x):
        scalar = np.isscalar(x) or np.ndim(x) == 0
        x = np.abs(np.atleast_1d(np.asarray(x, dtype=np.float64)))
        out = np.ones_like(x)
        out[x >= 1.0] = 0.0
        band = (x > 0.5) & (x < 1.0)
        out[band] = 1.0 - np.interp(x[band] - 0.75, self._ys, self._cdf)
        return float(out[0]) if scalar else out

    def rho_hat(self, u):
        """(2 pi)^-1 FT of rho; real and even, rho(x) = int rho_hat(u) e^{iux} du."""
        scalar = np.isscalar(u) or np.ndim(u) == 0
        u = np.atleast_1d(np.asarray(u, dtype=np.float64))
        chi = np.where(np.abs(u) < 1e-9, 1.5, 2.0 * np.sin(0.75 * u) / np.where(u == 0, 1.0, u))
        x, w = np.polynomial.legendre.leggauss(512)
        ys = 0.25 * x
        ws = 0.25 * w
        phi = _mollifier(ys)
        moll_hat = np.cos(np.outer(u, ys)) @ (ws * phi)
        out = chi * moll_hat / (2.0 * np.pi)
        return float(out[0]) if scalar else out

    def tail_bound(self, u: float) -> float:
        """|rho_hat| envelope read off the cached grid."""
        i = min(int(abs(u) / (self._ugrid[1] - self._ugrid[0])), len(self._abs_hat) - 1)
        return float(self._abs_hat[i:].max())

    def t_cut(self, eps: float) -> float:
        """Smallest cached T with int_{|u|>T} |rho_hat| < eps."""
        ok = 2.0 * self._tail_from < eps
        if not np.any(ok):
            raise ValueError(f"truncation budget eps={eps} unreachable (tail grid too short)")
        return float(self._ugrid[int(np.argmax(ok))])


@lru_cache(maxsize=1)
def default_bump() -> BumpFunction:
    return BumpFunction()


# ---------------------------------------------------------------------------
# energy projections


class TimeEvolver:
    """Advances a field by exp(i dt A) for the operator A it represents."""

    def advance(self, field: WaveField, dt: float) -> WaveField:
        raise NotImplementedError

    spectral_bound: float = 0.0


class FreeEvolver(TimeEvolver):
    def __init__(self, grid: LatticeGrid):
        self.grid = grid
        self.spectral_bound = 2.0 * grid.d

    def advance(self, field: WaveField, dt: float) -> WaveField:
        mult = dispersion_multiplier(self.grid)
        if field.basis == FREQUENCY:
            return WaveField(self.grid, field.values * np.exp(1j * dt * mult), FREQUENCY)
        f = to_frequency(field)
        return to_position(WaveField(self.grid, f.values * np.exp(1j * dt * mult), FREQUENCY))


class HamiltonianEvolver(TimeEvolver):
    """exp(i dt H) for H = H0 + lam V (time-independent), via Strang marching."""

    def __init__(self, pot: PotentialSample, cfg: EvolutionConfig):
        self.pot = pot
        self.cfg = cfg
        self.spectral_bound = 2.0 * pot.grid.d + abs(cfg.lam) * sup_norm(pot)

    def advance(self, field: WaveField, dt: float) -> WaveField:
        return evolve(field, self.pot, self.cfg, 0.0, -dt)


def multiplier_projection(field: WaveField, E: float, delta: float,
                          bump: BumpFunction | None = None) -> WaveField:
    """Exact rho((H0 - E)/delta) psi through the frequency multiplier."""
    bump = bump or default_bump()
    mult = dispersion_multiplier(field.grid)
    window = bump.rho((mult - E) / delta)
    if field.basis == FREQUENCY:
        return WaveField(field.grid, field.values * window, FREQUENCY)
    f = to_frequency(field)
    return to_position(WaveField(field.grid, f.values * window, FREQUENCY))


def projection_step(spectral_bound: float, delta: float) -> float:
    # image spacing 2 pi / dt must clear both the spectrum spread and the
    # window support, otherwise the periodization of rho aliases back in
    return np.pi / (2.0 * spectral_bound + delta)


def project_energy(field: WaveField, evolver: TimeEvolver, E: float, delta: float,
                   bump: BumpFunction | None = None, eps_trunc: float = 1e-6) -> WaveField:
    """rho_{delta,E}(A) psi = delta int rho_hat(delta t) e^{it(A-E)} psi dt."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    bump = bump or default_bump()
    t_max = bump.t_cut(eps_trunc) / delta
    dt = projection_step(evolver.spectral_bound, delta)
    n = int(np.ceil(t_max / dt))
    ts = dt * np.arange(1, n + 1)
    wts = delta * dt * bump.rho_hat(delta * ts)
    out = (delta * dt * float(bump.rho_hat(0.0))) * field.values.astype(np.complex128)
    plus = field
    minus = field
    for k in range(n):
        plus = evolver.advance(plus, dt)
        minus = evolver.advance(minus, -dt)
        phase = np.exp(-1j * ts[k] * E)
        out = out + wts[k] * (phase * plus.values + np.conj(phase) * minus.values)
    return WaveField(field.grid, out, field.basis)


def projection_handles(pot: PotentialSample, lam: float, E: float, delta: float,
                       cfg: EvolutionConfig, bump: BumpFunction | None = None,
                       eps_trunc: float = 1e-4):
    """Handles for rho_{delta,E}(H) and rho_{delta,E}(H0) on the same quadrature."""
    from dataclasses import replace as _replace

    bump = bump or default_bump()
    cfg = _replace(cfg, lam=lam)
    ham = HamiltonianEvolver(pot, cfg)
    free = FreeEvolver(pot.grid)
    free.spectral_bound = ham.spectral_bound  # identical quadrature grid on both sides

    def mk(evolver):
        ap = lambda f: project_energy(f, evolver, E, delta, bump, eps_trunc)
        return OperatorHandle(pot.grid, ap, ap, selfadjoint=True)

    return mk(ham), mk(free)


def projection_distance(pot: PotentialSample, lam: float, E: float, delta: float,
                        cfg: EvolutionConfig, bump: BumpFunction | None = None,
                        eps_trunc: float = 1e-4, tol: float = 1e-3,
                        max_iters: int = 60, seed: int = 0) -> NormEstimate:
    """||rho_{delta,E}(H) - rho_{delta,E}(H0)||_op by power iteration."""
    h_full, h_free = projection_handles(pot, lam, E, delta, cfg, bump, eps_trunc)
    return operator_norm(h_full.difference(h_free), tol=tol, max_iters=max_iters, seed=seed)


def fourier_localization_defect(field: WaveField, E: float, delta: float,
                                bump: BumpFunction | None = None) -> float:
    """||psi - rho_{delta,E}(H0) psi|| via the exact multiplier realization."""
    bump = bump or default_bump()
    f = to_frequency(field) if field.basis == POSITION else field
    mult = dispersion_multiplier(field.grid)
    window = bump.rho((mult - E) / delta)
    return float(np.linalg.norm((1.0 - window) * f.values))


# ---------------------------------------------------------------------------
# circle filters for period maps


@dataclass(frozen=True)
class CircleFilter:
    theta0: float
    delta: float
    coeffs: np.ndarray  # a_k for k = -k_max .. k_max
    eps: float

    @property
    def k_max(self) -> int:
        return (len(self.coeffs) - 1) // 2

    def coeff(self, k: int) -> complex:
        return complex(self.coeffs[k + self.k_max])

    def reconstruct(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=np.float64)
        ks = np.arange(-self.k_max, self.k_max + 1)
        return np.tensordot(np.exp(1j * np.outer(theta, ks)), self.coeffs, axes=1)

    def profile(self, theta, bump: BumpFunction | None = None) -> np.ndarray:
        bump = bump or default_bump()
        wrapped = (np.asarray(theta) - self.theta0 + np.pi) % (2.0 * np.pi) - np.pi
        return bump.rho(wrapped / self.delta)


def suggested_k_max(delta: float, eps: float, bump: BumpFunction | None = None) -> int:
    """Coefficient cutoff needed for reconstruction error ~eps: a_k tracks
    delta * rho_hat(delta k), so the tail clears eps once delta k > T_cut(eps)."""
    bump = bump or default_bump()
    return int(np.ceil(max(bump.t_cut(eps) / delta, 10.0 / delta))) + 1


def build_circle_filter(theta0: float, delta: float, k_max: int, eps: float = 1e-6,
                        bump: BumpFunction | None = None) -> CircleFilter:
    """Smooth arc cutoff f(e^{i theta}) = rho((theta - theta0)/delta), truncated
    to |k| <= k_max Fourier modes; raises if the truncation misses eps."""
    if not 0.0 < delta < np.pi:
        raise ValueError("delta must lie in (0, pi)")
    if k_max < 10.0 / delta:
        raise ValueError(f"k_max must be at least 10/delta = {10.0 / delta:.1f}")
    bump = bump or default_bump()
    M = 1 << max(12, int(np.ceil(np.log2(16 * k_max))))
    theta = 2.0 * np.pi * np.arange(M) / M
    wrapped = (theta - theta0 + np.pi) % (2.0 * np.pi) - np.pi
    f = bump.rho(wrapped / delta)
    a_full = np.fft.fft(f) / M  # a_k = (2pi)^-1 int f e^{-ik theta}
    ks = np.arange(-k_max, k_max + 1)
    coeffs = a_full[ks % M]
    filt = CircleFilter(theta0, delta, coeffs, eps)
    recon = filt.reconstruct(theta)
    err = float(np.max(np.abs(recon - f)))
    if err > eps:
        raise ValueError(f"k_max={k_max} too small for eps={eps} (reconstruction error {err:.2e})")
    return filt


@dataclass
class UnitaryHandle:
    """One-step unitary with its inverse (e.g. a period map)."""

    grid: LatticeGrid
    apply: callable
    apply_inverse: callable


def free_period_handle(grid: LatticeGrid, tau: float) -> UnitaryHandle:
    mult = dispersion_multiplier(grid)
    fwd = np.exp(-1j * tau * mult)

    def mk(phase):
        def ap(f: WaveField) -> WaveField:
            if f.basis == FREQUENCY:
                return WaveField(grid, f.values * phase, FREQUENCY)
            ff = to_frequency(f)
            return to_position(WaveField(grid, ff.values * phase, FREQUENCY))

        return ap

    return UnitaryHandle(grid, mk(fwd), mk(np.conj(fwd)))


def monodromy_handle(pot: PotentialSample, cfg: EvolutionConfig) -> UnitaryHandle:
    """Period map with per-step phases cached: the same U(tau,0) is applied
    many times inside circle filters, so the drive phases are tabulated once."""
    from .backend import get_backend
    from .evolve import max_timestep

    grid = pot.grid
    tau = cfg.envelope.period
    if not np.isfinite(tau):
        raise ValueError("monodromy needs an envelope with a finite period")
    if cfg.dt > max_timestep(grid, pot, cfg.lam):
        raise ValueError("dt exceeds the step-size guard")
    bk = get_backend(cfg.backend, cfg.single_precision)
    n_steps = max(1, int(np.ceil(tau / cfg.dt)))
    dt = tau / n_steps
    mult = dispersion_multiplier(grid)
    half = bk.asarray(np.exp(-0.5j * dt * mult))
    full = bk.asarray(np.exp(-1.0j * dt * mult))
    mids = (np.arange(n_steps) + 0.5) * dt
    env_vals = np.stack([np.asarray(cfg.envelope.value(m)) * np.ones(grid.shape)
                         for m in mids])
    phases = bk.asarray(np.exp(-1j * dt * cfg.lam * env_vals * pot.couplings[None]))
    d = grid.d

    def run(values, steps, kin_half, kin_full, conj: bool):
        psi = bk.fftn(bk.asarray(values), d)
        psi = psi * kin_half
        for i, k in enumerate(steps):
            psi = bk.ifftn(psi, d)
            psi = psi * (phases[k].conj() if conj else phases[k])
            psi = bk.fftn(psi, d)
            if i < len(steps) - 1:
                psi = psi * kin_full
        psi = psi * kin_half
        return bk.ifftn(psi, d)

    def fwd(f: WaveField) -> WaveField:
        if f.basis != POSITION:
            raise ValueError("monodromy handle expects position-basis fields")
        out = run(f.values, range(n_steps), half, full, conj=False)
        return WaveField(grid, np.asarray(bk.to_numpy(out), dtype=np.complex128), POSITION)

    def inv(f: WaveField) -> WaveField:
        if f.basis != POSITION:
            raise ValueError("monodromy handle expects position-basis fields")
        out = run(f.values, range(n_steps - 1, -1, -1), half.conj(), full.conj(), conj=True)
        return WaveField(grid, np.asarray(bk.to_numpy(out), dtype=np.complex128), POSITION)

    return UnitaryHandle(grid, fwd, inv)


def project_circle(field: WaveField, u_handle: UnitaryHandle, filt: CircleFilter,
                   return_u1: bool = False):
    """f(U) psi = sum_k a_k U^k psi by marching k forward and backward."""
    K = filt.k_max
    out = filt.coeff(0) * field.values.astype(np.complex128)
    plus = field
    u1 = None
    for k in range(1, K + 1):
        plus = u_handle.apply(plus)
        if k == 1:
            u1 = plus
        out = out + filt.coeff(k) * plus.values
    minus = field
    for k in range(1, K + 1):
        minus = u_handle.apply_inverse(minus)
        out = out + filt.coeff(-k) * minus.values
    result = WaveField(field.grid, out, field.basis)
    return (result, u1) if return_u1 else result


@dataclass
class FloquetState:
    state: WaveField
    residual: float
    phase: float
    iterations: int
    converged: bool


def extract_floquet_state(u_handle: UnitaryHandle, filt: CircleFilter, iters: int = 30,
                          seed: int = 0, residual_target: float = 1e-2) -> FloquetState:
    """Iterate psi <- normalize(f(U) psi) from a seeded start; returns the state
    with residual ||U psi - e^{i theta_hat} psi||, theta_hat = arg<psi, U psi>."""
    psi = random_field(u_handle.grid, Stream(seed))
    residual, phase = np.inf, 0.0
    it = 0
    for it in range(1, iters + 1):
        proj, u1 = project_circle(psi, u_handle, filt, return_u1=True)
        n = proj.norm()
        if n == 0.0:
            raise RuntimeError("filter annihilated the iterate; widen the window")
        psi = WaveField(u_handle.grid, proj.values / n, proj.basis)
        upsi = u_handle.apply(psi)
        amp = np.vdot(psi.values, upsi.values)
        phase = float(np.angle(amp))
        residual = float(np.linalg.norm(upsi.values - np.exp(1j * phase) * psi.values))
        if residual <= residual_target:
            return FloquetState(psi, residual, phase, it, True)
    return FloquetState(psi, residual, phase, it, False)


def levelset_mass(field: WaveField, tau: float, width: float,
                  energy_offset: float = 0.0) -> float:
    """Fraction of ||psi_hat||^2 within a band of total width `width` around
    the multiplier level sets (2 pi / tau) Z + energy_offset."""
    f = to_frequency(field) if field.basis == POSITION else field
    mult = dispersion_multiplier(field.grid)
    spacing = 2.0 * np.pi / tau
    dist = np.abs((mult - energy_offset + 0.5 * spacing) % spacing - 0.5 * spacing)
    weights = np.abs(f.values) ** 2
    total = float(weights.sum())
    if total == 0.0:
        raise ValueError("zero field")
    return float(weights[dist <= 0.5 * width].sum() / total)


def levelset_band_fraction(grid: LatticeGrid, tau: float, width: float,
                           energy_offset: float = 0.0) -> float:
    """Uniform-field baseline: in-band site count over N^d, by direct count."""
    mult = dispersion_multiplier(grid)
    spacing = 2.0 * np.pi / tau
    dist = np.abs((mult - energy_offset + 0.5 * spacing) % spacing - 0.5 * spacing)
    return float(np.count_nonzero(dist <= 0.5 * width) / grid.nsites)
