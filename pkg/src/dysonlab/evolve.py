"""Full propagator U(b, a) by Strang splitting, and dense small-grid oracles.

One Strang step over dt is: half-step free flight, full-step potential phase
exp(-i dt lam phi(midpoint) g_n), half-step free flight; consecutive kinetic
half-steps are fused so each step costs one transform pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .backend import NumpyBackend, get_backend
from .lattice import POSITION, LatticeGrid, WaveField, dispersion_multiplier
from .potential import DriveEnvelope, PotentialSample, sup_norm


@dataclass
class EvolutionConfig:
    dt: float
    lam: float
    envelope: DriveEnvelope = field(default_factory=DriveEnvelope.constant)
    scheme: str = "strang"
    backend: str = "numpy"
    single_precision: bool = False

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.scheme != "strang":
            raise ValueError(f"unsupported scheme {self.scheme!r}")


def max_timestep(grid: LatticeGrid, pot: PotentialSample, lam: float) -> float:
    """Resolution guard pi / (2d + lam * ||V||_inf) tied to the spectral radius."""
    return np.pi / (2 * grid.d + abs(lam) * sup_norm(pot))


def _check_step(grid: LatticeGrid, pot: PotentialSample, cfg: EvolutionConfig) -> None:
    dt_max = max_timestep(grid, pot, cfg.lam)
    if cfg.dt > dt_max:
        raise ValueError(f"dt={cfg.dt} exceeds the step-size guard {dt_max:.4f}")


def strang_march(values, grid: LatticeGrid, pot: PotentialSample, cfg: EvolutionConfig,
                 a: float, b: float, backend=None):
    """Raw-array Strang evolution over [a, b] (either direction).

    `values` holds one field over the trailing grid axes, with optional
    leading batch axes.  Returns an array of the same shape and type.
    """
    if a == b:
        return values
    bk = backend or get_backend(cfg.backend, cfg.single_precision)
    n_steps = max(1, int(np.ceil(abs(b - a) / cfg.dt)))
    dt = (b - a) / n_steps
    d = grid.d
    mult = dispersion_multiplier(grid)

    half = bk.asarray(np.exp(-0.5j * dt * mult))
    full = bk.asarray(np.exp(-1.0j * dt * mult))
    g = pot.couplings
    env = cfg.envelope
    constant_env = env.kind == "constant"
    const_phase = bk.asarray(np.exp(-1j * dt * cfg.lam * g)) if constant_env else None

    def pot_phase(k: int):
        if constant_env:
            return const_phase
        mid = a + (k + 0.5) * dt
        return bk.asarray(np.exp(-1j * dt * cfg.lam * np.asarray(env.value(mid)) * g))

    psi = bk.asarray(values)
    psi = bk.fftn(psi, d)
    psi = psi * half
    for k in range(n_steps):
        psi = bk.ifftn(psi, d)
        psi = psi * pot_phase(k)
        psi = bk.fftn(psi, d)
        if k < n_steps - 1:
            psi = psi * full
    psi = psi * half
    return bk.ifftn(psi, d)


def evolve(field: WaveField, pot: PotentialSample, cfg: EvolutionConfig,
           a: float, b: float) -> WaveField:
    """U(b, a) applied to a position-basis field."""
    if field.basis != POSITION:
        raise ValueError("evolve expects a position-basis field")
    _check_step(field.grid, pot, cfg)
    bk = get_backend(cfg.backend, cfg.single_precision)
    out = bk.to_numpy(strang_march(field.values, field.grid, pot, cfg, a, b, bk))
    return WaveField(field.grid, np.asarray(out, dtype=np.complex128), POSITION)


def monodromy_apply(field: WaveField, pot: PotentialSample, cfg: EvolutionConfig,
                    inverse: bool = False) -> WaveField:
    """One-period map U(tau, 0) of the driven system (or its inverse)."""
    tau = cfg.envelope.period
    if not np.isfinite(tau):
        raise ValueError("monodromy needs an envelope with a finite period")
    return evolve(field, pot, cfg, tau, 0.0) if inverse else evolve(field, pot, cfg, 0.0, tau)


# ---------------------------------------------------------------------------
# dense oracles (N^d <= 4096)

_DENSE_LIMIT = 4096


def dense_hamiltonian(grid: LatticeGrid, pot: PotentialSample, lam: float) -> np.ndarray:
    """H = hopping stencil + lam * diag(g), as a dense Hermitian matrix."""
    if grid.nsites > _DENSE_LIMIT:
        raise ValueError(f"grid too large for dense assembly ({grid.nsites} > {_DENSE_LIMIT})")
    n = grid.nsites
    H = np.zeros((n, n), dtype=np.complex128)
    idx = np.arange(n).reshape(grid.shape)
    for axis in range(grid.d):
        for shift in (1, -1):
            H[idx.ravel(), np.roll(idx, shift, axis=axis).ravel()] += 1.0
    H[np.arange(n), np.arange(n)] += lam * pot.couplings.ravel()
    return H


@dataclass
class DenseOracle:
    """Eigendecomposed H for exact propagators and functional calculus."""

    grid: LatticeGrid
    hamiltonian: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))

    def propagator(self, t: float) -> np.ndarray:
        """exp(-i t H)."""
        Q, w = self.eigenvectors, self.eigenvalues
        return (Q * np.exp(-1j * t * w)) @ Q.conj().T

    def functional(self, f) -> np.ndarray:
        """f(H) by spectral calculus; f acts on the eigenvalue array."""
        Q, w = self.eigenvectors, self.eigenvalues
        return (Q * np.asarray(f(w))) @ Q.conj().T

    def apply_propagator(self, field: WaveField, t: float) -> WaveField:
        out = self.propagator(t) @ field.values.ravel()
        return WaveField(field.grid, out.reshape(field.grid.shape), POSITION)


def dense_oracle(grid: LatticeGrid, pot: PotentialSample, lam: float) -> DenseOracle:
    H = dense_hamiltonian(grid, pot, lam)
    w, Q = np.linalg.eigh(H)
    return DenseOracle(grid, H, w, Q)


def dense_monodromy(grid: LatticeGrid, pot: PotentialSample, lam: float,
                    envelope: DriveEnvelope, n_steps: int = 8192) -> np.ndarray:
    """Dense U(tau, 0) by midpoint-exponential stepping (second order in dt)."""
    if grid.nsites > _DENSE_LIMIT:
        raise ValueError("grid too large for a dense monodromy")
    tau = envelope.period
    dt = tau / n_steps
    H0 = dense_hamiltonian(grid, pot, 0.0)
    g = pot.couplings.ravel()
    U = np.eye(grid.nsites, dtype=np.complex128)
    for k in range(n_steps):
        mid = (k + 0.5) * dt
        H = H0 + np.diag(lam * np.asarray(envelope.value(mid)) * g)
        w, Q = np.linalg.eigh(H)
        U = (Q * np.exp(-1j * dt * w)) @ Q.conj().T @ U
    return U
