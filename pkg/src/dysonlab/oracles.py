"""Dense brute-force oracles for small grids.

These anchor the matrix-free paths: exact T_1 via the spectral formula for
the time integral, nested-simplex quadrature for higher orders (with a rule
much finer than the production path), dense monodromy matrices, and unitary
functional calculus.  Everything here is O(dim^2..3) and meant for N^d <= 4096.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .evolve import dense_hamiltonian
from .lattice import LatticeGrid
from .potential import DriveEnvelope, PotentialSample


def free_eigensystem(grid: LatticeGrid, pot: PotentialSample):
    H0 = dense_hamiltonian(grid, pot, 0.0)
    return np.linalg.eigh(H0)


def dense_t1_exact(grid: LatticeGrid, pot: PotentialSample, t: float) -> np.ndarray:
    """T_1(t) assembled exactly: V conjugated in the H0 eigenbasis carries the
    closed-form time integral (e^{i w t} - 1)/(i w)."""
    w0, Q0 = free_eigensystem(grid, pot)
    Vt = Q0.conj().T @ np.diag(pot.couplings.ravel()) @ Q0
    om = w0[:, None] - w0[None, :]
    E = t * np.exp(0.5j * om * t) * np.sinc(om * t / (2.0 * np.pi))
    return Q0 @ (Vt * E) @ Q0.conj().T


def dense_interaction(grid: LatticeGrid, pot: PotentialSample, s: float,
                      envelope: DriveEnvelope | None = None) -> np.ndarray:
    """V(s) = e^{isH0} V_env(s) e^{-isH0} as a dense matrix."""
    w0, Q0 = free_eigensystem(grid, pot)
    env = 1.0 if envelope is None else envelope.value(s)
    U = (Q0 * np.exp(1j * s * w0)) @ Q0.conj().T
    return U @ np.diag(np.asarray(env) * pot.couplings.ravel()) @ U.conj().T


def dense_tj_nested(grid: LatticeGrid, pot: PotentialSample, j: int, t: float,
                    nodes: int = 16, windows: int = 8,
                    envelope: DriveEnvelope | None = None) -> np.ndarray:
    """T_j(t) by literal nested simplex quadrature (composite Gauss-Legendre
    per level), cost nodes^j; use a rule ~10x finer than the path under test."""
    dim = grid.nsites
    x, wq = np.polynomial.legendre.leggauss(nodes)
    w0, Q0 = free_eigensystem(grid, pot)
    gdiag = pot.couplings.ravel()

    def vmat(s: float) -> np.ndarray:
        env = 1.0 if envelope is None else envelope.value(s)
        U = (Q0 * np.exp(1j * s * w0)) @ Q0.conj().T
        return U @ np.diag(np.asarray(env) * gdiag) @ U.conj().T

    def level(k: int, upper: float) -> np.ndarray:
        if k == 0:
            return np.eye(dim, dtype=np.complex128)
        total = np.zeros((dim, dim), dtype=np.complex128)
        for m in range(windows):
            a, b = upper * m / windows, upper * (m + 1) / windows
            ss = 0.5 * (b - a) * (x + 1.0) + a
            ww = 0.5 * (b - a) * wq
            for si, wi in zip(ss, ww):
                total += wi * (vmat(si) @ level(k - 1, si))
        return total

    return level(j, t)


def dense_tj_grid(grid: LatticeGrid, pot: PotentialSample, j: int, t: float,
                  samples: int = 1024, envelope: DriveEnvelope | None = None) -> np.ndarray:
    """T_j(t) by marching F_k(s) = int_0^s V(u) F_{k-1}(u) du with cumulative
    Simpson on a uniform grid; an independent route from the collocation path."""
    import scipy.integrate

    dim = grid.nsites
    ss = np.linspace(0.0, t, samples + 1)
    w0, Q0 = free_eigensystem(grid, pot)
    gdiag = pot.couplings.ravel()
    Vs = np.empty((samples + 1, dim, dim), dtype=np.complex128)
    for i, s in enumerate(ss):
        env = 1.0 if envelope is None else envelope.value(s)
        U = (Q0 * np.exp(1j * s * w0)) @ Q0.conj().T
        Vs[i] = U @ (np.asarray(env) * gdiag[:, None] * U.conj().T)
    def cumulative(arr):  # cumulative_simpson handles real arrays only
        re = scipy.integrate.cumulative_simpson(arr.real, x=ss, axis=0, initial=0.0)
        im = scipy.integrate.cumulative_simpson(arr.imag, x=ss, axis=0, initial=0.0)
        return re + 1j * im

    F = np.broadcast_to(np.eye(dim, dtype=np.complex128), Vs.shape).copy()
    for _ in range(j):
        F = cumulative(Vs @ F)
    return F[-1]


def dense_strang_monodromy(grid: LatticeGrid, pot: PotentialSample, lam: float,
                           envelope: DriveEnvelope, dt: float) -> np.ndarray:
    """Dense product of the exact Strang factors used by the matrix-free path."""
    tau = envelope.period
    n_steps = max(1, int(np.ceil(tau / dt)))
    step = tau / n_steps
    w0, Q0 = free_eigensystem(grid, pot)
    half = (Q0 * np.exp(-0.5j * step * w0)) @ Q0.conj().T
    g = pot.couplings.ravel()
    U = np.eye(grid.nsites, dtype=np.complex128)
    for k in range(n_steps):
        mid = (k + 0.5) * step
        phase = np.exp(-1j * step * lam * np.asarray(envelope.value(mid)) * g)
        U = half @ (phase[:, None] * half) @ U
    return U


def unitary_calculus(U: np.ndarray, f) -> np.ndarray:
    """f(U) for unitary U via the (complex) Schur form, which is diagonal."""
    T, Q = scipy.linalg.schur(U, output="complex")
    return (Q * np.asarray(f(np.diag(T)))) @ Q.conj().T


def top_singular_value(M: np.ndarray) -> float:
    return float(np.linalg.svd(M, compute_uv=False)[0])
