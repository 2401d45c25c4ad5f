"""Periodic lattice grids, unitary Fourier transforms, and the free propagator.

The free Hamiltonian is the hopping operator (H0 psi)(n) = sum over nearest
neighbours psi(n'), diagonalized by the discrete Fourier transform with the
dispersion multiplier 2 * sum_j cos(2 pi m_j / N).  free_propagate applies
exp(-i t H0) as a spectral multiplier; free_kernel reads matrix entries off a
propagated delta function.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
import scipy.fft as _fft

POSITION = "position"
FREQUENCY = "frequency"

_WORKER_CUTOFF = 1 << 18


def _fftn(values: np.ndarray) -> np.ndarray:
    w = 2 if values.size >= _WORKER_CUTOFF else None
    return _fft.fftn(values, norm="ortho", workers=w)


def _ifftn(values: np.ndarray) -> np.ndarray:
    w = 2 if values.size >= _WORKER_CUTOFF else None
    return _fft.ifftn(values, norm="ortho", workers=w)


@dataclass(frozen=True)
class LatticeGrid:
    """Periodic box {0,...,N-1}^d."""

    d: int
    N: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.N < 2:
            raise ValueError(f"side length must be >= 2, got {self.N}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.d

    @property
    def nsites(self) -> int:
        return self.N**self.d

    @property
    def center(self) -> tuple[int, ...]:
        return (self.N // 2,) * self.d

    def periodic_distance(self, site: tuple[int, ...]) -> np.ndarray:
        """Euclidean wrap-around distance from `site` to every lattice site."""
        axes = []
        for j in range(self.d):
            delta = np.abs(np.arange(self.N) - site[j])
            axes.append(np.minimum(delta, self.N - delta))
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.sqrt(sum(a.astype(np.float64) ** 2 for a in mesh))


@lru_cache(maxsize=32)
def _multiplier_cached(d: int, N: int) -> np.ndarray:
    one_d = 2.0 * np.cos(2.0 * np.pi * np.arange(N) / N)
    mesh = np.meshgrid(*([one_d] * d), indexing="ij")
    return sum(mesh).astype(np.float64)


def dispersion_multiplier(grid: LatticeGrid) -> np.ndarray:
    """Per-frequency-site value 2 * sum_j cos(2 pi m_j / N), in [-2d, 2d]."""
    return _multiplier_cached(grid.d, grid.N)


@dataclass
class WaveField:
    """Complex amplitude per site, tagged with its current basis."""

    grid: LatticeGrid
    values: np.ndarray
    basis: str = POSITION

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"value shape {self.values.shape} != grid shape {self.grid.shape}"
            )
        if self.basis not in (POSITION, FREQUENCY):
            raise ValueError(f"unknown basis tag {self.basis!r}")

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def copy(self) -> "WaveField":
        return WaveField(self.grid, self.values.copy(), self.basis)

    def normalized(self) -> "WaveField":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero field")
        return WaveField(self.grid, self.values / n, self.basis)


def delta_field(grid: LatticeGrid, site: tuple[int, ...] | None = None) -> WaveField:
    values = np.zeros(grid.shape, dtype=np.complex128)
    values[tuple(site) if site is not None else grid.center] = 1.0
    return WaveField(grid, values)


def random_field(grid: LatticeGrid, stream) -> WaveField:
    values = stream.complex_gaussians(grid.nsites).reshape(grid.shape)
    return WaveField(grid, values).normalized()


def to_frequency(field: WaveField) -> WaveField:
    if field.basis != POSITION:
        raise ValueError("to_frequency expects a position-basis field")
    return WaveField(field.grid, _fftn(field.values), FREQUENCY)


def to_position(field: WaveField) -> WaveField:
    if field.basis != FREQUENCY:
        raise ValueError("to_position expects a frequency-basis field")
    return WaveField(field.grid, _ifftn(field.values), POSITION)


def free_propagate(field: WaveField, t: float) -> WaveField:
    """exp(-i t H0) applied in whichever basis the field arrives."""
    mult = dispersion_multiplier(field.grid)
    phase = np.exp(-1j * t * mult)
    if field.basis == FREQUENCY:
        return WaveField(field.grid, field.values * phase, FREQUENCY)
    vals = _fftn(field.values)
    vals *= phase
    return WaveField(field.grid, _ifftn(vals), POSITION)


def free_kernel_column(site: tuple[int, ...], t: float, grid: LatticeGrid) -> np.ndarray:
    """All entries <n| exp(-i t H0) |site> as an array over n."""
    return free_propagate(delta_field(grid, site), t).values


def free_kernel(n: tuple[int, ...], m: tuple[int, ...], t: float, grid: LatticeGrid) -> complex:
    """<n| exp(-i t H0) |m> via delta-function propagation."""
    return complex(free_kernel_column(tuple(m), t, grid)[tuple(n)])


@dataclass(frozen=True)
class DispersionEntry:
    s: float
    scaled_diagonal: float  # s^(d/2) * max kernel modulus within |n-m| <= s/100
    tail_max: float         # max modulus beyond |n-m| > 10 s
    tail_mass: float        # sum of squared moduli beyond |n-m| > 10 s


@dataclass(frozen=True)
class DispersionReport:
    grid: LatticeGrid
    entries: tuple[DispersionEntry, ...] = field(default_factory=tuple)

    @property
    def max_scaled_diagonal(self) -> float:
        return max(e.scaled_diagonal for e in self.entries)

    @property
    def max_tail(self) -> float:
        return max(e.tail_max for e in self.entries)


def check_dispersive(grid: LatticeGrid, s_values) -> DispersionReport:
    """On-diagonal decay and finite-speed tail of the free kernel.

    Rejects any s with 10 s >= N/2, where wrap-around would contaminate
    the tail region.
    """
    entries = []
    dist = grid.periodic_distance(grid.center)
    for s in s_values:
        s = float(s)
        if s < 0:
            raise ValueError("s must be nonnegative")
        if s > 0 and 10.0 * s >= grid.N / 2:
            raise ValueError(
                f"s={s} violates the wrap-around guard 10*s < N/2 (N={grid.N})"
            )
        col = np.abs(free_kernel_column(grid.center, s, grid))
        near = dist <= s / 100.0
        scaled = float(s ** (grid.d / 2.0) * col[near].max())
        far = dist > 10.0 * s
        if np.any(far):
            tail_max = float(col[far].max())
            tail_mass = float(np.sum(col[far] ** 2))
        else:
            tail_max = 0.0
            tail_mass = 0.0
        entries.append(DispersionEntry(s, scaled, tail_max, tail_mass))
    return DispersionReport(grid, tuple(entries))
