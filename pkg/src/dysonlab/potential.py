"""Random potentials on the lattice and periodic drive envelopes.

A sample carries couplings g_n on sites within Euclidean distance R of the
grid center and zeros elsewhere.  Supported distributions: standard Gaussian,
Rademacher (+/-1), and uniform on [-1, 1]; all mean zero.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .lattice import POSITION, LatticeGrid, WaveField
from .rng import Stream

DISTRIBUTIONS = ("gaussian", "rademacher", "uniform")


@dataclass(frozen=True)
class PotentialSample:
    grid: LatticeGrid
    radius: int
    distribution: str
    seed: int
    couplings: np.ndarray

    def __post_init__(self):
        self.couplings.setflags(write=False)

    @property
    def support_mask(self) -> np.ndarray:
        return _ball_mask(self.grid, self.radius)

    @property
    def nsupport(self) -> int:
        return int(self.support_mask.sum())


def _ball_mask(grid: LatticeGrid, radius: int) -> np.ndarray:
    """Sites with |n - center| <= R (plain Euclidean; 2R < N keeps it off the seam)."""
    if radius == 0:
        return np.zeros(grid.shape, dtype=bool)
    c = grid.N // 2
    axes = [(np.arange(grid.N) - c).astype(np.float64) for _ in range(grid.d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return sum(a**2 for a in mesh) <= radius**2


def sample_potential(grid: LatticeGrid, radius: int, distribution: str, seed: int) -> PotentialSample:
    if distribution not in DISTRIBUTIONS:
        raise ValueError(f"unknown distribution {distribution!r}; options {DISTRIBUTIONS}")
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if 2 * radius >= grid.N:
        raise ValueError(f"potential support must fit the box: need 2R < N, got R={radius}, N={grid.N}")
    mask = _ball_mask(grid, radius)
    count = int(mask.sum())
    stream = Stream(seed)
    if distribution == "gaussian":
        draws = stream.gaussians(count)
    elif distribution == "rademacher":
        draws = stream.rademacher(count)
    else:
        draws = stream.uniform_pm1(count)
    couplings = np.zeros(grid.shape, dtype=np.float64)
    couplings[mask] = draws  # boolean indexing fills in C (lexicographic) order
    return PotentialSample(grid, radius, distribution, seed, couplings)


def sup_norm(pot: PotentialSample) -> float:
    return float(np.max(np.abs(pot.couplings))) if pot.couplings.size else 0.0


def apply_potential(field: WaveField, pot: PotentialSample, lam: float, envelope_value=1.0) -> WaveField:
    """Pointwise multiply by lam * envelope_value * g_n (position basis)."""
    if field.basis != POSITION:
        raise ValueError("apply_potential expects a position-basis field")
    return WaveField(field.grid, (lam * envelope_value) * pot.couplings * field.values, POSITION)


@dataclass(frozen=True)
class DriveEnvelope:
    """tau-periodic scalar (or per-site) modulation phi(t) of the potential.

    kinds: 'constant'; 'cosine' with value cos(omega t), period 2 pi / omega;
    'tabulated' with periodic linear interpolation of `table` sampled at
    k * period / len(table).  A 2-D table gives one row per time sample with
    per-site columns.
    """

    kind: str = "constant"
    period: float = np.inf
    omega: float = 0.0
    table: np.ndarray | None = None

    @staticmethod
    def constant() -> "DriveEnvelope":
        return DriveEnvelope("constant", np.inf)

    @staticmethod
    def cosine(omega: float) -> "DriveEnvelope":
        if omega == 0.0:
            raise ValueError("cosine envelope needs omega != 0")
        return DriveEnvelope("cosine", 2.0 * np.pi / abs(omega), omega)

    @staticmethod
    def tabulated(table: np.ndarray, period: float) -> "DriveEnvelope":
        table = np.asarray(table, dtype=np.float64)
        if table.shape[0] < 2:
            raise ValueError("tabulated envelope needs at least 2 samples")
        return DriveEnvelope("tabulated", float(period), table=table)

    def value(self, t: float):
        if self.kind == "constant":
            return 1.0
        if self.kind == "cosine":
            return float(np.cos(self.omega * t))
        n = self.table.shape[0]
        x = (t / self.period) % 1.0 * n
        i0 = int(np.floor(x)) % n
        frac = x - np.floor(x)
        return (1.0 - frac) * self.table[i0] + frac * self.table[(i0 + 1) % n]


_MAGIC = b"DYLPOT01"
_DIST_CODE = {name: i for i, name in enumerate(DISTRIBUTIONS)}


def save_potential(pot: PotentialSample, path) -> None:
    """Flat binary: magic, d, N, R, distribution tag, seed, then couplings."""
    header = _MAGIC + struct.pack(
        "<IIIBQ", pot.grid.d, pot.grid.N, pot.radius, _DIST_CODE[pot.distribution], pot.seed
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(pot.couplings, dtype="<f8").tobytes())


def load_potential(path) -> PotentialSample:
    raw = Path(path).read_bytes()
    if raw[:8] != _MAGIC:
        raise ValueError(f"{path}: not a potential file (bad magic)")
    d, N, radius, dist_code, seed = struct.unpack("<IIIBQ", raw[8 : 8 + 21])
    grid = LatticeGrid(d, N)
    values = np.frombuffer(raw[8 + 21 :], dtype="<f8").reshape(grid.shape).copy()
    return PotentialSample(grid, radius, DISTRIBUTIONS[dist_code], seed, values)
