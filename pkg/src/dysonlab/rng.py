"""Counter-based random streams for reproducible Monte Carlo trials.

Every trial owns a stream derived from (master_seed, trial_index) through a
fixed 64-bit mixing function, so trials can run in any order or in parallel
and still reproduce bit-for-bit.  Gaussians come from Box-Muller applied to
the uniform stream.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / float(1 << 53)


def _mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer on uint64 arrays (wrapping arithmetic)."""
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


def derive_stream_seed(master_seed: int, index: int) -> int:
    """Per-trial stream seed: mix(master_seed, trial_index)."""
    with np.errstate(over="ignore"):
        a = np.uint64(master_seed & 0xFFFFFFFFFFFFFFFF) + _GOLDEN
        b = np.uint64((index + 1) & 0xFFFFFFFFFFFFFFFF) * _GOLDEN
        return int(_mix64(_mix64(a) ^ b))


class Stream:
    """Deterministic uniform/gaussian source over a splitmix64 counter."""

    def __init__(self, seed: int):
        self.seed = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
        self._count = 0

    def _raw(self, n: int) -> np.ndarray:
        ctr = np.arange(self._count + 1, self._count + n + 1, dtype=np.uint64)
        self._count += n
        with np.errstate(over="ignore"):
            return _mix64(self.seed + ctr * _GOLDEN)

    def uniforms(self, n: int) -> np.ndarray:
        """i.i.d. uniforms on (0, 1] (open at zero so log() is safe)."""
        return ((self._raw(n) >> _S11).astype(np.float64) + 1.0) * _INV53

    def gaussians(self, n: int) -> np.ndarray:
        m = (n + 1) // 2
        u1 = self.uniforms(m)
        u2 = self.uniforms(m)
        r = np.sqrt(-2.0 * np.log(u1))
        th = (2.0 * np.pi) * u2
        out = np.concatenate([r * np.cos(th), r * np.sin(th)])
        return out[:n]

    def rademacher(self, n: int) -> np.ndarray:
        return np.where(self._raw(n) >> np.uint64(63), 1.0, -1.0)

    def uniform_pm1(self, n: int) -> np.ndarray:
        return 2.0 * self.uniforms(n) - 1.0

    def complex_gaussians(self, n: int) -> np.ndarray:
        g = self.gaussians(2 * n)
        return (g[:n] + 1j * g[n:]) / np.sqrt(2.0)
