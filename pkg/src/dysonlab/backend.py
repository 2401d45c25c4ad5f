"""FFT/array backend shim: numpy+scipy.fft by default, torch when requested.

Engines in dyson/evolve do elementwise arithmetic plus batched d-dimensional
transforms over the trailing axes; both array libraries share that surface.
Leading axes are free batch dimensions.
"""

from __future__ import annotations

import numpy as np
import scipy.fft as _sfft

_WORKER_CUTOFF = 1 << 18  # thread dispatch costs more than small transforms


def _workers(x) -> int | None:
    return 2 if x.size >= _WORKER_CUTOFF else None


class NumpyBackend:
    name = "numpy"

    def __init__(self, single: bool = False):
        self.cdtype = np.complex64 if single else np.complex128

    def asarray(self, x):
        return np.asarray(x, dtype=self.cdtype)

    def to_numpy(self, x) -> np.ndarray:
        return np.asarray(x)

    def fftn(self, x, d: int):
        return _sfft.fftn(x, axes=tuple(range(-d, 0)), norm="ortho", workers=_workers(x))

    def ifftn(self, x, d: int):
        return _sfft.ifftn(x, axes=tuple(range(-d, 0)), norm="ortho", workers=_workers(x))

    def inner(self, a, b, d: int):
        """<a, b> summed over the trailing d axes; batch axes survive."""
        return np.sum(np.conj(a) * b, axis=tuple(range(-d, 0)))

    def zeros_like(self, x):
        return np.zeros_like(x)


class TorchBackend:
    name = "torch"

    def __init__(self, single: bool = True, threads: int = 2):
        import torch

        torch.set_num_threads(threads)
        self._torch = torch
        self.cdtype = torch.complex64 if single else torch.complex128

    def asarray(self, x):
        t = self._torch
        if isinstance(x, t.Tensor):
            return x.to(self.cdtype)
        x = np.ascontiguousarray(x)
        if not x.flags.writeable:
            x = x.copy()
        return t.as_tensor(x).to(self.cdtype)

    def to_numpy(self, x) -> np.ndarray:
        if isinstance(x, self._torch.Tensor):
            return x.cpu().numpy()
        return np.asarray(x)

    def fftn(self, x, d: int):
        return self._torch.fft.fftn(x, dim=tuple(range(-d, 0)), norm="ortho")

    def ifftn(self, x, d: int):
        return self._torch.fft.ifftn(x, dim=tuple(range(-d, 0)), norm="ortho")

    def inner(self, a, b, d: int):
        return (a.conj() * b).sum(dim=tuple(range(-d, 0))).cpu().numpy()

    def zeros_like(self, x):
        return self._torch.zeros_like(x)


def get_backend(name: str = "numpy", single: bool = False):
    if name == "numpy":
        return NumpyBackend(single=single)
    if name == "torch":
        try:
            return TorchBackend(single=single)
        except ImportError:
            return NumpyBackend(single=single)
    raise ValueError(f"unknown backend {name!r}")
