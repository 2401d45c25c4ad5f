"""Structured random matrices X = sum_n g_n A_n: sampling, the variance
parameter sigma = ||sum A_n^2||^(1/2), concentration checks for the norm,
moment inequalities, and the supporting trace/Holder/Jensen inequalities as
randomized verifiers.  Dense linear algebra throughout; scale lives elsewhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rng import Stream, derive_stream_seed

_VARIANCE = {"gaussian": 1.0, "rademacher": 1.0, "uniform": 1.0 / 3.0}


@dataclass(frozen=True)
class StructuredEnsemble:
    dim: int
    coeffs: np.ndarray  # (s, dim, dim), each Hermitian
    distribution: str = "gaussian"
    seed: int = 0

    def __post_init__(self):
        if self.coeffs.ndim != 3 or self.coeffs.shape[1:] != (self.dim, self.dim):
            raise ValueError("coeffs must be (s, dim, dim)")
        herm_err = np.max(np.abs(self.coeffs - np.conj(np.swapaxes(self.coeffs, 1, 2))))
        if herm_err > 1e-12:
            raise ValueError(f"coefficient matrices must be Hermitian (residual {herm_err:.2e})")
        if self.distribution not in _VARIANCE:
            raise ValueError(f"unknown distribution {self.distribution!r}")

    @property
    def s(self) -> int:
        return self.coeffs.shape[0]

    @property
    def is_diagonal(self) -> bool:
        mask = ~np.eye(self.dim, dtype=bool)
        return bool(np.all(np.abs(self.coeffs[:, mask]) < 1e-15))

    def coeff_variance(self) -> float:
        return _VARIANCE[self.distribution]


def diagonal_ensemble(dim: int, distribution: str = "gaussian", seed: int = 0) -> StructuredEnsemble:
    """A_n = e_n e_n^T for n = 1..dim: X is diagonal with i.i.d. entries."""
    coeffs = np.zeros((dim, dim, dim))
    idx = np.arange(dim)
    coeffs[idx, idx, idx] = 1.0
    return StructuredEnsemble(dim, coeffs, distribution, seed)


def single_matrix_ensemble(A: np.ndarray, distribution: str = "gaussian",
                           seed: int = 0) -> StructuredEnsemble:
    return StructuredEnsemble(A.shape[0], A[None].astype(np.complex128), distribution, seed)


def random_hermitian(dim: int, stream: Stream) -> np.ndarray:
    """Gaussian entries, symmetrized: (M + M^T)/2 with real entries."""
    M = stream.gaussians(dim * dim).reshape(dim, dim)
    return 0.5 * (M + M.T)


def random_hermitian_ensemble(dim: int, s: int, distribution: str = "gaussian",
                              seed: int = 0) -> StructuredEnsemble:
    stream = Stream(derive_stream_seed(seed, 0))
    coeffs = np.stack([random_hermitian(dim, stream) for _ in range(s)])
    return StructuredEnsemble(dim, coeffs.astype(np.complex128), distribution, seed)


def _draw_g(ens: StructuredEnsemble, trials: int, offset: int = 0) -> np.ndarray:
    out = np.empty((trials, ens.s))
    for t in range(trials):
        st = Stream(derive_stream_seed(ens.seed, t + offset))
        if ens.distribution == "gaussian":
            out[t] = st.gaussians(ens.s)
        elif ens.distribution == "rademacher":
            out[t] = st.rademacher(ens.s)
        else:
            out[t] = st.uniform_pm1(ens.s)
    return out


def sample_X(ens: StructuredEnsemble, trial: int = 0) -> np.ndarray:
    g = _draw_g(ens, 1, offset=trial)[0]
    return np.einsum("s,sij->ij", g, ens.coeffs)


def _norms_batch(ens: StructuredEnsemble, trials: int) -> np.ndarray:
    """||X||_op per trial; diagonal ensembles take the closed form."""
    g = _draw_g(ens, trials)
    if ens.is_diagonal:
        diag = np.real(np.einsum("sii->si", ens.coeffs))
        return np.max(np.abs(g @ diag), axis=1)
    out = np.empty(trials)
    chunk = max(1, int(2e7 / (ens.dim * ens.dim)))
    for lo in range(0, trials, chunk):
        Xs = np.einsum("ts,sij->tij", g[lo : lo + chunk], ens.coeffs)
        out[lo : lo + chunk] = np.max(np.abs(np.linalg.eigvalsh(Xs)), axis=1)
    return out


def sigma_param(ens: StructuredEnsemble) -> float:
    """sigma = ||sum_n A_n^2||_op^(1/2)."""
    S = np.einsum("sij,sjk->ik", ens.coeffs, ens.coeffs)
    return float(np.sqrt(np.max(np.abs(np.linalg.eigvalsh(S)))))


@dataclass(frozen=True)
class ExpectationReport:
    mean_norm: float
    sigma: float
    bound_scale: float      # sqrt(log dim) * sigma
    ratio: float            # mean / bound_scale
    trials: int


def nck_expectation_check(ens: StructuredEnsemble, trials: int = 200) -> ExpectationReport:
    """Empirical E||X|| against sqrt(log dim) * sigma."""
    if trials < 100:
        raise ValueError("need at least 100 trials")
    norms = _norms_batch(ens, trials)
    sigma = sigma_param(ens)
    scale = math.sqrt(max(math.log(ens.dim), 1e-12)) * sigma
    mean = float(norms.mean())
    ratio = mean / scale if scale > 0 else 0.0
    return ExpectationReport(mean, sigma, scale, ratio, trials)


def wilson_interval(successes: int, n: int, z: float = 1.959963984540054):
    """Wilson score interval for a binomial proportion."""
    if n == 0:
        return 0.0, 1.0
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return center - half, center + half


@dataclass(frozen=True)
class TailEntry:
    K: float
    exceedances: int
    frequency: float
    bound: float            # exp(-K^2/10)
    ci_low: float
    ci_high: float
    passed: bool


@dataclass(frozen=True)
class TailReport:
    sigma: float
    trials: int
    entries: tuple[TailEntry, ...]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)


def nck_tail_check(ens: StructuredEnsemble, K_list, trials: int = 10000) -> TailReport:
    """Exceedance frequencies of ||X|| >= K sigma vs exp(-K^2/10).

    Each K must satisfy the hypothesis K > 4 sqrt(log dim).
    """
    floor = 4.0 * math.sqrt(math.log(ens.dim))
    for K in K_list:
        if K <= floor:
            raise ValueError(f"K={K} violates the hypothesis K > 4 sqrt(log dim) = {floor:.3f}")
    norms = _norms_batch(ens, trials)
    sigma = sigma_param(ens)
    entries = []
    for K in K_list:
        exc = int(np.count_nonzero(norms >= K * sigma)) if sigma > 0 else 0
        freq = exc / trials
        lo, hi = wilson_interval(exc, trials)
        bound = math.exp(-K * K / 10.0)
        half = (hi - lo) / 2.0
        entries.append(TailEntry(float(K), exc, freq, bound, lo, hi, freq <= bound + 3.0 * half))
    return TailReport(sigma, trials, tuple(entries))


@dataclass(frozen=True)
class MomentReport:
    p: int
    lhs: float              # (E tr X^{2p})^{1/2p}, empirical
    lhs_ci: tuple[float, float]
    rhs: float              # sqrt(2p-1) (tr[(E X^2)^p])^{1/2p}, exact
    passed: bool


def moment_bound_check(ens: StructuredEnsemble, p: int, trials: int = 10000,
                       bootstrap: int = 200) -> MomentReport:
    """(E tr X^{2p})^{1/2p} <= sqrt(2p-1) (tr[(E X^2)^p])^{1/2p}."""
    if not 1 <= p <= 8:
        raise ValueError("p must be in 1..8")
    g = _draw_g(ens, trials)
    if ens.is_diagonal:
        lam = g @ np.real(np.einsum("sii->si", ens.coeffs))  # eigenvalues directly
        traces = np.sum(lam ** (2 * p), axis=1)
    else:
        traces = np.empty(trials)
        chunk = max(1, int(2e7 / (ens.dim * ens.dim)))
        for lo in range(0, trials, chunk):
            Xs = np.einsum("ts,sij->tij", g[lo : lo + chunk], ens.coeffs)
            ev = np.linalg.eigvalsh(Xs)
            traces[lo : lo + chunk] = np.sum(ev ** (2 * p), axis=1)
    mean = float(traces.mean())
    lhs = mean ** (1.0 / (2 * p))
    # bootstrap CI on the 1/2p-th root of the mean
    bs = Stream(derive_stream_seed(ens.seed, 10_000_019))
    idx = np.minimum((bs.uniforms(bootstrap * trials) * trials).astype(np.int64),
                     trials - 1).reshape(bootstrap, trials)
    bmeans = traces[idx].mean(axis=1) ** (1.0 / (2 * p))
    ci = (float(np.quantile(bmeans, 0.005)), float(np.quantile(bmeans, 0.995)))
    EX2 = ens.coeff_variance() * np.einsum("sij,sjk->ik", ens.coeffs, ens.coeffs)
    ev = np.linalg.eigvalsh(EX2)
    rhs = math.sqrt(2 * p - 1) * float(np.sum(ev**p)) ** (1.0 / (2 * p))
    slack = max(ci[1] - lhs, 1e-12)
    return MomentReport(p, lhs, ci, rhs, lhs <= rhs + slack)


@dataclass(frozen=True)
class InequalityReport:
    name: str
    trials: int
    violations: int
    worst_margin: float  # most negative value of rhs - lhs observed

    @property
    def passed(self) -> bool:
        return self.violations == 0


def trace_inequality_check(dim: int, p: int, ell: int, trials: int = 10000,
                           seed: int = 0, slack: float = 1e-9) -> InequalityReport:
    """tr[A B^{2p-2-ell} A B^ell] <= tr[A^2 B^{2p-2}] on random Hermitian pairs."""
    if not 0 <= ell <= 2 * p - 2:
        raise ValueError("need 0 <= ell <= 2p-2")
    stream = Stream(derive_stream_seed(seed, 7))
    worst = np.inf
    violations = 0
    for _ in range(trials):
        A = random_hermitian(dim, stream)
        B = random_hermitian(dim, stream)
        w, Q = np.linalg.eigh(B)
        At = Q.T @ A @ Q
        lhs = float(np.einsum("ij,ji->", At * (w[None, :] ** (2 * p - 2 - ell)), At * (w[None, :] ** ell)))
        rhs = float(np.einsum("ij,ji,j->", At, At, w ** (2 * p - 2)))
        margin = rhs - lhs + slack * max(1.0, abs(rhs))
        if margin < 0:
            violations += 1
        worst = min(worst, rhs - lhs)
    return InequalityReport(f"trace p={p} ell={ell}", trials, violations, float(worst))


def holder_jensen_check(dim: int, p: float, trials: int = 10000, seed: int = 0,
                        slack: float = 1e-9) -> tuple[InequalityReport, InequalityReport]:
    """Matrix Holder tr[AB] <= tr|A|^p^{1/p} tr|B|^{p'}^{1/p'} and the diagonal
    Jensen bound sum phi(a_jj) <= tr phi(A) for phi in {x^2, x^4, exp}."""
    if p <= 1:
        raise ValueError("need p > 1")
    q = p / (p - 1.0)
    stream = Stream(derive_stream_seed(seed, 13))
    worst_h, viol_h = np.inf, 0
    worst_j, viol_j = np.inf, 0
    phis = [lambda x: x**2, lambda x: x**4, np.exp]
    for _ in range(trials):
        A = random_hermitian(dim, stream)
        B = random_hermitian(dim, stream)
        lhs = float(np.trace(A @ B).real)
        wa = np.linalg.eigvalsh(A)
        wb = np.linalg.eigvalsh(B)
        rhs = float(np.sum(np.abs(wa) ** p) ** (1 / p) * np.sum(np.abs(wb) ** q) ** (1 / q))
        if rhs - lhs + slack * max(1.0, abs(rhs)) < 0:
            viol_h += 1
        worst_h = min(worst_h, rhs - lhs)
        for phi in phis:
            lhs_j = float(np.sum(phi(np.diag(A))))
            rhs_j = float(np.sum(phi(wa)))
            if rhs_j - lhs_j + slack * max(1.0, abs(rhs_j)) < 0:
                viol_j += 1
            worst_j = min(worst_j, rhs_j - lhs_j)
    return (
        InequalityReport(f"holder p={p}", trials, viol_h, float(worst_h)),
        InequalityReport("jensen", trials, viol_j, float(worst_j)),
    )
