"""Experiment specifications and reproducible run records."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

MODES = (
    "t1-scaling",
    "tj-orders",
    "dyson-truncation",
    "free-comparison",
    "projection-compare",
    "floquet-localization",
    "nck-bench",
    "oracle-selftest",
)


@dataclass
class ExperimentSpec:
    mode: str
    d: int = 2
    N: int = 256
    R: int = 32
    lam: float = 0.05
    distribution: str = "gaussian"
    envelope: str = "constant"  # constant | cosine
    omega: float = 0.5
    tau: float = 4.0 * math.pi
    t_grid: tuple = ()
    delta_grid: tuple = ()
    lam_grid: tuple = ()
    energy: float = 1.0
    theta0: float = 0.0
    order: int = 5            # highest Dyson order probed
    trunc: int = 4            # truncation M
    trials: int = 16
    seed: int = 20260810
    out_dir: str | None = None
    allow_wraparound: bool = False
    tolerances: dict = field(default_factory=dict)
    # numerics
    backend: str = "auto"     # auto | numpy | torch
    single_precision: bool = True
    dt: float | None = None
    quad_h: float | None = None
    lanczos_iters: int = 12
    inject_nan: bool = False  # test hook for the failure budget

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; options {MODES}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        self.t_grid = tuple(float(t) for t in self.t_grid)
        self.delta_grid = tuple(float(x) for x in self.delta_grid)
        self.lam_grid = tuple(float(x) for x in self.lam_grid)

    def check_wraparound(self) -> None:
        """Finite-speed self-check 10 * t_max < N/2; override with the flag."""
        if not self.t_grid or self.allow_wraparound:
            return
        tmax = max(self.t_grid)
        if 10.0 * tmax >= self.N / 2:
            raise ValueError(
                f"wrap-around guard: 10*t_max = {10 * tmax:g} >= N/2 = {self.N / 2:g}; "
                "pass allow_wraparound to override"
            )

    def tol(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class RunRecord:
    spec: dict
    rows: list
    columns: tuple
    summary: dict
    passed: bool
    failures: list
    wallclock: float
    version: str
    manifest: dict

    def to_dict(self) -> dict:
        return {
            "spec": self.spec,
            "columns": list(self.columns),
            "rows": self.rows,
            "summary": self.summary,
            "passed": self.passed,
            "failures": self.failures,
            "wallclock": self.wallclock,
            "version": self.version,
            "manifest": self.manifest,
        }
