"""Experiment orchestration: spec in, reproducible record + files out."""

from __future__ import annotations

import time
from pathlib import Path

from .. import __version__
from .config import MODES, ExperimentSpec, RunRecord
from .io import write_csv, write_json


def _manifest(calibrated: dict) -> dict:
    import numpy
    import scipy

    versions = {"dysonlab": __version__, "numpy": numpy.__version__,
                "scipy": scipy.__version__}
    try:
        import torch

        versions["torch"] = torch.__version__
    except ImportError:
        pass
    return {"versions": versions, "calibrated": calibrated}


def run(spec: ExperimentSpec) -> RunRecord:
    from . import modes

    t0 = time.perf_counter()
    spec.check_wraparound()
    fn = {
        "t1-scaling": modes.mode_t1_scaling,
        "tj-orders": modes.mode_tj_orders,
        "dyson-truncation": modes.mode_dyson_truncation,
        "free-comparison": modes.mode_free_comparison,
        "projection-compare": modes.mode_projection_compare,
        "floquet-localization": modes.mode_floquet_localization,
        "nck-bench": modes.mode_nck_bench,
        "oracle-selftest": modes.mode_oracle_selftest,
    }[spec.mode]
    columns, rows, summary, passed, failures, calibrated = fn(spec)
    passed = passed and not failures  # zero tolerated failures by default
    record = RunRecord(
        spec=spec.to_dict(),
        rows=[list(r) for r in rows],
        columns=tuple(columns),
        summary=summary,
        passed=bool(passed),
        failures=list(failures),
        wallclock=time.perf_counter() - t0,
        version=__version__,
        manifest=_manifest(calibrated),
    )
    if spec.out_dir:
        out = Path(spec.out_dir)
        write_csv(out / f"{spec.mode}.csv", record.columns, rows)
        payload = record.to_dict()
        payload["rows"] = f"see {spec.mode}.csv"
        write_json(out / f"{spec.mode}.record.json", payload)
        write_json(out / f"{spec.mode}.manifest.json", record.manifest)
    return record


__all__ = ["ExperimentSpec", "RunRecord", "MODES", "run"]
