"""Bit-stable file emission: CSV with shortest round-trip decimals, JSON records."""

from __future__ import annotations

import json
from pathlib import Path


def format_cell(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return repr(x)  # shortest decimal that round-trips
    return str(x)


def write_csv(path, columns, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format_cell(c) for c in row))
    path.write_text("\n".join(lines) + "\n", newline="\n")


def write_json(path, payload: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_coerce) + "\n")


def _coerce(obj):
    try:
        import numpy as np

        if isinstance(obj, np.generic):
            return obj.item()
        if isinstance(obj, np.ndarray):
            return obj.tolist()
    except ImportError:
        pass
    return str(obj)


def ols_loglog(xs, ys):
    """OLS slope of log(y) on log(x) with its standard error."""
    import numpy as np

    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    n = len(lx)
    if n < 2:
        return None, None
    A = np.stack([lx, np.ones(n)], axis=1)
    coef, res, *_ = np.linalg.lstsq(A, ly, rcond=None)
    slope = float(coef[0])
    if n == 2:
        return slope, 0.0
    resid = ly - A @ coef
    s2 = float(resid @ resid) / (n - 2)
    sxx = float(np.sum((lx - lx.mean()) ** 2))
    return slope, float((s2 / sxx) ** 0.5)
