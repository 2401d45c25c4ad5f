"""Full-scale module invariants beyond the acceptance suite.

These mirror acceptance-scale ensembles at sizes that take hours on small
boxes, so they only run when DYSONLAB_FULL=1; reduced-size versions of the
same properties run in the regular suite (see decisions ledger).
"""

import math
import os

import numpy as np
import pytest

from dysonlab.xlab import ExperimentSpec, run

full = pytest.mark.skipif(
    not os.environ.get("DYSONLAB_FULL"),
    reason="full-scale invariant; set DYSONLAB_FULL=1 (hours of compute)",
)

SEED = 20260810


def test_tj_order_ratios_reduced_scale():
    # per-order ratio ||T_{j+1}|| / ||T_j|| decreases in j for most trials
    rec = run(ExperimentSpec(mode="tj-orders", d=2, N=64, R=16,
                             distribution="gaussian", t_grid=(16.0,), order=5,
                             trials=24, seed=SEED, lanczos_iters=10,
                             allow_wraparound=True))
    assert rec.passed, rec.summary
    assert rec.summary["ratio_decreasing_fraction"] >= 0.8


@full
def test_tj_order_ratios_full_scale():
    rec = run(ExperimentSpec(mode="tj-orders", d=2, N=512, R=64,
                             distribution="gaussian", t_grid=(16.0,), order=5,
                             trials=64, seed=SEED, lanczos_iters=10,
                             allow_wraparound=True))
    assert rec.passed, rec.summary


@full
def test_free_comparison_smallest_lambda_leg():
    # the (0.04, 0.02) adjacent-ratio leg of the deviation-growth invariant
    rec = run(ExperimentSpec(mode="free-comparison", d=2, N=512, R=64,
                             distribution="gaussian", lam_grid=(0.04, 0.02),
                             trials=32, seed=SEED, dt=0.08,
                             allow_wraparound=True))
    assert rec.passed, rec.summary
    lo = math.sqrt(2.0) / 3.0
    hi = 3.0 * math.sqrt(2.0)
    for r in rec.summary["adjacent_ratios"]:
        assert lo <= r <= hi
