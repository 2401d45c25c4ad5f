"""dysonlab command line: one subcommand per experiment mode."""

from __future__ import annotations

import argparse
import json
import sys

from .config import MODES, ExperimentSpec


def _floats(text: str):
    return tuple(float(x) for x in text.split(",") if x)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dysonlab",
        description="Monte Carlo experiments for random Schrodinger dynamics",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode)
        p.add_argument("--dim", type=int, default=2)
        p.add_argument("--size", type=int, default=256)
        p.add_argument("--radius", type=int, default=32)
        p.add_argument("--lambda", dest="lam", type=float, default=0.05)
        p.add_argument("--dist", choices=("gauss", "rademacher", "uniform"), default="gauss")
        p.add_argument("--tgrid", type=_floats, default=())
        p.add_argument("--delta-grid", type=_floats, default=())
        p.add_argument("--lambda-grid", type=_floats, default=())
        p.add_argument("--energy", type=float, default=1.0)
        p.add_argument("--theta", type=float, default=0.0)
        p.add_argument("--tau", type=float, default=None,
                       help="drive period; sets omega = 2 pi / tau")
        p.add_argument("--omega", type=float, default=0.5)
        p.add_argument("--envelope", choices=("constant", "cosine"), default="constant")
        p.add_argument("--order", type=int, default=5)
        p.add_argument("--trunc", type=int, default=4)
        p.add_argument("--trials", type=int, default=16)
        p.add_argument("--seed", type=int, default=20260810)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--allow-wraparound", action="store_true")
        p.add_argument("--backend", choices=("auto", "numpy", "torch"), default="auto")
        p.add_argument("--double", action="store_true", help="use complex128 throughout")
        p.add_argument("--dt", type=float, default=None)
        p.add_argument("--quad-h", type=float, default=None)
        p.add_argument("--iters", type=int, default=12, help="norm-estimation iterations")
        p.add_argument("--tol", action="append", default=[], metavar="KEY=VALUE",
                       help="tolerance override, repeatable")
        p.add_argument("--inject-nan", action="store_true", help=argparse.SUPPRESS)
    return parser


def spec_from_args(args) -> ExperimentSpec:
    tolerances = {}
    for item in args.tol:
        key, _, val = item.partition("=")
        if not val:
            raise SystemExit(f"bad --tol entry {item!r}; expected KEY=VALUE")
        tolerances[key] = float(val)
    omega = args.omega
    if args.tau is not None:
        omega = 2.0 * 3.141592653589793 / args.tau
    dist = {"gauss": "gaussian"}.get(args.dist, args.dist)
    return ExperimentSpec(
        mode=args.mode,
        d=args.dim,
        N=args.size,
        R=args.radius,
        lam=args.lam,
        distribution=dist,
        envelope=args.envelope,
        omega=omega,
        t_grid=args.tgrid,
        delta_grid=args.delta_grid,
        lam_grid=args.lambda_grid,
        energy=args.energy,
        theta0=args.theta,
        order=args.order,
        trunc=args.trunc,
        trials=args.trials,
        seed=args.seed,
        out_dir=args.out,
        allow_wraparound=args.allow_wraparound,
        tolerances=tolerances,
        backend=args.backend,
        single_precision=not args.double,
        dt=args.dt,
        quad_h=args.quad_h,
        lanczos_iters=args.iters,
        inject_nan=args.inject_nan,
    )


def main(argv=None) -> int:
    from . import run

    args = build_parser().parse_args(argv)
    spec = spec_from_args(args)
    try:
        record = run(spec)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps({"mode": spec.mode, "passed": record.passed,
                      "wallclock_s": round(record.wallclock, 3),
                      "summary": record.summary}, indent=2, default=str))
    for f in record.failures:
        print(f"failure: {f}", file=sys.stderr)
    return 0 if record.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
