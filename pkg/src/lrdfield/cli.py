"""Command-line entry point.

Every failure prints ``error code=<CODE> message=<text>`` on stderr and exits
with status 2 (usage errors) or 1 (everything else).
"""
from __future__ import annotations

import argparse
import csv
import sys
import warnings
from pathlib import Path

import numpy as np

from . import config as cfg
from . import experiments as ex
from .errors import ApproximationWarning, LrdError
from .fieldsim import simulate, write_realization
from .functionals import additive_functional, riemann_functional, window_grid


class UsageError(Exception):
    code = "USAGE"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fail(code, message, status):
    message = " ".join(str(message).split())
    print(f"error code={code} message={message}", file=sys.stderr)
    return status


def _common_field(p):
    p.add_argument("--model", required=True, help="covariance spec, e.g. bessel:v=0")
    p.add_argument("--window", required=True, help="window spec, e.g. square or disc:radius=1")
    p.add_argument("--r", type=float, required=True, help="scale factor")
    p.add_argument("--h", type=float, default=1.0, help="grid step 1/m")
    p.add_argument("--seed", type=int, required=True, help="replication key")
    p.add_argument("--method", choices=("random_wave", "circulant"), default=None)
    p.add_argument("--waves", type=int, default=2000)


def _plan_flags(p):
    p.add_argument("--config", required=True)
    p.add_argument("--reps", type=int)
    p.add_argument("--outer", type=int)
    p.add_argument("--base-seed", type=int)
    p.add_argument("--n-jobs", type=int)
    p.add_argument("--name")
    p.add_argument("--out", default="out", help="output root; files go to <out>/<name>/")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="lrdfield", description="LRD random fields and Hermite functionals")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("simulate", help="simulate one field and write a binary dump")
    _common_field(p)
    p.add_argument("--output", required=True, help="path of the .bin dump (sidecar <path>.json)")

    p = sub.add_parser("functional", help="evaluate one normalised functional")
    _common_field(p)
    p.add_argument("--kappa", type=int, default=2)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--g", default="constant", help="weight spec, e.g. one_plus_sum_sq")
    p.add_argument("--kind", choices=("additive", "riemann"), default="additive")
    p.add_argument("--convention", choices=("theorem4", "theorem7"), default="theorem4")

    for name, hlp in (("mc", "discretisation mean-square distance"),
                      ("refmc", "distance to the reference-scale functional")):
        _plan_flags(sub.add_parser(name, help=hlp))

    p = sub.add_parser("fit", help="fit power and exponential rates to a summary CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--output")

    p = sub.add_parser("qq", help="Q-Q pairs and tail departure")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config")
    src.add_argument("--input", help="raw CSV whose value column holds the samples")
    p.add_argument("--reps", type=int)
    p.add_argument("--outer", type=int)
    p.add_argument("--base-seed", type=int)
    p.add_argument("--n-jobs", type=int)
    p.add_argument("--name")
    p.add_argument("--out", default="out")
    p.add_argument("--boot", type=int, default=1000)
    return ap


def _field(args):
    model = cfg.model_from_spec(args.model)
    window = cfg.window_from_spec(args.window)
    grid = window_grid(window, args.r, args.h)
    return model, window, simulate(model, grid, args.seed, args.method, args.waves)


def _cmd_simulate(args):
    _, _, fld = _field(args)
    write_realization(args.output, fld)
    print(f"simulate method={fld.method} extent={'x'.join(map(str, fld.grid.extent))} "
          f"seed={fld.seed} output={args.output}")


def _cmd_functional(args):
    _, window, fld = _field(args)
    g = cfg.weight_from_spec(args.g)
    kw = dict(alpha=args.alpha, convention=args.convention)
    if args.kind == "additive":
        res = additive_functional(fld, window, args.r, args.kappa, g, **kw)
    else:
        res = riemann_functional(fld, window, args.r, args.kappa, g, args.h, **kw)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["kind", "r", "kappa", "h", "value", "raw", "normalization", "seed"])
    w.writerow([res.kind, repr(res.r), res.kappa, "" if res.h is None else repr(res.h),
                repr(res.value), repr(res.raw), repr(res.normalization), res.seed])


def _plan(args, kind):
    over = {"reps": args.reps, "outer": args.outer, "base_seed": args.base_seed,
            "n_jobs": args.n_jobs, "name": args.name, "kind": kind}
    return cfg.plan_from_config(args.config, over)


def _cmd_mc(args, kind):
    plan, n_jobs = _plan(args, kind)
    summary, target = ex.run_plan(plan, args.out, n_jobs)
    means = " ".join(f"{m:.6g}" for m in summary.means)
    print(f"{kind} name={plan.name} reps={plan.reps} outer={plan.outer} means={means} out={target}")


def _cmd_fit(args):
    r, means = ex.read_summary(args.input)
    fits = ex.fit_rates(r, means)
    if args.output:
        ex.write_fit(args.output, fits)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["model", "intercept", "slope", "r2"])
    for f in fits.values():
        w.writerow([f.model, repr(f.intercept), repr(f.slope), repr(f.r2)])


def _cmd_qq(args):
    if args.config:
        plan, n_jobs = _plan(args, "qq")
        summary, target = ex.run_plan(plan, args.out, n_jobs, n_boot=args.boot)
        values = summary.values_at(summary.r_values[0])
        tail = ex.tail_departure(values, n_boot=args.boot, seed=plan.base_seed)
    else:
        with open(args.input, newline="") as fh:
            values = np.array([float(row["value"]) for row in csv.DictReader(fh)])
        target = Path(args.out) / (args.name or Path(args.input).parent.name or "qq")
        target.mkdir(parents=True, exist_ok=True)
        ex.write_qq(target / "qq.csv", *ex.qq_data(values))
        tail = ex.tail_departure(values, n_boot=args.boot)
        ex.write_tail(target / "tail.csv", tail)
    print(f"qq n={len(values)} q={tail['q']} sample={tail['sample']:.6g} gaussian={tail['gaussian']:.6g} "
          f"se={tail['se']:.3g} z={tail['z']:.3g} out={target}")


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail("USAGE", exc, 2)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always", ApproximationWarning)
            if args.command == "simulate":
                _cmd_simulate(args)
            elif args.command == "functional":
                _cmd_functional(args)
            elif args.command in ("mc", "refmc"):
                _cmd_mc(args, args.command)
            elif args.command == "fit":
                _cmd_fit(args)
            else:
                _cmd_qq(args)
    except LrdError as exc:
        return _fail(exc.code, exc, 1)
    except OSError as exc:
        return _fail("IO", f"{exc.strerror}: {exc.filename}", 1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
