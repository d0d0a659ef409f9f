"""Monte Carlo drivers: discretisation MSD, reference-distance MSD and Q-Q data.

Each replication draws its own key from ``rng.stream_seed`` so results do
not depend on the number of workers or on scheduling.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from joblib import Parallel, delayed
from scipy import stats

from . import rng as _rng
from .covariance import ONE, CovarianceModel, SlowlyVarying
from .errors import DegenerateSampleError, FitError, LrdError, PlanError, SimulationError
from .fieldsim import DEFAULT_WAVES, simulate
from .functionals import (WeightFunction, additive_raw, discrepancy, normalize, riemann_raw,
                          window_grid)

KINDS = ("mc", "refmc", "qq")


@dataclass(frozen=True, eq=False)
class ExperimentPlan:
    name: str
    model: CovarianceModel
    window: object
    weight: WeightFunction
    kappa: int
    alpha: float
    h: float
    r_values: tuple
    reps: int
    outer: int = 1
    base_seed: int = 0
    R: Optional[float] = None
    method: Optional[str] = None
    waves: int = DEFAULT_WAVES
    L: SlowlyVarying = ONE
    convention: str = "theorem4"
    kind: str = "mc"

    def __post_init__(self):
        object.__setattr__(self, "r_values", tuple(float(r) for r in self.r_values))
        self.validate()

    def validate(self):
        if self.kind not in KINDS:
            raise PlanError(f"unknown experiment kind {self.kind!r}")
        if not self.r_values:
            raise PlanError("plan needs at least one r")
        if any(r <= 0 for r in self.r_values):
            raise PlanError("r values must be positive")
        if any(b <= a for a, b in zip(self.r_values, self.r_values[1:])):
            raise PlanError("r values must be strictly increasing")
        if self.reps < (1 if self.kind == "qq" else 2):
            raise PlanError("need at least two replications per r")
        if self.outer < 1:
            raise PlanError("need at least one outer repetition")
        if self.model.dimension != self.window.dimension:
            raise PlanError("model and window dimensions differ")
        if self.kind == "refmc":
            if self.R is None:
                raise PlanError("reference experiment needs R")
            bad = [r for r in self.r_values if r > self.R]
            if bad:
                raise PlanError(f"r = {bad[0]:g} exceeds the reference scale R = {self.R:g}")
        if self.kind != "qq":
            m = round(1.0 / self.h)
            if m < 1 or abs(1.0 / m - self.h) > 1e-12:
                raise PlanError(f"h must be 1/m for an integer m, got {self.h}")
        # raises ParameterError for kappa < 1 or alpha outside (0, n/kappa)
        normalize(self.r_values[0], self.kappa, self.alpha, self.window.dimension, self.L, None,
                  self.convention)


@dataclass
class McSummary:
    name: str
    kind: str
    rows: list
    r_values: tuple
    means: np.ndarray
    ses: np.ndarray
    counts: np.ndarray
    fits: dict = field(default_factory=dict)

    def values_at(self, r: float) -> np.ndarray:
        return np.array([row[4] for row in self.rows if row[1] == r])


@dataclass(frozen=True)
class Fit:
    model: str
    intercept: float
    slope: float
    r2: float


def _summarize(plan: ExperimentPlan, rows) -> McSummary:
    means, ses, counts = [], [], []
    for r in plan.r_values:
        v = np.array([row[4] for row in rows if row[1] == r])
        means.append(v.mean())
        ses.append(v.std(ddof=1) / math.sqrt(len(v)) if len(v) > 1 else float("nan"))
        counts.append(len(v))
    return McSummary(plan.name, plan.kind, list(rows), plan.r_values, np.array(means),
                     np.array(ses), np.array(counts))


def _simulate(plan, grid, seed, r, rep):
    try:
        return simulate(plan.model, grid, seed, plan.method, plan.waves)
    except LrdError as exc:
        raise type(exc)(f"{exc} (r={r:g}, rep={rep})") from exc
    except Exception as exc:
        raise SimulationError(f"simulation failed at r={r:g}, rep={rep}: {exc}") from exc


def _run(tasks, n_jobs):
    if n_jobs == 1:
        return [fn(*args) for fn, *args in tasks]
    return Parallel(n_jobs=n_jobs)(delayed(fn)(*args) for fn, *args in tasks)


# --------------------------------------------------------- discretisation MSD


def _msd_task(plan: ExperimentPlan, outer: int, ri: int, rep: int):
    r = plan.r_values[ri]
    seed = _rng.stream_seed(plan.base_seed, (_rng.experiment_code("mc"), outer, ri), rep)
    grid = window_grid(plan.window, r, plan.h)
    fld = _simulate(plan, grid, seed, r, rep)
    val = discrepancy(fld, plan.window, r, plan.kappa, plan.weight, plan.h, plan.alpha, plan.L,
                      plan.convention)
    return (plan.name, r, rep, outer, float(val), seed)


def msd_experiment(plan: ExperimentPlan, n_jobs: int = 1) -> McSummary:
    """E[(Y_c(r) - Y_d(r))^2] estimated from independent fields per (r, rep)."""
    tasks = [(_msd_task, plan, o, ri, k) for o in range(plan.outer)
             for ri in range(len(plan.r_values)) for k in range(plan.reps)]
    return _summarize(plan, _run(tasks, n_jobs))


# --------------------------------------------------------- reference distance


def _ref_task(plan: ExperimentPlan, outer: int, rep: int):
    R = plan.R
    seed = _rng.stream_seed(plan.base_seed, (_rng.experiment_code("refmc"), outer), rep)
    grid = window_grid(plan.window, R, plan.h, extra=[(plan.window, r) for r in plan.r_values])
    fld = _simulate(plan, grid, seed, R, rep)
    n = plan.window.dimension
    yc = riemann_raw(fld, plan.window, R, plan.kappa, plan.weight, plan.h) / normalize(
        R, plan.kappa, plan.alpha, n, plan.L, plan.weight, plan.convention)
    out = []
    for r in plan.r_values:
        yd = additive_raw(fld, plan.window, r, plan.kappa, plan.weight) / normalize(
            r, plan.kappa, plan.alpha, n, plan.L, plan.weight, plan.convention)
        out.append((plan.name, r, rep, outer, float((yc - yd) ** 2), seed))
    return out


def reference_distance_experiment(plan: ExperimentPlan, n_jobs: int = 1) -> McSummary:
    """E[(Y_c(R) - Y_d(r))^2]: one field per replication, shared by all r <= R."""
    if plan.R is None:
        raise PlanError("reference experiment needs R")
    bad = [r for r in plan.r_values if r > plan.R]
    if bad:
        raise PlanError(f"r = {bad[0]:g} exceeds the reference scale R = {plan.R:g}")
    tasks = [(_ref_task, plan, o, k) for o in range(plan.outer) for k in range(plan.reps)]
    rows = [row for chunk in _run(tasks, n_jobs) for row in chunk]
    rows.sort(key=lambda t: (t[3], plan.r_values.index(t[1]), t[2]))
    return _summarize(plan, rows)


# ------------------------------------------------------------------ Q-Q data


def _qq_task(plan: ExperimentPlan, outer: int, rep: int):
    r = plan.r_values[0]
    seed = _rng.stream_seed(plan.base_seed, (_rng.experiment_code("qq"), outer), rep)
    grid = window_grid(plan.window, r, 1.0)
    fld = _simulate(plan, grid, seed, r, rep)
    d = normalize(r, plan.kappa, plan.alpha, plan.window.dimension, plan.L, plan.weight,
                  plan.convention)
    return (plan.name, r, rep, outer, additive_raw(fld, plan.window, r, plan.kappa, plan.weight) / d, seed)


def qq_experiment(plan: ExperimentPlan, n_jobs: int = 1) -> McSummary:
    """Samples of the normalised additive functional at the first r of the plan."""
    tasks = [(_qq_task, plan, o, k) for o in range(plan.outer) for k in range(plan.reps)]
    rows = _run(tasks, n_jobs)
    one = ExperimentPlan(**{**plan.__dict__, "r_values": plan.r_values[:1]})
    return _summarize(one, rows)


def qq_data(samples):
    """Standardised order statistics against N(0, 1) quantiles at (k - 0.5)/N."""
    x = np.asarray(samples, dtype=float)
    if x.size < 10:
        raise DegenerateSampleError("need at least ten samples")
    sd = x.std(ddof=1)
    if not np.isfinite(sd) or sd == 0:
        raise DegenerateSampleError("sample has zero variance")
    z = np.sort((x - x.mean()) / sd)
    p = (np.arange(1, x.size + 1) - 0.5) / x.size
    return stats.norm.ppf(p), z


def tail_departure(samples, q: float = 0.99, n_boot: int = 1000, seed: int = 0) -> dict:
    """Standardised sample q-quantile versus the Gaussian one, with a bootstrap SE.

    Each bootstrap resample is restandardised before taking its quantile.
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 2 or x.std(ddof=1) == 0:
        raise DegenerateSampleError("sample has zero variance")

    def stdq(s):
        return np.quantile((s - s.mean()) / s.std(ddof=1), q)

    gen = _rng.generator(_rng.stream_seed(seed, _rng.experiment_code("bootstrap")))
    idx = gen.integers(0, x.size, size=(n_boot, x.size))
    boot = np.array([stdq(x[i]) for i in idx])
    sample_q = float(stdq(x))
    gauss_q = float(stats.norm.ppf(q))
    se = float(boot.std(ddof=1))
    return {"q": q, "sample": sample_q, "gaussian": gauss_q, "se": se,
            "z": (sample_q - gauss_q) / se if se > 0 else float("inf")}


# ---------------------------------------------------------------- rate fits


def fit_rates(r_values, means) -> dict:
    """Least-squares fits log m = a + b log r (power) and log m = a + b r (exponential)."""
    r = np.asarray(r_values, dtype=float)
    m = np.asarray(means, dtype=float)
    if r.size < 3:
        raise FitError("need at least three r values to fit a rate")
    bad = [(ri, mi) for ri, mi in zip(r, m) if not (np.isfinite(mi) and mi > 0)]
    if bad:
        raise FitError(f"non-positive or non-finite mean {bad[0][1]!r} at r = {bad[0][0]:g}")
    y = np.log(m)
    out = {}
    for name, x in (("power", np.log(r)), ("exponential", r)):
        res = stats.linregress(x, y)
        out[name] = Fit(name, float(res.intercept), float(res.slope), float(res.rvalue**2))
    return out


def summary_fits(summary: McSummary) -> dict:
    summary.fits = fit_rates(summary.r_values, summary.means)
    return summary.fits


# --------------------------------------------------------------------- output


def _writer(path):
    fh = open(path, "w", newline="")
    return fh, csv.writer(fh, lineterminator="\n")


def write_raw(path, rows):
    fh, w = _writer(path)
    with fh:
        w.writerow(["experiment", "r", "rep", "outer", "value", "seed"])
        for name, r, rep, outer, value, seed in rows:
            w.writerow([name, repr(float(r)), rep, outer, repr(float(value)), seed])


def write_summary(path, summary: McSummary):
    fh, w = _writer(path)
    with fh:
        w.writerow(["r", "mean", "se", "n"])
        for r, m, s, n in zip(summary.r_values, summary.means, summary.ses, summary.counts):
            w.writerow([repr(float(r)), repr(float(m)), repr(float(s)), int(n)])


def read_summary(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "r" not in rows[0] or "mean" not in rows[0]:
        raise FitError(f"{path} is not a summary table with r and mean columns")
    return [float(t["r"]) for t in rows], [float(t["mean"]) for t in rows]


def write_fit(path, fits: dict):
    fh, w = _writer(path)
    with fh:
        w.writerow(["model", "intercept", "slope", "r2"])
        for f in fits.values():
            w.writerow([f.model, repr(f.intercept), repr(f.slope), repr(f.r2)])


def write_qq(path, theoretical, sample):
    fh, w = _writer(path)
    with fh:
        w.writerow(["theoretical", "sample"])
        for t, s in zip(theoretical, sample):
            w.writerow([repr(float(t)), repr(float(s))])


def write_tail(path, tail: dict):
    fh, w = _writer(path)
    with fh:
        w.writerow(["q", "sample", "gaussian", "se", "z"])
        w.writerow([repr(float(tail[k])) for k in ("q", "sample", "gaussian", "se", "z")])


def run_plan(plan: ExperimentPlan, out_dir, n_jobs: int = 1, n_boot: int = 1000) -> tuple:
    """Run a plan and write its CSV files into ``out_dir/<name>/``."""
    target = Path(out_dir) / plan.name
    target.mkdir(parents=True, exist_ok=True)
    if plan.kind == "qq":
        summary = qq_experiment(plan, n_jobs)
        write_raw(target / "raw.csv", summary.rows)
        values = summary.values_at(summary.r_values[0])
        write_qq(target / "qq.csv", *qq_data(values))
        write_tail(target / "tail.csv", tail_departure(values, n_boot=n_boot, seed=plan.base_seed))
        return summary, target
    runner = msd_experiment if plan.kind == "mc" else reference_distance_experiment
    summary = runner(plan, n_jobs)
    write_raw(target / "raw.csv", summary.rows)
    write_summary(target / "summary.csv", summary)
    if len(plan.r_values) >= 3:
        write_fit(target / "fit.csv", summary_fits(summary))
    return summary, target
