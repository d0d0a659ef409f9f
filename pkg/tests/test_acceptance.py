"""Acceptance suite: one test per headline criterion.

Each test prints ``ACCEPTANCE <name>: PASS|FAIL <detail>`` to the terminal
(even under output capture) and then asserts the criterion at its stated
tolerance. Run just this file with ``pytest tests/test_acceptance.py -v``.
"""
import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import special, stats

from lrdfield import config as cfg
from lrdfield import covariance as cv
from lrdfield import experiments as ex
from lrdfield import functionals as F
from lrdfield import hermite as hm
from lrdfield import rng
from lrdfield import windows as W
from lrdfield.fieldsim import GridSpec, simulate, simulate_random_wave
from oracles import additive_loop, lattice_oracle, riemann_loop, square_closed_additive, square_closed_riemann

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture
def report(capsys):
    def emit(name, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} {detail}")
        return ok
    return emit


def _load(fname, **over):
    plan, _ = cfg.plan_from_config(CONFIGS / fname, environ={})
    return ex.ExperimentPlan(**{**plan.__dict__, **over}) if over else plan


def test_hermite_suite(report):
    # 11 nodes integrate degree 20 exactly; more nodes only add round-off at the far nodes
    nodes, weights = special.roots_hermitenorm(11)
    weights = weights / math.sqrt(2 * math.pi)
    gram = np.array([[weights @ (hm.hermite_eval(m, nodes) * hm.hermite_eval(k, nodes)) for k in range(11)]
                     for m in range(11)])
    ortho = float(np.max(np.abs(gram - np.diag([math.factorial(m) for m in range(11)]))))

    coeffs = hm.level_excess_coefficients(0.5, 50)
    partial = sum(c * c / math.factorial(j) for j, c in enumerate(coeffs))
    parseval = abs(partial - (1 - stats.norm.cdf(0.5)))

    t = np.linspace(-4, 4, 801)
    moment = max(float(np.max(np.abs(sum(c * hm.hermite_eval(o, t) for o, c in hm.moments_as_hermite(k)) - t**k)))
                 for k in range(7))
    ok = ortho < 1e-8 and parseval < 1e-3 and moment < 1e-9
    report("hermite_suite", ok, f"orthogonality={ortho:.2e} (<1e-8) parseval_gap_J50={parseval:.4g} (<1e-3) "
                                f"moment={moment:.2e} (<1e-9)")
    assert ortho < 1e-8
    assert moment < 1e-9
    assert parseval < 1e-3


def test_covariance_identity(report):
    grid = GridSpec((0.0, 0.0), 0.75, (6, 1))
    lags = 0.75 * np.arange(1, 6)
    prods = []
    for k in range(10000):
        v = simulate_random_wave(cv.bessel(0.0), grid, rng.stream_seed(301, k)).values[:, 0]
        h2 = v * v - 1
        prods.append(h2[0] * h2[1:])
    prods = np.array(prods)
    z = [(prods[:, j].mean() - 2 * special.j0(d) ** 2) / (prods[:, j].std(ddof=1) / 100) for j, d in enumerate(lags)]
    ok = max(abs(v) for v in z) < 3
    report("covariance_identity", ok, "z=" + ",".join(f"{v:+.2f}" for v in z) + " (|z|<3 at 5 lags, 1e4 samples)")
    assert ok


def test_lattice_oracle(report):
    shapes = {"disc": W.disc(), "square": W.square(), "lshape": W.lshape(), "step": W.step_window()}
    bad = [(name, r) for name, w in shapes.items() for r in (3.0, 7.5, 20.0)
           if W.lattice(w, r).as_set() != lattice_oracle(w, r)]
    report("lattice_oracle", not bad, f"mismatches={bad} over 4 windows x 3 scales")
    assert not bad


def test_functional_oracles(report):
    g6 = F.WeightFunction("one_plus_sum_sq")
    worst = 0.0
    for k in range(10):
        seed = rng.stream_seed(302, k)
        f = simulate(cv.bessel(0.0), F.window_grid(W.square(), 10.0, 0.1), seed)
        yc = F.riemann_functional(f, W.square(), 10.0, 2, g6, 0.1, alpha=0.5).value
        yd = F.additive_functional(f, W.square(), 10.0, 2, g6, alpha=0.5).value
        worst = max(worst, abs(yc - square_closed_riemann(f, 10.0, 0.1)), abs(yd - square_closed_additive(f, 10.0)))
        w, g = W.step_window(), F.WeightFunction("log_weighted", (2.0, 3.0))
        f = simulate(cv.bessel(0.0), F.window_grid(w, 7.5, 0.25), seed)
        for got, want in ((F.riemann_raw(f, w, 7.5, 3, g, 0.25), riemann_loop(f, w, 7.5, 3, g, 0.25)),
                          (F.additive_raw(f, w, 7.5, 3, g), additive_loop(f, lattice_oracle(w, 7.5), 3, g))):
            worst = max(worst, abs(got - want) / max(1.0, abs(want)))
    ok = worst < 1e-12
    report("functional_oracles", ok, f"max_error={worst:.2e} (<1e-12) over 10 seeds, closed square forms included")
    assert ok


@pytest.mark.slow
def test_discretization_trend(report):
    plan = _load("msd_square.cfg")
    t0 = time.time()
    s = ex.msd_experiment(plan)
    ratio = s.means[-1] / s.means[0]
    decreasing = bool(np.all(np.diff(s.means) < 0))
    ok = decreasing and ratio < 0.15
    report("discretization_trend", ok, "means=" + ",".join(f"{m:.4g}" for m in s.means) +
           f" ratio80/10={ratio:.4g} (<0.15) reps={plan.reps}x{plan.outer} time={time.time() - t0:.0f}s")
    assert decreasing
    assert ratio < 0.15


def test_reference_rate(report):
    plan = _load("reference_square.cfg")
    s = ex.reference_distance_experiment(plan)
    decreasing = bool(np.all(np.diff(s.means) < 0))
    slope = ex.fit_rates(s.r_values, s.means)["power"].slope
    ok = decreasing and -2.6 <= slope <= -1.4
    report("reference_rate", ok, "means=" + ",".join(f"{m:.4g}" for m in s.means) + f" power_slope={slope:.3f} ([-2.6,-1.4])")
    assert decreasing
    assert -2.6 <= slope <= -1.4


def test_non_gaussianity(report):
    plan = _load("qq_cauchy.cfg")
    s = ex.qq_experiment(plan)
    values = s.values_at(plan.r_values[0])
    t = ex.tail_departure(values, q=0.99, n_boot=1000, seed=plan.base_seed)
    ok = abs(t["sample"] - t["gaussian"]) > 3 * t["se"]
    report("non_gaussianity", ok, f"n={len(values)} q99_sample={t['sample']:.3f} q99_gauss={t['gaussian']:.3f} "
                                  f"boot_se={t['se']:.3f} z={t['z']:.2f} (>3)")
    assert ok


def test_discrepancy_trend(report):
    plan = _load("msd_square.cfg", name="discrepancy_trend", outer=1, base_seed=2027)
    s = ex.msd_experiment(plan)
    ok = bool(np.all(np.diff(s.means) < 0))
    report("discrepancy_trend", ok, "means=" + ",".join(f"{m:.4g}" for m in s.means) + f" reps={plan.reps}")
    assert ok


def test_determinism(report, tmp_path):
    plans = [
        _load("reference_square.cfg", reps=3, r_values=(20.0, 60.0, 100.0), name="ref"),
        _load("msd_square.cfg", reps=2, outer=2, r_values=(4.0, 6.0, 8.0), name="mc"),
        _load("qq_cauchy.cfg", reps=20, r_values=(10.0,), name="qq"),
    ]
    digests = {}
    for n_jobs in (1, 2, 3):
        files = {}
        for plan in plans:
            _, target = ex.run_plan(plan, tmp_path / f"j{n_jobs}", n_jobs, n_boot=100)
            files.update({f"{plan.name}/{p.name}": p.read_bytes() for p in sorted(target.iterdir())})
        digests[n_jobs] = files
    rerun = {}
    for plan in plans:
        _, target = ex.run_plan(plan, tmp_path / "again", 1, n_boot=100)
        rerun.update({f"{plan.name}/{p.name}": p.read_bytes() for p in sorted(target.iterdir())})
    ok = digests[1] == digests[2] == digests[3] == rerun
    report("determinism", ok, f"{len(digests[1])} CSV files byte-identical across n_jobs=1,2,3 and a rerun")
    assert ok
