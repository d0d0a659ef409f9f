import csv
import io
import subprocess
import sys
from pathlib import Path

import pytest

from lrdfield.cli import main
from lrdfield.fieldsim import read_values

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
FIELD = ["--model", "cauchy", "--window", "square", "--r", "4", "--h", "0.5", "--seed", "17"]

SMALL_CFG = """
[experiment]
name = small
kind = mc
r = 2; 3; 4
reps = 3
base_seed = 5

[model]
family = cauchy
method = circulant

[window]
shape = square

[weight]
family = one_plus_sum_sq

[functional]
kappa = 2
alpha = 0.5
h = 0.5
"""


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def error_code(err):
    line = err.strip().splitlines()[-1]
    assert line.startswith("error code=")
    return line.split()[1].split("=")[1]


def test_functional_is_reproducible(capsys):
    args = ["functional", *FIELD, "--alpha", "0.5", "--g", "one_plus_sum_sq", "--kind", "riemann"]
    code, first, _ = run(capsys, *args)
    assert code == 0
    _, second, _ = run(capsys, *args)
    assert first == second
    row = next(csv.DictReader(io.StringIO(first)))
    assert row["kind"] == "continuous_riemann" and row["seed"] == "17"
    assert float(row["value"]) == pytest.approx(float(row["raw"]) / float(row["normalization"]), rel=1e-15)


def test_simulate_writes_dump(capsys, tmp_path):
    out = tmp_path / "f.bin"
    code, stdout, _ = run(capsys, "simulate", *FIELD, "--output", str(out))
    assert code == 0 and "seed=17" in stdout
    grid, seed, values = read_values(out)
    assert seed == 17 and values.shape == (17, 17)
    assert (tmp_path / "f.bin.json").exists()


def test_fit_synthetic_summary(capsys, tmp_path):
    p = tmp_path / "summary.csv"
    p.write_text("r,mean,se,n\n" + "".join(f"{r},{r ** -2.0!r},0.0,30\n" for r in (10.0, 20.0, 40.0, 80.0)))
    code, out, _ = run(capsys, "fit", "--input", str(p), "--output", str(tmp_path / "fit.csv"))
    assert code == 0
    rows = {r["model"]: r for r in csv.DictReader(io.StringIO(out))}
    assert float(rows["power"]["slope"]) == pytest.approx(-2.0, abs=1e-9)
    assert (tmp_path / "fit.csv").read_text() == out


def test_mc_run_and_seed_env(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "small.cfg"
    cfg.write_text(SMALL_CFG)
    code, out, _ = run(capsys, "mc", "--config", str(cfg), "--out", str(tmp_path / "a"))
    assert code == 0 and out.startswith("mc name=small")
    raw = (tmp_path / "a" / "small" / "raw.csv").read_text()
    assert (tmp_path / "a" / "small" / "fit.csv").exists()
    monkeypatch.setenv("LRDFIELD_SEED", "5")
    run(capsys, "mc", "--config", str(cfg), "--out", str(tmp_path / "b"), "--n-jobs", "2")
    assert (tmp_path / "b" / "small" / "raw.csv").read_text() == raw
    monkeypatch.setenv("LRDFIELD_SEED", "6")
    run(capsys, "mc", "--config", str(cfg), "--out", str(tmp_path / "c"))
    assert (tmp_path / "c" / "small" / "raw.csv").read_text() != raw
    run(capsys, "mc", "--config", str(cfg), "--out", str(tmp_path / "d"), "--base-seed", "5")
    assert (tmp_path / "d" / "small" / "raw.csv").read_text() == raw


def test_qq_from_raw(capsys, tmp_path):
    p = tmp_path / "run" / "raw.csv"
    p.parent.mkdir()
    p.write_text("experiment,r,rep,outer,value,seed\n" +
                 "".join(f"x,5.0,{k},0,{(k * 37 % 101) / 10!r},1\n" for k in range(50)))
    code, out, _ = run(capsys, "qq", "--input", str(p), "--out", str(tmp_path / "o"), "--boot", "50")
    assert code == 0 and out.startswith("qq n=50")
    assert (tmp_path / "o" / "run" / "qq.csv").exists()


@pytest.mark.parametrize("argv, status, code", [
    ([], 2, "USAGE"),
    (["functional", "--model", "cauchy"], 2, "USAGE"),
    (["simulate", *FIELD, "--method", "magic", "--output", "x"], 2, "USAGE"),
    (["mc", "--config", "/nonexistent/x.cfg"], 1, "CONFIG"),
    (["functional", "--model", "bessel:v=2", "--window", "square", "--r", "3", "--seed", "1",
      "--alpha", "0.5"], 1, "PARAMETER"),
    (["functional", "--model", "cauchy", "--window", "square", "--r", "3", "--seed", "1",
      "--alpha", "0.5", "--kappa", "0"], 1, "PARAMETER"),
    (["functional", "--model", "cauchy", "--window", "square", "--r", "3", "--seed", "1",
      "--alpha", "0.5", "--h", "0.3"], 1, "PARAMETER"),
    (["simulate", "--model", "cauchy", "--window", "square", "--r", "3", "--seed", "1",
      "--method", "random_wave", "--output", "x"], 1, "UNSUPPORTED_MODEL"),
    (["simulate", *FIELD, "--output", "/nonexistent/dir/f.bin"], 1, "IO"),
])
def test_error_codes(capsys, argv, status, code):
    got, _, err = run(capsys, *argv)
    assert got == status
    assert error_code(err) == code


def test_plan_error_code(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text((CONFIGS / "reference_square.cfg").read_text().replace("reference = 100", "reference = 50"))
    got, _, err = run(capsys, "refmc", "--config", str(cfg))
    assert got == 1 and error_code(err) == "PLAN"
    assert "exceeds" in err


def test_fit_error_code(capsys, tmp_path):
    p = tmp_path / "summary.csv"
    p.write_text("r,mean,se,n\n10.0,1.0,0,3\n20.0,-0.5,0,3\n40.0,0.1,0,3\n")
    got, _, err = run(capsys, "fit", "--input", str(p))
    assert got == 1 and error_code(err) == "FIT"
    assert "r = 20" in err


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "lrdfield.cli", "fit"], capture_output=True, text=True)
    assert res.returncode == 2
    assert res.stderr.startswith("error code=USAGE")
