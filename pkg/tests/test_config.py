from pathlib import Path

import pytest

from lrdfield import config as cfg
from lrdfield import windows as W
from lrdfield.errors import ConfigError, ParameterError, PlanError

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_parse_spec():
    assert cfg.parse_spec("bessel:v=0, dimension=2") == ("bessel", {"v": "0", "dimension": "2"})
    assert cfg.parse_spec("square") == ("square", {})
    with pytest.raises(ConfigError):
        cfg.parse_spec("bessel:v")
    with pytest.raises(ConfigError):
        cfg.parse_spec(":v=1")


def test_model_specs():
    m = cfg.model_from_spec("power_law:alpha=0.5,slowly_varying=log_power,p=1")
    assert m.family == "power_law" and m.alpha == 0.5
    assert cfg.model_from_spec("triangular").family == "constant_test"
    assert cfg.model_from_spec("cauchy:dimension=3").dimension == 3
    with pytest.raises(ConfigError):
        cfg.model_from_spec("cauchy:colour=red")
    with pytest.raises(ConfigError):
        cfg.model_from_spec("cauchy:theta=x")
    with pytest.raises(ParameterError):
        cfg.model_from_spec("bessel:v=2")


def test_window_specs():
    assert cfg.window_from_spec("square").shape == "square"
    poly = cfg.window_from_spec("polygon:vertices=-1 -1; 1 -1; 1 1; -1 1")
    assert poly.area(2.0) == pytest.approx(16.0)
    tab = cfg.window_from_spec("table:lower_x=-1;1,lower_y=-1;-1,upper_x=-1;0.2;0.2;1,upper_y=1;1;0.5;0.5")
    ref = W.from_table([-1, 1], [-1, -1], [-1, 0.2, 0.2, 1], [1, 1, 0.5, 0.5])
    assert W.lattice(tab, 10.0).as_set() == W.lattice(ref, 10.0).as_set()
    with pytest.raises(ConfigError):
        cfg.window_from_spec("table:lower_x=-1;1")
    with pytest.raises(ParameterError):
        cfg.window_from_spec("hexagon")
    with pytest.raises(ConfigError):
        cfg.window_from_spec("polygon:vertices=1 2 3; 4 5 6")


def test_weight_specs():
    g = cfg.weight_from_spec("polynomial_power:mu=1;2")
    assert g(2.0, 3.0) == 18.0
    assert cfg.weight_from_spec("constant:c=2")(0.0, 0.0) == 2.0
    with pytest.raises(ConfigError):
        cfg.weight_from_spec("constant:d=2")


@pytest.mark.parametrize("path", sorted(CONFIGS.rglob("*.cfg")), ids=lambda p: p.name)
def test_shipped_configs_load(path):
    plan, n_jobs = cfg.plan_from_config(path, environ={})
    assert plan.reps >= 1 and n_jobs >= 1


def test_square_msd_config():
    plan, _ = cfg.plan_from_config(CONFIGS / "msd_square.cfg", environ={})
    assert plan.r_values == (10.0, 20.0, 40.0, 80.0)
    assert (plan.reps, plan.outer, plan.kappa, plan.alpha, plan.h) == (30, 10, 2, 0.5, 0.1)
    assert plan.model.family == "bessel" and plan.method == "random_wave"


def test_seed_precedence():
    path = CONFIGS / "msd_square.cfg"
    assert cfg.plan_from_config(path, environ={})[0].base_seed == 2024
    assert cfg.plan_from_config(path, environ={"LRDFIELD_SEED": "11"})[0].base_seed == 11
    assert cfg.plan_from_config(path, {"base_seed": 12}, environ={"LRDFIELD_SEED": "11"})[0].base_seed == 12
    plan, n_jobs = cfg.plan_from_config(path, {"reps": 4, "n_jobs": 3, "name": "x"}, environ={})
    assert (plan.reps, n_jobs, plan.name) == (4, 3, "x")


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        cfg.plan_from_config(tmp_path / "missing.cfg", environ={})
    bad = tmp_path / "bad.cfg"
    bad.write_text("not an ini file\n")
    with pytest.raises(ConfigError):
        cfg.plan_from_config(bad, environ={})
    text = (CONFIGS / "reference_square.cfg").read_text()
    nomodel = tmp_path / "nomodel.cfg"
    nomodel.write_text(text.replace("[model]", "[modelx]"))
    with pytest.raises(ConfigError, match=r"\[model\]"):
        cfg.plan_from_config(nomodel, environ={})
    over = tmp_path / "over.cfg"
    over.write_text(text.replace("reference = 100", "reference = 50"))
    with pytest.raises(PlanError):
        cfg.plan_from_config(over, environ={})
