"""Run configuration: INI files and compact ``name:key=value,...`` specs.

A config file has the sections ``[experiment]``, ``[model]``, ``[window]``,
``[weight]`` and ``[functional]``; see the README for every key. Compact specs
are what the command-line flags accept, e.g. ``bessel:v=0`` or
``polynomial_power:mu=1;2``. List values are separated by ``;``, and the
vertices of a polygon by ``;`` with coordinates separated by spaces.
"""
from __future__ import annotations

import configparser
import os
from pathlib import Path

from .covariance import CovarianceModel, SlowlyVarying
from .errors import ConfigError
from .experiments import ExperimentPlan
from .functionals import WeightFunction
from .windows import from_table, make_window

SEED_ENV = "LRDFIELD_SEED"

_MODEL_FLOATS = ("alpha", "v", "theta", "beta", "scale")


def parse_spec(text: str):
    """``"name:k=v,k=v"`` -> (name, {k: v}) with string values."""
    name, _, rest = text.strip().partition(":")
    if not name:
        raise ConfigError(f"empty spec {text!r}")
    params = {}
    for item in filter(None, (t.strip() for t in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ConfigError(f"expected key=value in spec {text!r}, got {item!r}")
        params[key.strip()] = val.strip()
    return name.strip(), params


def _float(key, val):
    try:
        return float(val)
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {val!r}") from None


def _int(key, val):
    try:
        return int(val)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {val!r}") from None


def _floats(key, val):
    return tuple(_float(key, t) for t in val.replace(",", ";").split(";") if t.strip())


def build_model(family: str, params: dict) -> CovarianceModel:
    params = dict(params)
    kw = {"dimension": _int("dimension", params.pop("dimension", "2"))}
    for k in _MODEL_FLOATS:
        if k in params:
            kw[k] = _float(k, params.pop(k))
    sv = params.pop("slowly_varying", "constant_one")
    p = _float("p", params.pop("p", "0"))
    kw["slowly_varying"] = SlowlyVarying(sv, p)
    for k in ("method", "waves"):
        params.pop(k, None)
    if params:
        raise ConfigError(f"unknown model keys {sorted(params)}")
    if family == "triangular":
        family = "constant_test"
    return CovarianceModel(family, **kw)


_TABLE_KEYS = ("lower_x", "lower_y", "upper_x", "upper_y")


def build_window(shape: str, params: dict):
    if shape == "table":
        missing = [k for k in _TABLE_KEYS if k not in params]
        extra = sorted(set(params) - set(_TABLE_KEYS))
        if missing or extra:
            raise ConfigError(f"table window needs exactly {list(_TABLE_KEYS)}")
        return from_table(*(_floats(k, params[k]) for k in _TABLE_KEYS))
    kw = {}
    for k, v in params.items():
        if k == "vertices":
            pts = [tuple(_float(k, c) for c in t.split()) for t in v.split(";") if t.strip()]
            if any(len(p) != 2 for p in pts):
                raise ConfigError("polygon vertices need two coordinates each")
            kw[k] = pts
        else:
            kw[k] = _float(k, v)
    try:
        return make_window(shape, **kw)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for window {shape!r}: {exc}") from None


def build_weight(family: str, params: dict) -> WeightFunction:
    params = dict(params)
    mu = _floats("mu", params.pop("mu", ""))
    c = _float("c", params.pop("c", "1"))
    if params:
        raise ConfigError(f"unknown weight keys {sorted(params)}")
    return WeightFunction(family, mu, c)


def model_from_spec(text):
    return build_model(*parse_spec(text))


def window_from_spec(text):
    return build_window(*parse_spec(text))


def weight_from_spec(text):
    return build_weight(*parse_spec(text))


def _section(cp, name, required=True):
    if not cp.has_section(name):
        if required:
            raise ConfigError(f"config is missing the [{name}] section")
        return {}
    return dict(cp.items(name))


def load_config(path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    return cp


def plan_from_config(path, overrides: dict | None = None, environ=None) -> tuple:
    """Build an ExperimentPlan from a config file.

    Precedence for scalars: config < ``LRDFIELD_SEED`` (base seed only) < ``overrides``.
    Returns ``(plan, n_jobs)``.
    """
    environ = os.environ if environ is None else environ
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    cp = load_config(path)
    exp = _section(cp, "experiment")
    model_s = _section(cp, "model")
    win_s = _section(cp, "window")
    weight_s = _section(cp, "weight", required=False)
    fun_s = _section(cp, "functional")

    if "family" not in model_s:
        raise ConfigError("[model] needs a family")
    family = model_s.pop("family")
    method = model_s.get("method") or None
    waves = _int("waves", model_s.get("waves", "2000"))
    model = build_model(family, model_s)

    if "shape" not in win_s:
        raise ConfigError("[window] needs a shape")
    window = build_window(win_s.pop("shape"), win_s)
    weight = build_weight(weight_s.pop("family", "constant"), weight_s)

    kappa = _int("kappa", fun_s.get("kappa", "2"))
    if "alpha" in fun_s:
        alpha = _float("alpha", fun_s["alpha"])
    elif model.lrd_exponent is not None:
        alpha = model.lrd_exponent
    else:
        raise ConfigError("[functional] needs alpha for a model without a power-law tail")
    L = SlowlyVarying(fun_s.get("slowly_varying", "constant_one"), _float("p", fun_s.get("p", "0")))
    h = _float("h", fun_s.get("h", "1"))
    convention = fun_s.get("convention", "theorem4")

    if "r" not in exp:
        raise ConfigError("[experiment] needs the list of r values")
    base_seed = _int("base_seed", exp.get("base_seed", "0"))
    if environ.get(SEED_ENV):
        base_seed = _int(SEED_ENV, environ[SEED_ENV])
    name = overrides.get("name", exp.get("name", Path(path).stem))
    kw = dict(
        name=name,
        kind=exp.get("kind", "mc"),
        model=model,
        window=window,
        weight=weight,
        kappa=kappa,
        alpha=alpha,
        h=h,
        r_values=_floats("r", exp["r"]),
        reps=_int("reps", exp.get("reps", "30")),
        outer=_int("outer", exp.get("outer", "1")),
        base_seed=base_seed,
        R=_float("R", exp["reference"]) if "reference" in exp else None,
        method=method,
        waves=waves,
        L=L,
        convention=convention,
    )
    for k in ("reps", "outer", "base_seed", "kind", "waves"):
        if k in overrides:
            kw[k] = overrides[k]
    n_jobs = overrides.get("n_jobs", _int("n_jobs", exp.get("n_jobs", "1")))
    return ExperimentPlan(**kw), n_jobs
