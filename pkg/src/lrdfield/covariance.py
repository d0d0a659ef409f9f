"""Isotropic covariance models with power-law (long-range dependent) tails.

All models are normalised so that B(0) = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from functools import lru_cache

from scipy import integrate, optimize, special

from .errors import ParameterError

FAMILIES = ("power_law", "cauchy", "bessel", "constant_test")


@dataclass(frozen=True)
class SlowlyVarying:
    """L(r) = 1 (``constant_one``) or L(r) = log(e + r)**p (``log_power``)."""

    kind: str = "constant_one"
    p: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant_one", "log_power"):
            raise ParameterError(f"unknown slowly varying kind {self.kind!r}")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "constant_one":
            out = np.ones_like(r)
        else:
            out = np.log(np.e + r) ** self.p
        return out if out.ndim else float(out)


ONE = SlowlyVarying()


@dataclass(frozen=True)
class CovarianceModel:
    """An isotropic covariance B(r), r = |x - y|.

    Parameters by family:

    * ``power_law``: ``alpha``, ``scale``; B = s^-alpha L0(s) for s = r/scale >= s0,
      and below s0 the second-order Taylor polynomial of that tail at s0, with
      s0 chosen so that B(0) = 1 (see ``power_law_core``)
    * ``cauchy``: ``theta`` in (0, 2], ``beta`` > 0, ``scale``;
      B = (1 + (r/scale)^theta)^(-beta/theta)
    * ``bessel``: order ``v``; B = 2^v Gamma(v+1) J_v(r) / r^v
    * ``constant_test``: ``scale``; triangular B = max(0, 1 - r/scale), valid on a line only
    """

    family: str
    dimension: int = 2
    alpha: Optional[float] = None
    v: float = 0.0
    theta: float = 2.0
    beta: float = 0.5
    scale: float = 1.0
    slowly_varying: SlowlyVarying = field(default=ONE)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown covariance family {self.family!r}")
        if self.dimension not in (1, 2, 3):
            raise ParameterError("dimension must be 1, 2 or 3")
        if self.scale <= 0:
            raise ParameterError("scale must be positive")
        if self.family == "power_law":
            if self.alpha is None or self.alpha <= 0:
                raise ParameterError("power_law needs alpha > 0")
        elif self.family == "cauchy":
            if not 0 < self.theta <= 2:
                raise ParameterError("cauchy needs 0 < theta <= 2")
            if self.beta <= 0:
                raise ParameterError("cauchy needs beta > 0")
        elif self.family == "bessel":
            # positive definite in R^n only from order (n-2)/2 upwards
            lo = max(0.0, (self.dimension - 2) / 2.0)
            if not lo <= self.v < lo + 0.5:
                raise ParameterError(
                    f"bessel order must lie in [{lo:g}, {lo + 0.5:g}) for dimension {self.dimension}"
                )

    @property
    def lrd_exponent(self) -> Optional[float]:
        """Tail exponent alpha with |B(r)| ~ r^-alpha, None for compact support."""
        if self.family == "power_law":
            return self.alpha
        if self.family == "cauchy":
            return self.beta
        if self.family == "bessel":
            return self.v + 0.5
        return None

    def __call__(self, r):
        return cov_eval(self, r)


def bessel(v=0.0, dimension=2):
    return CovarianceModel("bessel", dimension=dimension, v=v)


def cauchy(theta=2.0, beta=0.5, scale=1.0, dimension=2):
    return CovarianceModel("cauchy", dimension=dimension, theta=theta, beta=beta, scale=scale)


def power_law(alpha, dimension=2, slowly_varying=ONE, scale=1.0):
    return CovarianceModel("power_law", dimension=dimension, alpha=alpha, scale=scale,
                           slowly_varying=slowly_varying)


def triangular(scale=1.0, dimension=1):
    return CovarianceModel("constant_test", dimension=dimension, scale=scale)


def cov_eval(model: CovarianceModel, r):
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ParameterError("distance must be non-negative")
    fam = model.family
    if fam == "bessel":
        v = model.v
        out = np.ones_like(r)
        nz = r > 1e-8
        rn = r[nz]
        out[nz] = 2.0**v * special.gamma(v + 1.0) * special.jv(v, rn) / rn**v
    elif fam == "cauchy":
        s = r / model.scale
        out = (1.0 + s**model.theta) ** (-model.beta / model.theta)
    elif fam == "power_law":
        s = r / model.scale
        sv = model.slowly_varying
        s0 = power_law_core(model.alpha, sv.kind, sv.p)
        out = np.empty_like(s)
        big = s >= s0
        out[big] = _power_tail(s[big], model.alpha, sv)[0]
        t, t1, t2 = _power_tail(np.float64(s0), model.alpha, sv)
        d = s0 - s[~big]
        out[~big] = t - t1 * d + 0.5 * t2 * d * d
        out[s == 0] = 1.0  # exact by the choice of s0, up to rounding
    else:
        out = np.maximum(0.0, 1.0 - r / model.scale)
    return out if out.ndim else float(out)


def _power_tail(s, alpha, sv: SlowlyVarying):
    """T(s) = s^-alpha L0(s) and its first two derivatives."""
    p = sv.p if sv.kind == "log_power" else 0.0
    ell = np.log(np.e + s)
    t = s ** (-alpha) * ell**p
    a = -alpha / s + p / ((np.e + s) * ell)
    da = alpha / s**2 - p * (ell + 1.0) / ((np.e + s) ** 2 * ell**2)
    return t, t * a, t * (a * a + da)


@lru_cache(maxsize=64)
def power_law_core(alpha: float, kind: str = "constant_one", p: float = 0.0) -> float:
    """Junction s0 of the power-law model.

    On [0, s0] the covariance is the quadratic Taylor polynomial of the tail at
    s0, so -B' is linear there and continues convexly into the tail. A radial
    profile with B(0) = 1, B -> 0 and convex -B' is positive definite in up to
    three dimensions; s0 solves T(s0) - s0 T'(s0) + s0^2 T''(s0)/2 = 1.
    """
    sv = SlowlyVarying(kind, p)

    def excess(s0):
        t, t1, t2 = _power_tail(s0, alpha, sv)
        return t - s0 * t1 + 0.5 * s0 * s0 * t2 - 1.0

    return float(optimize.brentq(excess, 1e-6, 1e12, xtol=1e-14, rtol=1e-14))


def c1(n: int, alpha: float) -> float:
    """Normalising constant of the power-law spectral density."""
    if not 0 < alpha < n:
        raise ParameterError(f"alpha must lie in (0, {n}), got {alpha}")
    return math.gamma((n - alpha) / 2.0) / (2.0**alpha * math.pi ** (n / 2.0) * math.gamma(alpha / 2.0))


def spectral_density(n: int, alpha: float, L: SlowlyVarying, lam):
    """c1(n, alpha) |lam|^(alpha - n) L(1 / |lam|)."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise ParameterError("spectral density needs |lambda| > 0")
    out = c1(n, alpha) * lam ** (alpha - n) * L(1.0 / lam)
    return out if np.ndim(out) else float(out)


def lrd_check(model: CovarianceModel) -> bool:
    """True when the tail exponent puts the model in the long-range dependent regime."""
    a = model.lrd_exponent
    return a is not None and 0 < a < model.dimension


def tail_integrals(model: CovarianceModel, radii=(1e2, 1e3, 1e4), step=0.01):
    """Partial integrals of |B(r)| r^(n-1) over [0, R] (trapezoid rule).

    Growth without bound across ``radii`` signals a non-integrable covariance.
    """
    n = model.dimension
    out = []
    start, acc = 0.0, 0.0
    for R in sorted(radii):
        m = max(2, int(math.ceil((R - start) / step)) + 1)
        r = np.linspace(start, R, m)
        acc += integrate.trapezoid(np.abs(cov_eval(model, r)) * r ** (n - 1), r)
        out.append(acc)
        start = R
    return out
