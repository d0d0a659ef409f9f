"""Weighted Hermite functionals of a sampled field over a scaled window.

The continuous functional is approximated by a Riemann sum on the grid of
step h (all multiples of h inside the closed window, weight h^n); the
additive functional sums over the integer index set of the window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .covariance import ONE, SlowlyVarying, c1
from .errors import CoverageError, PairingError, ParameterError
from .fieldsim import FieldRealization, GridSpec
from .hermite import hermite_eval
from .windows import lattice

WEIGHT_FAMILIES = ("constant", "polynomial_power", "log_weighted", "one_plus_sum_sq")
MEMBER_TOL = 1e-9


@dataclass(frozen=True)
class WeightFunction:
    """Non-random weight g and its limit shape g*(u) = lim g(ru) / g(r 1_n).

    * ``constant``: g = c
    * ``polynomial_power``: g = prod x_k^mu_k (non-negative integer powers)
    * ``log_weighted``: g = prod x_k log(mu_k + |x_k|), mu_k > 0
    * ``one_plus_sum_sq``: g = 1 + (x_1 + ... + x_n)^2
    """

    family: str = "constant"
    mu: tuple = ()
    c: float = 1.0

    def __post_init__(self):
        if self.family not in WEIGHT_FAMILIES:
            raise ParameterError(f"unknown weight family {self.family!r}")
        object.__setattr__(self, "mu", tuple(self.mu))
        if self.family == "polynomial_power":
            if not self.mu or any(m < 0 or m != int(m) for m in self.mu):
                raise ParameterError("polynomial_power needs non-negative integer powers")
        if self.family == "log_weighted" and (not self.mu or any(m <= 0 for m in self.mu)):
            raise ParameterError("log_weighted needs positive mu")

    def _check_dim(self, n):
        if self.family in ("polynomial_power", "log_weighted") and len(self.mu) != n:
            raise ParameterError(f"{self.family} weight has {len(self.mu)} exponents for dimension {n}")

    def __call__(self, *x):
        self._check_dim(len(x))
        x = np.broadcast_arrays(*(np.asarray(t, dtype=float) for t in x))
        if self.family == "constant":
            return np.full(x[0].shape, float(self.c))
        if self.family == "one_plus_sum_sq":
            s = sum(x)
            return 1.0 + s * s
        out = np.ones(x[0].shape)
        for xk, mk in zip(x, self.mu):
            if self.family == "polynomial_power":
                out = out * xk ** int(mk)
            else:
                out = out * xk * np.log(mk + np.abs(xk))
        return out

    def at_diagonal(self, r: float, n: int) -> float:
        """g(r 1_n)."""
        return float(self(*([np.float64(r)] * n)))

    def shape(self, *u):
        self._check_dim(len(u))
        u = np.broadcast_arrays(*(np.asarray(t, dtype=float) for t in u))
        n = len(u)
        if self.family == "constant":
            return np.ones(u[0].shape)
        if self.family == "one_plus_sum_sq":
            return sum(u) ** 2 / n**2
        out = np.ones(u[0].shape)
        for uk, mk in zip(u, self.mu):
            out = out * (uk ** int(mk) if self.family == "polynomial_power" else uk)
        return out


def weight_shape_gap(g: WeightFunction, window, r: float, eps: float = 0.1, points: int = 101) -> float:
    """sup |g(ru)/g(r 1_n) - g*(u)| over sample points u of the window inflated by 1 + eps."""
    n = window.dimension
    (lo, hi) = window.bbox(1.0 + eps)
    axes = [np.linspace(lo[k], hi[k], points) for k in range(n)]
    mesh = np.meshgrid(*axes, indexing="ij")
    inside = window.contains(*mesh, 1.0 + eps)
    u = [m[inside] for m in mesh]
    ratio = g(*[r * uk for uk in u]) / g.at_diagonal(r, n)
    return float(np.max(np.abs(ratio - g.shape(*u))))


@dataclass(frozen=True)
class FunctionalResult:
    value: float
    raw: float
    kind: str
    r: float
    kappa: int
    h: Optional[float]
    normalization: float
    seed: Optional[int] = None


def normalize(r: float, kappa: int, alpha: float, n: int, L: SlowlyVarying = ONE,
              g: Optional[WeightFunction] = None, convention: str = "theorem4") -> float:
    """d_r = r^(n - alpha kappa/2) L(r)^(kappa/2) |g(r 1_n)|, times c1^(kappa/2) for theorem7."""
    if kappa < 1:
        raise ParameterError("Hermite order kappa must be >= 1")
    if not 0 < alpha < n / kappa:
        raise ParameterError(f"alpha must lie in (0, {n}/{kappa}), got {alpha}")
    if convention not in ("theorem4", "theorem7"):
        raise ParameterError(f"unknown normalisation convention {convention!r}")
    gr = 1.0 if g is None else g.at_diagonal(r, n)
    if gr == 0:
        raise ParameterError("weight vanishes on the diagonal, g(r 1_n) = 0")
    d = r ** (n - alpha * kappa / 2.0) * float(L(r)) ** (kappa / 2.0) * abs(gr)
    if convention == "theorem7":
        d *= c1(n, alpha) ** (kappa / 2.0)
    return d


# ------------------------------------------------------------------ grids


def window_grid(window, r: float, h: float, extra=()) -> GridSpec:
    """Step-h grid with integer origin covering the scaled window and its index set.

    ``extra`` lists further (window, r) pairs that must be covered too.
    """
    m = round(1.0 / h)
    if m < 1 or abs(1.0 / m - h) > 1e-12:
        raise ParameterError(f"grid step must be 1/m for an integer m, got {h}")
    lo, hi = _cover_box(window, r)
    for w2, r2 in extra:
        lo2, hi2 = _cover_box(w2, r2)
        lo, hi = np.minimum(lo, lo2), np.maximum(hi, hi2)
    extent = tuple(int((hi[k] - lo[k]) * m) + 1 for k in range(len(lo)))
    return GridSpec(tuple(float(v) for v in lo), 1.0 / m, extent)


def _cover_box(window, r):
    pts_lo, pts_hi = lattice(window, r).bbox()
    wlo, whi = window.bbox(r)
    lo = np.minimum(pts_lo, np.floor(np.asarray(wlo) + 1e-9)).astype(int)
    hi = np.maximum(pts_hi, np.ceil(np.asarray(whi) - 1e-9)).astype(int)
    return lo, hi


def _grid_index(grid: GridSpec, points: np.ndarray) -> tuple:
    m = grid.denominator
    if m is None:
        raise CoverageError("field grid step is not 1/m; integer points are not grid nodes")
    origin = np.asarray(grid.origin)
    pos = (points - origin) * m
    idx = np.rint(pos).astype(np.int64)
    if np.any(np.abs(pos - idx) > 1e-6):
        raise CoverageError("integer points do not fall on grid nodes")
    extent = np.asarray(grid.extent)
    if np.any(idx < 0) or np.any(idx >= extent):
        raise CoverageError("field does not cover every lattice point of the window")
    return tuple(idx.T)


def _riemann_axes(grid: GridSpec, h: float):
    m = grid.denominator
    if m is None:
        raise ParameterError("field grid step must be 1/m")
    k = round(h * m)
    if k < 1 or abs(k / m - h) > 1e-12:
        raise ParameterError(f"h = {h} is not a multiple of the grid step {grid.step}")
    out = []
    for a in range(grid.dimension):
        o = grid.origin[a] * m
        if abs(o - round(o)) > 1e-9:
            raise ParameterError("grid origin is not a multiple of the grid step")
        num = round(o) + np.arange(grid.extent[a])
        sel = np.nonzero(num % k == 0)[0]
        out.append((sel, num[sel] / m))
    return out


def _check_cover(grid: GridSpec, window, r):
    lo, hi = window.bbox(r)
    up = grid.upper()
    tol = 1e-9 * max(1.0, r)
    for k in range(grid.dimension):
        if lo[k] < grid.origin[k] - tol or hi[k] > up[k] + tol:
            raise CoverageError("field grid does not cover the scaled window")


def window_mask(window, r: float, axes):
    """Closed membership of the tensor grid spanned by ``axes``."""
    tol = MEMBER_TOL * max(1.0, r)
    if window.dimension == 2:
        x, y = axes
        u = x / r
        ok_x = (u >= window.a - 1e-12) & (u <= window.b + 1e-12)
        uc = np.clip(u, window.a, window.b)
        lo = r * window.lower(uc)
        hi = r * window.upper(uc)
        return ok_x[:, None] & (y[None, :] >= lo[:, None] - tol) & (y[None, :] <= hi[:, None] + tol)
    x1, x2, x3 = axes
    base = window_mask(window.base, r, (x1, x2))
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    lo = r * window.lower(X1 / r, X2 / r)
    hi = r * window.upper(X1 / r, X2 / r)
    return base[:, :, None] & (x3[None, None, :] >= lo[:, :, None] - tol) & (
        x3[None, None, :] <= hi[:, :, None] + tol)


def _result(raw, kind, r, kappa, h, d, seed):
    return FunctionalResult(raw / d, raw, kind, float(r), int(kappa), h, d, seed)


def _norm(r, kappa, alpha, n, L, g, convention, normalization):
    if normalization is not None:
        if normalization <= 0:
            raise ParameterError("normalisation must be positive")
        return float(normalization)
    if alpha is None:
        return 1.0
    return normalize(r, kappa, alpha, n, L, g, convention)


def additive_raw(field: FieldRealization, window, r: float, kappa: int, g: WeightFunction) -> float:
    if kappa < 1:
        raise ParameterError("Hermite order kappa must be >= 1")
    pts = lattice(window, r).points
    vals = field.values[_grid_index(field.grid, pts)]
    w = g(*pts.T.astype(float))
    return float(np.sum(w * hermite_eval(kappa, vals)))


def riemann_raw(field: FieldRealization, window, r: float, kappa: int, g: WeightFunction, h: float) -> float:
    if kappa < 1:
        raise ParameterError("Hermite order kappa must be >= 1")
    _check_cover(field.grid, window, r)
    axes = _riemann_axes(field.grid, h)
    coords = [c for _, c in axes]
    mask = window_mask(window, r, coords)
    sub = field.values[np.ix_(*[sel for sel, _ in axes])]
    mesh = np.meshgrid(*coords, indexing="ij", sparse=True)
    w = g(*mesh)
    terms = np.where(mask, w * hermite_eval(kappa, sub), 0.0)
    return float(h ** window.dimension * terms.sum())


def additive_functional(field: FieldRealization, window, r: float, kappa: int, g: WeightFunction,
                        alpha: Optional[float] = None, L: SlowlyVarying = ONE,
                        convention: str = "theorem4", normalization: Optional[float] = None) -> FunctionalResult:
    """Sum of g(i) H_kappa(xi(i)) over the index set of the scaled window, divided by d_r.

    Without ``alpha`` (and no explicit ``normalization``) the raw sum is returned unscaled.
    """
    raw = additive_raw(field, window, r, kappa, g)
    d = _norm(r, kappa, alpha, window.dimension, L, g, convention, normalization)
    return _result(raw, "additive", r, kappa, None, d, field.seed)


def riemann_functional(field: FieldRealization, window, r: float, kappa: int, g: WeightFunction, h: float,
                       alpha: Optional[float] = None, L: SlowlyVarying = ONE,
                       convention: str = "theorem4", normalization: Optional[float] = None) -> FunctionalResult:
    """h^n times the sum of g(x) H_kappa(xi(x)) over multiples of h inside the closed scaled window."""
    raw = riemann_raw(field, window, r, kappa, g, h)
    d = _norm(r, kappa, alpha, window.dimension, L, g, convention, normalization)
    return _result(raw, "continuous_riemann", r, kappa, h, d, field.seed)


def discrepancy(field: FieldRealization, window, r: float, kappa: int, g: WeightFunction, h: float,
                alpha: Optional[float] = None, L: SlowlyVarying = ONE, convention: str = "theorem4",
                lattice_field: Optional[FieldRealization] = None,
                normalization: Optional[float] = None) -> float:
    """Squared normalised gap between the Riemann and additive functionals of one realization.

    ``lattice_field`` may supply the integer-point values separately; it must be
    the same realization (same seed, method and model) as ``field``.
    """
    other = field if lattice_field is None else lattice_field
    if other is not field and (other.seed != field.seed or other.method != field.method
                               or other.model != field.model):
        raise PairingError("continuous and lattice values come from different realizations")
    d = _norm(r, kappa, alpha, window.dimension, L, g, convention, normalization)
    diff = riemann_raw(field, window, r, kappa, g, h) - additive_raw(other, window, r, kappa, g)
    return (diff / d) ** 2
