"""Observation windows bounded by two graphs, their homothetic images and
the integer index sets used by additive functionals.

A planar window is ``{(x, y): a <= x <= b, lower(x) <= y <= upper(x)}`` where
``lower`` and ``upper`` are piecewise smooth with finitely many jumps. The
scaled window at r uses ``f_r(x) = r f(x / r)``.

Piecewise boundaries are right-continuous: at a jump abscissa the value of
the piece to the right applies. Column envelopes are taken over ``[i, i+1)``
truncated to ``[ar, br]``. The last column ``ceil(br)`` reduces to the single
abscissa ``br`` when ``[i, i+1)`` misses the window otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, optimize

from .errors import CoverageError, ParameterError

SAMPLES_PER_UNIT = 256
SAMPLES_PER_UNIT_3D = 32
SNAP = 1e-9


def floor_snap(v: float) -> int:
    """floor() that treats values within a relative 1e-9 of an integer as that integer."""
    return int(math.floor(v + SNAP * max(1.0, abs(v))))


def ceil_snap(v: float) -> int:
    return int(math.ceil(v - SNAP * max(1.0, abs(v))))


# ------------------------------------------------------------------ pieces


@dataclass(frozen=True)
class ConstPiece:
    c: float

    def __call__(self, x):
        return np.full(np.shape(x), float(self.c))

    def extrema(self, u, v, density):
        return self.c, self.c

    def integral(self, u, v):
        return self.c * (v - u)


@dataclass(frozen=True)
class LinearPiece:
    x0: float
    y0: float
    x1: float
    y1: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.y0 + (self.y1 - self.y0) * (x - self.x0) / (self.x1 - self.x0)

    def extrema(self, u, v, density):
        a, b = float(self(u)), float(self(v))
        return min(a, b), max(a, b)

    def integral(self, u, v):
        return 0.5 * (float(self(u)) + float(self(v))) * (v - u)


@dataclass(frozen=True)
class ArcPiece:
    """sign * sqrt(radius^2 - x^2), a half circle centred at the origin."""

    radius: float
    sign: int = 1

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.sign * np.sqrt(np.maximum(0.0, self.radius**2 - x * x))

    def extrema(self, u, v, density):
        near = 0.0 if u <= 0.0 <= v else min(abs(u), abs(v))
        far = max(abs(u), abs(v))
        big = math.sqrt(max(0.0, self.radius**2 - near * near))
        small = math.sqrt(max(0.0, self.radius**2 - far * far))
        return (small, big) if self.sign > 0 else (-big, -small)

    def integral(self, u, v):
        R = self.radius

        def F(x):
            x = max(-R, min(R, x))
            return 0.5 * (x * math.sqrt(max(0.0, R * R - x * x)) + R * R * math.asin(x / R))

        return self.sign * (F(v) - F(u))


@dataclass(frozen=True)
class CallablePiece:
    """A smooth piece given by a vectorised callable; envelopes are sampled."""

    fn: Callable

    def __call__(self, x):
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)

    def extrema(self, u, v, density):
        if v <= u:
            val = float(self(u))
            return val, val
        npts = max(2, int(math.ceil((v - u) * density)) + 1)
        xs = np.linspace(u, v, npts)
        ys = self(xs)
        lo, hi = float(ys.min()), float(ys.max())
        k = int(np.argmin(ys))
        if 0 < k < npts - 1:
            res = optimize.minimize_scalar(lambda t: float(self(t)), bounds=(xs[k - 1], xs[k + 1]),
                                           method="bounded", options={"xatol": 1e-12})
            lo = min(lo, float(res.fun))
        k = int(np.argmax(ys))
        if 0 < k < npts - 1:
            res = optimize.minimize_scalar(lambda t: -float(self(t)), bounds=(xs[k - 1], xs[k + 1]),
                                           method="bounded", options={"xatol": 1e-12})
            hi = max(hi, -float(res.fun))
        return lo, hi

    def integral(self, u, v):
        return integrate.quad(lambda t: float(self(t)), u, v, limit=200)[0]


class Boundary:
    """Right-continuous piecewise function on [breaks[0], breaks[-1]]."""

    def __init__(self, breaks: Sequence[float], pieces: Sequence):
        breaks = [float(b) for b in breaks]
        if len(breaks) != len(pieces) + 1 or any(b1 <= b0 for b0, b1 in zip(breaks, breaks[1:])):
            raise ParameterError("boundary needs strictly increasing breaks, one more than pieces")
        self.breaks = np.array(breaks)
        self.pieces = list(pieces)

    @property
    def jumps(self):
        """Interior breaks where the one-sided limits differ."""
        out = []
        for k in range(1, len(self.pieces)):
            x = self.breaks[k]
            if abs(float(self.pieces[k - 1](x)) - float(self.pieces[k](x))) > 1e-12:
                out.append(float(x))
        return out

    def _index(self, x):
        idx = np.searchsorted(self.breaks, x, side="right") - 1
        return np.clip(idx, 0, len(self.pieces) - 1)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = self._index(x)
        out = np.empty(x.shape)
        for k, piece in enumerate(self.pieces):
            mask = idx == k
            if np.any(mask):
                out[mask] = piece(x[mask])
        return out if out.ndim else float(out)

    def left_limit(self, x):
        k = int(self._index(np.array(x)))
        if k > 0 and x == self.breaks[k]:
            k -= 1
        return float(self.pieces[k](x))

    def envelope(self, lo: float, hi: float, closed_right: bool, density: float):
        """(inf, sup) over [lo, hi) or [lo, hi]; a single point when lo == hi."""
        if hi <= lo:
            return (float(self(lo)),) * 2
        br = self.breaks
        last = len(self.pieces) - 1
        inf, sup = math.inf, -math.inf
        for k, piece in enumerate(self.pieces):
            x0, x1 = br[k], br[k + 1]
            if closed_right:
                overlap = x0 <= hi and (x1 > lo or (k == last and x1 >= lo))
            else:
                overlap = x0 < hi and x1 > lo
            if not overlap:
                continue
            u, v = max(lo, x0), min(hi, x1)
            p_lo, p_hi = piece.extrema(u, v, density)
            inf, sup = min(inf, p_lo), max(sup, p_hi)
        return inf, sup

    def integral(self, lo=None, hi=None):
        lo = self.breaks[0] if lo is None else lo
        hi = self.breaks[-1] if hi is None else hi
        total = 0.0
        for k, piece in enumerate(self.pieces):
            u, v = max(lo, self.breaks[k]), min(hi, self.breaks[k + 1])
            if v > u:
                total += piece.integral(u, v)
        return total


# ----------------------------------------------------------------- windows


@dataclass(frozen=True, eq=False)
class Window2:
    a: float
    b: float
    lower: Boundary
    upper: Boundary
    shape: str = "custom"
    params: dict = field(default_factory=dict)

    dimension = 2

    def __post_init__(self):
        if not self.a < 0 < self.b:
            raise ParameterError("window must satisfy a < 0 < b")
        for bd in (self.lower, self.upper):
            if abs(bd.breaks[0] - self.a) > 1e-12 or abs(bd.breaks[-1] - self.b) > 1e-12:
                raise ParameterError("boundary domains must equal [a, b]")
        if not float(self.lower(0.0)) < 0.0 < float(self.upper(0.0)):
            raise ParameterError("the origin must be an interior point of the window")
        xs = np.linspace(self.a, self.b, 2001)[1:-1]
        if np.any(self.lower(xs) >= self.upper(xs)):
            raise ParameterError("lower boundary must stay below the upper boundary on (a, b)")

    @property
    def jumps(self):
        return {"lower": self.lower.jumps, "upper": self.upper.jumps}

    def contains(self, x, y, r=1.0):
        """Closed membership of points in the scaled window."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        u = x / r
        inside = (u >= self.a) & (u <= self.b)
        uc = np.clip(u, self.a, self.b)
        lo = r * self.lower(uc)
        hi = r * self.upper(uc)
        return inside & (y >= lo) & (y <= hi)

    def area(self, r=1.0):
        return r * r * (self.upper.integral() - self.lower.integral())

    def bbox(self, r=1.0):
        d = SAMPLES_PER_UNIT * max(r, 1.0)
        lo = self.lower.envelope(self.a, self.b, True, d)[0]
        hi = self.upper.envelope(self.a, self.b, True, d)[1]
        return (self.a * r, lo * r), (self.b * r, hi * r)


@dataclass(frozen=True)
class ScaledWindow:
    window: object
    r: float

    @property
    def a(self):
        return self.window.a * self.r

    @property
    def b(self):
        return self.window.b * self.r

    def lower(self, *x):
        return self.r * self.window.lower(*(np.asarray(t) / self.r for t in x))

    def upper(self, *x):
        return self.r * self.window.upper(*(np.asarray(t) / self.r for t in x))

    @property
    def area(self):
        return self.window.area(self.r) if self.window.dimension == 2 else self.window.volume(self.r)


def scale(window, r: float) -> ScaledWindow:
    if r <= 0:
        raise ParameterError("scale factor must be positive")
    return ScaledWindow(window, float(r))


def rectangle(x0=-1.0, x1=1.0, y0=-1.0, y1=1.0) -> Window2:
    lower = Boundary([x0, x1], [ConstPiece(y0)])
    upper = Boundary([x0, x1], [ConstPiece(y1)])
    return Window2(x0, x1, lower, upper, "rectangle", {"x0": x0, "x1": x1, "y0": y0, "y1": y1})


def square(half=1.0) -> Window2:
    w = rectangle(-half, half, -half, half)
    return Window2(w.a, w.b, w.lower, w.upper, "square", {"half": half})


def disc(radius=1.0) -> Window2:
    lower = Boundary([-radius, radius], [ArcPiece(radius, -1)])
    upper = Boundary([-radius, radius], [ArcPiece(radius, 1)])
    return Window2(-radius, radius, lower, upper, "disc", {"radius": radius})


def polygon(vertices, shape="polygon") -> Window2:
    """Polygon cut by every vertical line in a single segment (vertical edges allowed)."""
    pts = [(float(x), float(y)) for x, y in vertices]
    edges = [(pts[k], pts[(k + 1) % len(pts)]) for k in range(len(pts))]
    xs = sorted({p[0] for p in pts})
    lower_pieces, upper_pieces = [], []
    for x0, x1 in zip(xs, xs[1:]):
        xm = 0.5 * (x0 + x1)
        crossing = []
        for (px, py), (qx, qy) in edges:
            if min(px, qx) < xm < max(px, qx):
                piece = LinearPiece(px, py, qx, qy)
                crossing.append((float(piece(xm)), piece))
        if len(crossing) != 2:
            raise ParameterError("polygon is not bounded by two graphs over x")
        crossing.sort(key=lambda t: t[0])
        lower_pieces.append(_restrict(crossing[0][1], x0, x1))
        upper_pieces.append(_restrict(crossing[1][1], x0, x1))
    return Window2(xs[0], xs[-1], Boundary(xs, lower_pieces), Boundary(xs, upper_pieces), shape,
                   {"vertices": [list(p) for p in pts]})


def _restrict(piece: LinearPiece, x0, x1):
    y0, y1 = float(piece(x0)), float(piece(x1))
    if y0 == y1:
        return ConstPiece(y0)
    return LinearPiece(x0, y0, x1, y1)


def lshape() -> Window2:
    """[-1, 1]^2 with the corner square (0.5, 1]^2 removed."""
    return polygon([(-1, -1), (1, -1), (1, 0.5), (0.5, 0.5), (0.5, 1), (-1, 1)], "lshape")


def _step_upper_left(x):
    return 0.8 + 0.2 * np.cos(2.0 * x)


def _step_upper_right(x):
    return 0.5 - 0.1 * x


def _step_lower_left(x):
    return -0.7 + 0.1 * x


def _step_lower_right(x):
    return -1.0 + 0.3 * x * x


def step_window() -> Window2:
    """Curved boundaries with one jump in each, on [-1, 1.2]."""
    upper = Boundary([-1.0, 0.3, 1.2], [CallablePiece(_step_upper_left), CallablePiece(_step_upper_right)])
    lower = Boundary([-1.0, -0.4, 1.2], [CallablePiece(_step_lower_left), CallablePiece(_step_lower_right)])
    return Window2(-1.0, 1.2, lower, upper, "step")


def from_table(lower_x, lower_y, upper_x, upper_y, shape="table") -> Window2:
    """Piecewise-linear boundaries through samples; a repeated x marks a jump
    (first value is the left limit, second the value from the right)."""
    lower = _table_boundary(lower_x, lower_y)
    upper = _table_boundary(upper_x, upper_y)
    return Window2(float(lower.breaks[0]), float(lower.breaks[-1]), lower, upper, shape)


def _table_boundary(xs, ys):
    xs = [float(x) for x in xs]
    ys = [float(y) for y in ys]
    if len(xs) != len(ys) or len(xs) < 2:
        raise ParameterError("boundary table needs matching x/y lists of length >= 2")
    breaks, pieces = [xs[0]], []
    for k in range(len(xs) - 1):
        if xs[k + 1] == xs[k]:
            continue
        if xs[k + 1] < xs[k]:
            raise ParameterError("boundary table x values must be non-decreasing")
        pieces.append(_restrict(LinearPiece(xs[k], ys[k], xs[k + 1], ys[k + 1]), xs[k], xs[k + 1]))
        breaks.append(xs[k + 1])
    return Boundary(breaks, pieces)


# ------------------------------------------------------- 2-D column bounds


def _column_domain(window: Window2, r: float, i: int):
    """Column abscissae as (lo, hi, closed_right) in unit coordinates."""
    ar, br = window.a * r, window.b * r
    lo, hi = max(float(i), ar), min(float(i + 1), br)
    if lo > hi:
        return window.b, window.b, True
    closed = hi == br
    return lo / r, hi / r, closed


def column_range(window, r: float):
    return math.floor(window.a * r), math.ceil(window.b * r)


def column_extrema(window: Window2, r: float, i: int):
    """Scaled (inf f_l, sup f_l, inf f_u, sup f_u) over column i."""
    first, last = column_range(window, r)
    if not first <= i <= last:
        raise CoverageError(f"column {i} outside {first}..{last}")
    lo, hi, closed = _column_domain(window, r, i)
    density = SAMPLES_PER_UNIT * r
    l_inf, l_sup = window.lower.envelope(lo, hi, closed, density)
    u_inf, u_sup = window.upper.envelope(lo, hi, closed, density)
    return r * l_inf, r * l_sup, r * u_inf, r * u_sup


def column_bounds(window: Window2, r: float, i: int):
    l_inf, _, _, u_sup = column_extrema(window, r, i)
    return floor_snap(l_inf), ceil_snap(u_sup)


@dataclass(frozen=True, eq=False)
class LatticeSet:
    dimension: int
    r: float
    points: np.ndarray
    columns: np.ndarray

    def __len__(self):
        return len(self.points)

    def as_set(self):
        return {tuple(int(v) for v in p) for p in self.points}

    def bbox(self):
        return self.points.min(axis=0), self.points.max(axis=0)


def _expand(columns):
    """Turn rows (prefix..., lo, hi) into explicit integer points."""
    prefix, lo, hi = columns[:, :-2], columns[:, -2], columns[:, -1]
    counts = hi - lo + 1
    rep = np.repeat(np.arange(len(columns)), counts)
    offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    return np.column_stack([prefix[rep], lo[rep] + offsets]).astype(np.int64)


@lru_cache(maxsize=64)
def _lattice2(window: Window2, r: float) -> LatticeSet:
    first, last = column_range(window, r)
    cols = np.array([(i, *column_bounds(window, r, i)) for i in range(first, last + 1)], dtype=np.int64)
    return LatticeSet(2, r, _expand(cols), cols)


def lattice(window, r: float) -> LatticeSet:
    """Integer index set Q_n of the scaled window."""
    if r <= 0:
        raise ParameterError("scale factor must be positive")
    if window.dimension == 2:
        return _lattice2(window, float(r))
    return _lattice3(window, float(r))


@dataclass(frozen=True)
class CoveringCells:
    r: float
    cells: list
    lower_strips: list
    upper_strips: list

    def area(self):
        return float(sum(hi - lo for _, lo, hi in self.cells))


def covering_cells(window: Window2, r: float) -> CoveringCells:
    """Cells [i, i+1) x [f_r^(l)(i), f_r^(u)(i)] and the boundary strips S_l, S_u as (i, inf, sup)."""
    first, last = column_range(window, r)
    cells, s_l, s_u = [], [], []
    for i in range(first, last + 1):
        l_inf, l_sup, u_inf, u_sup = column_extrema(window, r, i)
        cells.append((i, floor_snap(l_inf), ceil_snap(u_sup)))
        s_l.append((i, l_inf, l_sup))
        s_u.append((i, u_inf, u_sup))
    return CoveringCells(float(r), cells, s_l, s_u)


def interior_points(window, r: float) -> np.ndarray:
    """Integer points strictly inside the scaled window (right-continuous boundaries)."""
    if window.dimension == 3:
        return window.interior_points(r)
    (x0, y0), (x1, y1) = window.bbox(r)
    i = np.arange(math.floor(x0), math.ceil(x1) + 1)
    j = np.arange(math.floor(y0), math.ceil(y1) + 1)
    I, J = np.meshgrid(i, j, indexing="ij")
    I, J = I.ravel(), J.ravel()
    u = I / r
    ok = (u > window.a) & (u < window.b)
    uc = np.clip(u, window.a, window.b)
    ok &= (J > r * window.lower(uc)) & (J < r * window.upper(uc))
    return np.column_stack([I[ok], J[ok]])


def boundary_count(window, r: float) -> int:
    """|Q_n| minus the integer points strictly inside the scaled window."""
    return len(lattice(window, r)) - len(interior_points(window, r))


# ------------------------------------------------------------------- 3-D


@dataclass(frozen=True)
class Sheet:
    """Graph x3 = fn(x1, x2) over the base window.

    Jumps may only occur across axis-aligned lines x1 = c or x2 = c, declared
    in ``jumps_x1`` / ``jumps_x2``. ``cap`` marks the closed-form sheet
    sign * sqrt(radius^2 - x1^2 - x2^2).
    """

    fn: Callable
    jumps_x1: tuple = ()
    jumps_x2: tuple = ()
    cap: Optional[tuple] = None

    def __call__(self, x1, x2):
        return np.asarray(self.fn(np.asarray(x1, float), np.asarray(x2, float)), dtype=float)


@dataclass(frozen=True)
class _ConstSheet:
    c: float

    def __call__(self, x1, x2):
        return np.full(np.broadcast(x1, x2).shape, float(self.c))


@dataclass(frozen=True)
class _CapSheet:
    radius: float
    sign: int

    def __call__(self, x1, x2):
        return self.sign * np.sqrt(np.maximum(0.0, self.radius**2 - x1 * x1 - x2 * x2))


@dataclass(frozen=True, eq=False)
class Window3:
    base: Window2
    lower: Sheet
    upper: Sheet
    shape: str = "custom"
    params: dict = field(default_factory=dict)

    dimension = 3

    def __post_init__(self):
        if not float(self.lower(0.0, 0.0)) < 0.0 < float(self.upper(0.0, 0.0)):
            raise ParameterError("the origin must be an interior point of the window")

    @property
    def a(self):
        return self.base.a

    @property
    def b(self):
        return self.base.b

    def contains(self, x1, x2, x3, r=1.0):
        x1, x2, x3 = (np.asarray(t, dtype=float) for t in (x1, x2, x3))
        inside = self.base.contains(x1, x2, r)
        lo = r * self.lower(x1 / r, x2 / r)
        hi = r * self.upper(x1 / r, x2 / r)
        return inside & (x3 >= lo) & (x3 <= hi)

    def volume(self, r=1.0):
        total = 0.0
        base = self.base
        for lo_x, hi_x in _segments(sorted(set(base.lower.breaks) | set(base.upper.breaks)
                                          | set(self.lower.jumps_x1) | set(self.upper.jumps_x1))):
            val, _ = integrate.dblquad(
                lambda y, x: float(self.upper(x, y) - self.lower(x, y)),
                lo_x, hi_x,
                lambda x: float(base.lower(x)), lambda x: float(base.upper(x)),
                epsabs=1e-10, epsrel=1e-10,
            )
            total += val
        return r**3 * total

    def bbox(self, r=1.0):
        (x0, y0), (x1, y1) = self.base.bbox(r)
        xs = np.linspace(self.a, self.b, 401)
        g = []
        for x in xs:
            ys = np.linspace(float(self.base.lower(x)), float(self.base.upper(x)), 401)
            g.append((self.lower(x, ys).min(), self.upper(x, ys).max()))
        g = np.array(g)
        return (x0, y0, r * g[:, 0].min()), (x1, y1, r * g[:, 1].max())

    def interior_points(self, r):
        lat = lattice(self.base, r)
        pts = []
        for i1, i2 in lat.points:
            if not self.base.contains(i1, i2, r):
                continue
            lo = r * float(self.lower(i1 / r, i2 / r))
            hi = r * float(self.upper(i1 / r, i2 / r))
            for i3 in range(math.floor(lo), math.ceil(hi) + 1):
                if lo < i3 < hi and _strictly_inside2(self.base, i1, i2, r):
                    pts.append((i1, i2, i3))
        return np.array(pts, dtype=np.int64).reshape(-1, 3)


def _strictly_inside2(window, x, y, r):
    u = x / r
    return window.a < u < window.b and r * float(window.lower(u)) < y < r * float(window.upper(u))


def _segments(points):
    return list(zip(points[:-1], points[1:]))


def box(half=1.0) -> Window3:
    return Window3(square(half), Sheet(_ConstSheet(-half)), Sheet(_ConstSheet(half)), "box",
                   {"half": half})


def ball(radius=1.0) -> Window3:
    return Window3(disc(radius), Sheet(_CapSheet(radius, -1), cap=(radius, -1)),
                   Sheet(_CapSheet(radius, 1), cap=(radius, 1)), "ball", {"radius": radius})


def _cap_extrema(radius, r, x1lo, x1hi, x2lo, x2hi):
    R = radius * r
    nx = min(max(0.0, x1lo), x1hi) if not x1lo <= 0 <= x1hi else 0.0
    ny = min(max(0.0, x2lo), x2hi) if not x2lo <= 0 <= x2hi else 0.0
    near = math.hypot(nx, ny)
    if near > R * (1 + 1e-12):
        return None
    far = math.hypot(max(abs(x1lo), abs(x1hi)), max(abs(x2lo), abs(x2hi)))
    top = math.sqrt(max(0.0, R * R - near * near))
    bottom = math.sqrt(max(0.0, R * R - far * far)) if far <= R else 0.0
    return bottom, top


def _sheet_samples(window: Window3, r, i1, i2):
    """Scaled sample abscissae of P_2 = ([i1, i1+1) x [i2, i2+1]) intersected with the scaled base."""
    base = window.base
    lo1, hi1, _ = _column_domain(base, r, i1)
    lo1, hi1 = lo1 * r, hi1 * r
    m = SAMPLES_PER_UNIT_3D
    jumps1 = [r * j for s in (window.lower, window.upper) for j in s.jumps_x1]
    jumps1 += [r * j for j in base.lower.breaks] + [r * j for j in base.upper.breaks]
    x1 = np.linspace(lo1, hi1, m + 1)
    extra = [j for j in jumps1 if lo1 <= j <= hi1] + [j - 1e-9 for j in jumps1 if lo1 < j <= hi1]
    x1 = np.unique(np.concatenate([x1, extra]))
    ylo = np.maximum(float(i2), r * base.lower(np.clip(x1 / r, base.a, base.b)))
    yhi = np.minimum(float(i2 + 1), r * base.upper(np.clip(x1 / r, base.a, base.b)))
    ok = ylo <= yhi
    if not np.any(ok):
        return None
    x1, ylo, yhi = x1[ok], ylo[ok], yhi[ok]
    t = np.linspace(0.0, 1.0, m + 1)
    X1 = np.repeat(x1, m + 1)
    X2 = (ylo[:, None] + (yhi - ylo)[:, None] * t[None, :]).ravel()
    jumps2 = [r * j for s in (window.lower, window.upper) for j in s.jumps_x2]
    for j in jumps2:
        for jj in (j, j - 1e-9):
            sel = (ylo <= jj) & (jj <= yhi)
            X1 = np.concatenate([X1, x1[sel]])
            X2 = np.concatenate([X2, np.full(sel.sum(), jj)])
    return X1, X2


def sheet_bounds(window: Window3, r: float, i1: int, i2: int):
    """(floor inf f_l, ceil sup f_u) over P_2(r, i1, i2); None when P_2 is empty."""
    base = window.base
    if window.lower.cap and window.upper.cap and base.shape == "disc":
        lo1, hi1, _ = _column_domain(base, r, i1)
        box_ = (lo1 * r, hi1 * r, float(i2), float(i2 + 1))
        ext = _cap_extrema(window.upper.cap[0], r, *box_)
        if ext is None:
            return None
        return floor_snap(-ext[1]), ceil_snap(ext[1])
    pts = _sheet_samples(window, r, i1, i2)
    if pts is None:
        return None
    X1, X2 = pts
    lo = r * window.lower(X1 / r, X2 / r).min()
    hi = r * window.upper(X1 / r, X2 / r).max()
    return floor_snap(lo), ceil_snap(hi)


@lru_cache(maxsize=16)
def _lattice3(window: Window3, r: float) -> LatticeSet:
    base = lattice(window.base, r)
    rows = []
    for i1, i2 in base.points:
        b = sheet_bounds(window, r, int(i1), int(i2))
        if b is not None:
            rows.append((i1, i2, b[0], b[1]))
    cols = np.array(rows, dtype=np.int64).reshape(-1, 4)
    return LatticeSet(3, r, _expand(cols), cols)


BUILTIN_2D = {
    "square": square,
    "rectangle": rectangle,
    "disc": disc,
    "lshape": lshape,
    "step": step_window,
    "polygon": polygon,
}
BUILTIN_3D = {"box": box, "ball": ball}


def make_window(shape: str, **params):
    if shape in BUILTIN_2D:
        return BUILTIN_2D[shape](**params)
    if shape in BUILTIN_3D:
        return BUILTIN_3D[shape](**params)
    raise ParameterError(f"unknown window shape {shape!r}")
