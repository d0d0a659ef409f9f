"""Independent reference implementations used only by the tests.

They re-derive results from definitions with plain loops, dense sampling
or power series, without calling the package routines they check.
"""
import math

import numpy as np

SNAP = 1e-9


def bessel_j_series(v, r, terms=80):
    """J_v(r) from its ascending power series."""
    total = math.fsum(
        (-1) ** k * (r / 2.0) ** (2 * k + v) / (math.factorial(k) * math.gamma(k + v + 1.0))
        for k in range(terms)
    )
    return total


def hermite_explicit(m, x):
    return [1.0, x, x * x - 1.0, x**3 - 3.0 * x][m]


def snap_floor(v):
    k = round(v)
    return int(k) if abs(v - k) <= SNAP * max(1.0, abs(v)) else math.floor(v)


def snap_ceil(v):
    k = round(v)
    return int(k) if abs(v - k) <= SNAP * max(1.0, abs(v)) else math.ceil(v)


def column_oracle(window, r, i, per_unit=1000):
    """(inf f_l, sup f_u) of the scaled boundaries over column i by dense sampling."""
    ar, br = window.a * r, window.b * r
    lo, hi = max(float(i), ar), min(float(i + 1), br)
    if lo > hi:
        xs = np.array([br])
    else:
        n = max(2, int(math.ceil(per_unit * (hi - lo))) + 1)
        xs = np.linspace(lo, hi, n)
        if hi != br:
            # half-open column: drop the right end, keep a point just left of it
            xs = np.append(xs[:-1], hi - 1e-9)
        jumps = [r * j for j in list(window.lower.breaks) + list(window.upper.breaks)]
        xs = np.concatenate([xs, [j for j in jumps if lo <= j <= hi and (j < hi or hi == br)],
                             [j - 1e-9 for j in jumps if lo < j - 1e-9 < hi]])
    u = np.clip(xs / r, window.a, window.b)
    low = r * np.asarray(window.lower(u)).min()
    up = r * np.asarray(window.upper(u)).max()
    return low, up


def lattice_oracle(window, r, per_unit=1000):
    pts = set()
    for i in range(math.floor(window.a * r), math.ceil(window.b * r) + 1):
        low, up = column_oracle(window, r, i, per_unit)
        for j in range(snap_floor(low), snap_ceil(up) + 1):
            pts.add((i, j))
    return pts


def value_at(field, x, y):
    g = field.grid
    k = int(round((x - g.origin[0]) / g.step))
    l = int(round((y - g.origin[1]) / g.step))
    return float(field.values[k, l])


def additive_loop(field, points, kappa, g):
    total = 0.0
    for i, j in sorted(points):
        xi = value_at(field, i, j)
        total += float(g(float(i), float(j))) * float(np.polynomial.hermite_e.hermeval(xi, [0] * kappa + [1]))
    return total


def riemann_loop(field, window, r, kappa, g, h):
    """h^2 times the sum over multiples of h inside the closed scaled window."""
    total = 0.0
    x0, y0 = field.grid.origin
    nx, ny = field.grid.extent
    step = field.grid.step
    k = round(h / step)
    tol = 1e-9 * max(1.0, r)
    for a in range(nx):
        x = x0 + a * step
        if round(x / step) % k:
            continue
        u = x / r
        if u < window.a - 1e-12 or u > window.b + 1e-12:
            continue
        uc = min(max(u, window.a), window.b)
        lo, hi = r * float(window.lower(uc)), r * float(window.upper(uc))
        for b in range(ny):
            y = y0 + b * step
            if round(y / step) % k or not lo - tol <= y <= hi + tol:
                continue
            xi = float(field.values[a, b])
            total += float(g(x, y)) * float(np.polynomial.hermite_e.hermeval(xi, [0] * kappa + [1]))
    return h * h * total


def square_closed_riemann(field, r, h):
    """Double sum over k, l = 0..2r/h of (1 + (x+y)^2)(xi^2 - 1) on [-r, r]^2, scaled."""
    total = 0.0
    n = int(round(2 * r / h))
    for k in range(n + 1):
        for l in range(n + 1):
            x, y = -r + k * h, -r + l * h
            xi = value_at(field, x, y)
            total += (1.0 + (x + y) ** 2) * (xi * xi - 1.0)
    return h * h * total / (r**1.5 * (1.0 + 4.0 * r * r))


def square_closed_additive(field, r):
    total = 0.0
    for i in range(-int(r), int(r) + 1):
        for j in range(-int(r), int(r) + 1):
            xi = value_at(field, i, j)
            total += (1.0 + (i + j) ** 2) * (xi * xi - 1.0)
    return total / (r**1.5 * (1.0 + 4.0 * r * r))
