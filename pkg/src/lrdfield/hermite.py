"""Probabilists' Hermite polynomials and Hermite expansions of functions of a
standard normal variable.

Coefficients are stored unnormalized, ``C_j = E[G(X) H_j(X)]`` with
``X ~ N(0, 1)``, so that ``G = sum_j C_j H_j / j!``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.special import roots_hermitenorm
from scipy.stats import norm

from .errors import IntegrabilityError, ParameterError

RANK_TOL = 1e-10
QUAD_TOL = 1e-10
MIN_NODES = 32
MAX_NODES = 512


def hermite_eval(m, x):
    """H_m(x) by the three-term recurrence H_{k+1} = x H_k - k H_{k-1}."""
    if m < 0:
        raise ParameterError(f"Hermite order must be >= 0, got {m}")
    x = np.asarray(x, dtype=float)
    h_prev = np.ones_like(x)
    if m == 0:
        return h_prev if x.ndim else float(h_prev)
    h = x.copy()
    for k in range(1, m):
        h_prev, h = h, x * h - k * h_prev
    return h if x.ndim else float(h)


def hermite_table(order, x):
    """Rows H_0(x) .. H_order(x) stacked along a new leading axis."""
    x = np.asarray(x, dtype=float)
    out = np.empty((order + 1,) + x.shape)
    out[0] = 1.0
    if order >= 1:
        out[1] = x
    for k in range(1, order):
        out[k + 1] = x * out[k] - k * out[k - 1]
    return out


@lru_cache(maxsize=16)
def _gauss_nodes(n):
    nodes, weights = roots_hermitenorm(n)
    return nodes, weights / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class HermiteExpansion:
    coefficients: tuple
    truncation_order: int
    hermite_rank: Optional[int]

    def __call__(self, x):
        table = hermite_table(self.truncation_order, x)
        weights = np.array([c / math.factorial(j) for j, c in enumerate(self.coefficients)])
        return np.tensordot(weights, table, axes=1)

    def parseval_partial_sums(self):
        terms = [c * c / math.factorial(j) for j, c in enumerate(self.coefficients)]
        return np.cumsum(terms)


def hermite_rank(coefficients: Sequence[float], tol: float = RANK_TOL) -> Optional[int]:
    """Smallest j >= 1 with a nonzero coefficient, or None if all vanish."""
    scale = max(1.0, abs(coefficients[0]))
    for j in range(1, len(coefficients)):
        if abs(coefficients[j]) > tol * scale:
            return j
    return None


def _gh_coefficients(G, J, n):
    nodes, weights = _gauss_nodes(n)
    with np.errstate(over="ignore", invalid="ignore"):
        values = np.asarray(G(nodes), dtype=float)
        energy = float(weights @ (values * values))
    if not (np.all(np.isfinite(values)) and np.isfinite(energy)):
        raise IntegrabilityError("G^2 is not finite under the quadrature rule")
    table = hermite_table(J, nodes)
    return table @ (weights * values), energy


def _piecewise_coefficients(G, J, breakpoints):
    edges = [-np.inf] + sorted(float(b) for b in breakpoints) + [np.inf]
    coeffs = np.zeros(J + 1)
    for j in range(J + 1):
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            val, _ = integrate.quad(
                lambda t: G(t) * hermite_eval(j, t) * norm.pdf(t), lo, hi, limit=200
            )
            total += val
        coeffs[j] = total
    energy = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err = integrate.quad(lambda t: G(t) ** 2 * norm.pdf(t), lo, hi, limit=200)
        if not np.isfinite(val) or err > 1e-6 * max(1.0, abs(val)):
            raise IntegrabilityError("quadrature of G^2 against the normal density did not converge")
        energy += val
    return coeffs


def expansion_coefficients(
    G: Callable,
    J: int,
    breakpoints: Sequence[float] = (),
    tol: float = QUAD_TOL,
    rank_tol: float = RANK_TOL,
) -> HermiteExpansion:
    """Hermite coefficients C_0..C_J of G.

    Smooth G uses Gauss-Hermite quadrature, doubling the node count until two
    successive rules agree to ``tol`` on every normalised coefficient
    C_j / sqrt(j!) and on E[G^2].
    Functions with jumps must declare them in ``breakpoints``; those are
    integrated piecewise with adaptive quadrature instead, since Gauss-Hermite
    converges too slowly across a discontinuity.
    """
    if J < 0:
        raise ParameterError("truncation order must be >= 0")
    if breakpoints:
        coeffs = _piecewise_coefficients(G, J, breakpoints)
    else:
        # compare in the orthonormal scale C_j / sqrt(j!); absolute round-off
        # in C_j grows like sqrt(j!) for any rule
        norms = np.sqrt([float(math.factorial(j)) for j in range(J + 1)])
        n = max(MIN_NODES, 2 * (J + 1))
        prev, prev_energy = _gh_coefficients(G, J, n)
        while True:
            n *= 2
            if n > MAX_NODES:
                raise IntegrabilityError(
                    f"Gauss-Hermite quadrature did not converge with {MAX_NODES} nodes; "
                    "G may not be square integrable against the normal density"
                )
            cur, energy = _gh_coefficients(G, J, n)
            scale = tol * max(1.0, math.sqrt(abs(energy)))
            if np.all(np.abs(cur - prev) / norms <= scale) and abs(energy - prev_energy) <= tol * max(1.0, abs(energy)):
                coeffs = cur
                break
            prev, prev_energy = cur, energy
    coeffs = tuple(float(c) for c in coeffs)
    return HermiteExpansion(coeffs, J, hermite_rank(coeffs, rank_tol))


def level_excess_coefficients(level: float, J: int) -> tuple:
    """Closed-form coefficients of the indicator t -> 1{t > level}."""
    c = [1.0 - norm.cdf(level)]
    density = norm.pdf(level)
    c.extend(density * hermite_eval(m - 1, level) for m in range(1, J + 1))
    return tuple(float(v) for v in c)


def moments_as_hermite(kappa: int) -> list[tuple[int, int]]:
    """Terms (order, coefficient) with t**kappa == sum coefficient * H_order(t)."""
    if kappa < 0:
        raise ParameterError("moment order must be >= 0")
    terms = []
    for m in range(kappa // 2 + 1):
        coef = math.factorial(kappa) // (2**m * math.factorial(m) * math.factorial(kappa - 2 * m))
        terms.append((kappa - 2 * m, coef))
    return terms
