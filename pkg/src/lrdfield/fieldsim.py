"""Simulation of zero-mean, unit-variance isotropic Gaussian fields on grids.

Two backends:

``circulant``
    Exact circulant embedding for any covariance model. The torus is enlarged
    (x2, then x4) while its spectrum has eigenvalues below -1e-8 times the
    largest one; whatever negative mass is left is clipped and reported.
``random_wave``
    Superposition of K random plane waves whose frequencies follow the
    spectral measure of the Bessel family. The covariance is exact for any K;
    the marginal law tends to Gaussian as K grows.
"""
from __future__ import annotations

import dataclasses
import json
import math
import struct
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import fft as sfft

from . import rng as _rng
from .covariance import CovarianceModel, cov_eval
from .errors import ApproximationWarning, ParameterError, UnsupportedModelError

NEG_EIG_TOL = 1e-8
CLIP_WARN = 1e-3
DEFAULT_WAVES = 2000


@dataclass(frozen=True)
class GridSpec:
    origin: tuple
    step: float
    extent: tuple

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        object.__setattr__(self, "extent", tuple(int(e) for e in self.extent))
        if len(self.origin) != len(self.extent):
            raise ParameterError("origin and extent must have the same length")
        if self.step <= 0 or min(self.extent) < 1:
            raise ParameterError("grid needs a positive step and extents >= 1")

    @property
    def dimension(self) -> int:
        return len(self.extent)

    @property
    def size(self) -> int:
        return int(np.prod(self.extent))

    @property
    def denominator(self) -> Optional[int]:
        """m when step == 1/m for an integer m, else None."""
        m = round(1.0 / self.step)
        return m if m >= 1 and abs(1.0 / m - self.step) < 1e-12 else None

    def axis(self, k: int) -> np.ndarray:
        m = self.denominator
        idx = np.arange(self.extent[k])
        if m is not None and abs(self.origin[k] * m - round(self.origin[k] * m)) < 1e-9:
            # exact rational nodes, e.g. -10 + i/10 without accumulated error
            return (round(self.origin[k] * m) + idx) / m
        return self.origin[k] + self.step * idx

    def axes(self):
        return [self.axis(k) for k in range(self.dimension)]

    def upper(self):
        return tuple(self.origin[k] + self.step * (self.extent[k] - 1) for k in range(self.dimension))


@dataclass(frozen=True, eq=False)
class FieldRealization:
    grid: GridSpec
    values: np.ndarray
    seed: int
    method: str
    model: CovarianceModel
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.values.shape != self.grid.extent:
            raise ParameterError("values do not match the grid extent")
        self.values.setflags(write=False)


# ---------------------------------------------------------------- circulant


def _embedding_shape(extent, factor):
    return tuple(1 if m == 1 else sfft.next_fast_len(2 * (m - 1)) * factor for m in extent)


@lru_cache(maxsize=8)
def _circulant_spectrum(model: CovarianceModel, extent: tuple, step: float):
    for factor in (1, 2, 4):
        shape = _embedding_shape(extent, factor)
        lags = np.meshgrid(
            *[np.minimum(np.arange(N), N - np.arange(N)) * step for N in shape], indexing="ij"
        )
        dist = np.sqrt(sum(l * l for l in lags))
        lam = sfft.fftn(cov_eval(model, dist)).real
        if lam.min() >= -NEG_EIG_TOL * lam.max():
            break
    neg = lam < 0
    clipped = float(-lam[neg].sum() / lam[~neg].sum()) if neg.any() else 0.0
    lam = np.where(neg, 0.0, lam)
    amp = np.sqrt(lam / lam.size)
    amp.setflags(write=False)
    return amp, shape, factor, clipped


def simulate_circulant(model: CovarianceModel, grid: GridSpec, seed: int) -> FieldRealization:
    if grid.dimension != model.dimension:
        raise ParameterError("grid and model dimensions differ")
    amp, shape, factor, clipped = _circulant_spectrum(model, grid.extent, float(grid.step))
    gen = _rng.generator(seed)
    z = gen.standard_normal(shape) + 1j * gen.standard_normal(shape)
    full = sfft.fftn(amp * z).real
    values = np.ascontiguousarray(full[tuple(slice(0, m) for m in grid.extent)])
    meta = {"embedding_shape": list(shape), "enlargement": factor, "clipped_mass": clipped}
    if clipped > CLIP_WARN:
        meta["warning"] = "approximation: clipped eigenvalue mass above threshold"
        warnings.warn(
            f"circulant embedding clipped {clipped:.2e} of the spectral mass", ApproximationWarning
        )
    return FieldRealization(grid, values, int(seed), "circulant_embedding", model, meta)


# -------------------------------------------------------------- random wave


def _wave_frequencies(model: CovarianceModel, gen: np.random.Generator, K: int):
    n = model.dimension
    if n == 1:
        direction = np.where(gen.random(K) < 0.5, -1.0, 1.0)[:, None]
    elif n == 2:
        theta = gen.uniform(0.0, 2.0 * math.pi, K)
        direction = np.column_stack([np.cos(theta), np.sin(theta)])
    else:
        g = gen.standard_normal((K, n))
        direction = g / np.linalg.norm(g, axis=1, keepdims=True)
    b = model.v - n / 2.0 + 1.0
    if b <= 1e-12:
        radius = np.ones(K)
    else:
        # 2^v Gamma(v+1) J_v(r)/r^v is the characteristic function of the
        # density proportional to (1 - |l|^2)^(v - n/2) on the unit ball
        radius = np.sqrt(gen.beta(n / 2.0, b, K))
    return direction * radius[:, None]


def _re_outer(c1, s1, w, c2, s2):
    """Re(E1 diag(w) E2^T) for E = C + iS using one real matrix product."""
    a, b = w.real, w.imag
    left = np.hstack([c1, s1])
    right = np.hstack([c2 * a - s2 * b, -(c2 * b + s2 * a)])
    return left @ right.T


def simulate_random_wave(model: CovarianceModel, grid: GridSpec, seed: int,
                         waves: int = DEFAULT_WAVES) -> FieldRealization:
    if model.family != "bessel":
        raise UnsupportedModelError("random-wave simulation supports only the bessel family")
    if waves < 1:
        raise ParameterError("need at least one wave")
    if grid.dimension != model.dimension:
        raise ParameterError("grid and model dimensions differ")
    gen = _rng.generator(seed)
    lam = _wave_frequencies(model, gen, waves)
    w = (gen.standard_normal(waves) - 1j * gen.standard_normal(waves)) / math.sqrt(waves)
    axes = grid.axes()
    trig = []
    for k, x in enumerate(axes):
        phase = np.outer(x, lam[:, k])
        trig.append((np.cos(phase), np.sin(phase)))
    n = grid.dimension
    if n == 1:
        c, s = trig[0]
        values = c @ w.real - s @ w.imag
    elif n == 2:
        values = _re_outer(*trig[0], w, *trig[1])
    else:
        values = np.empty(grid.extent)
        c3, s3 = trig[2]
        for l in range(grid.extent[2]):
            wl = w * (c3[l] + 1j * s3[l])
            values[:, :, l] = _re_outer(*trig[0], wl, *trig[1])
    return FieldRealization(grid, np.ascontiguousarray(values), int(seed), "random_wave", model,
                            {"waves": int(waves)})


def default_method(model: CovarianceModel) -> str:
    return "random_wave" if model.family == "bessel" else "circulant"


def simulate(model: CovarianceModel, grid: GridSpec, seed: int, method: Optional[str] = None,
             waves: int = DEFAULT_WAVES) -> FieldRealization:
    method = method or default_method(model)
    if method == "random_wave":
        return simulate_random_wave(model, grid, seed, waves)
    if method in ("circulant", "circulant_embedding"):
        return simulate_circulant(model, grid, seed)
    raise ParameterError(f"unknown simulation method {method!r}")


# --------------------------------------------------------------------- I/O

MAGIC = b"LRDFLD1\x00"


def write_realization(path, realization: FieldRealization) -> Path:
    """Flat binary dump plus a JSON sidecar at ``<path>.json``.

    Layout, little-endian: 8-byte magic ``LRDFLD1\\0``; uint32 dimension n;
    uint32 zero; n x uint64 extents; n x float64 origin; float64 step;
    uint64 seed; then prod(extents) float64 values in C order.
    """
    path = Path(path)
    g = realization.grid
    n = g.dimension
    header = MAGIC + struct.pack(f"<II{n}Q{n}ddQ", n, 0, *g.extent, *g.origin, g.step,
                                 realization.seed)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(realization.values, dtype="<f8").tobytes())
    meta = {
        "method": realization.method,
        "seed": realization.seed,
        "model": dataclasses.asdict(realization.model),
        "grid": {"origin": list(g.origin), "step": g.step, "extent": list(g.extent)},
        "metadata": realization.metadata,
    }
    Path(str(path) + ".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return path


def read_values(path):
    """Read a dump back as (GridSpec, seed, values)."""
    data = Path(path).read_bytes()
    if data[:8] != MAGIC:
        raise ParameterError(f"{path} is not a field dump")
    n, _ = struct.unpack_from("<II", data, 8)
    fmt = f"<{n}Q{n}ddQ"
    fields = struct.unpack_from(fmt, data, 16)
    extent, origin = fields[:n], fields[n:2 * n]
    step, seed = fields[2 * n], fields[2 * n + 1]
    offset = 16 + struct.calcsize(fmt)
    values = np.frombuffer(data, dtype="<f8", offset=offset).reshape(extent).copy()
    return GridSpec(origin, step, extent), seed, values
