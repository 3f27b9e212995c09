"""Quadrature, differentiation, root finding and distribution comparison.

Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate as _spi
from scipy import optimize as _spo

from .errors import DegenerateStep, NoSignChange, NonConvergence

MASS_TOL = 1e-6


@dataclass(frozen=True)
class QuadSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_QUAD = QuadSpec()


@dataclass(frozen=True)
class TabulatedPdf:
    """A density sampled on an increasing grid.

    Parameters
    ----------
    grid : array_like
        Strictly increasing abscissae.
    values : array_like
        Non-negative, finite density values at ``grid``.
    normalized : bool
        If True, the Simpson mass over the grid must be within ``mass_tol``
        of one.
    """

    grid: np.ndarray
    values: np.ndarray
    normalized: bool = False
    mass_tol: float = field(default=MASS_TOL, repr=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
            raise ValueError("grid and values must be 1-D arrays of equal length >= 2")
        if not np.all(np.diff(grid) > 0):
            raise ValueError("grid must be strictly increasing")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("density values must be finite and non-negative")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if self.normalized and abs(self.total_mass - 1.0) > self.mass_tol:
            raise ValueError(
                f"declared normalized but mass is {self.total_mass:.9g}"
            )

    @cached_property
    def total_mass(self) -> float:
        return float(_spi.simpson(self.values, x=self.grid))

    def cdf(self) -> np.ndarray:
        """Cumulative Simpson integral of the density, starting at 0."""
        return _spi.cumulative_simpson(self.values, x=self.grid, initial=0.0)

    def mean(self) -> float:
        return float(_spi.simpson(self.grid * self.values, x=self.grid))

    def __call__(self, x):
        return np.interp(x, self.grid, self.values, left=0.0, right=0.0)


def _check(res, err, ier, spec, what):
    bound = max(spec.abs_tol, spec.rel_tol * abs(res))
    if not np.isfinite(res) or (ier != 0 and err > bound):
        raise NonConvergence(
            f"{what}: estimate {res:.6g} with error {err:.3g} exceeds {bound:.3g}"
        )
    return float(res)


def integrate(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    spec: QuadSpec = DEFAULT_QUAD,
    points: Optional[Sequence[float]] = None,
) -> float:
    """Adaptive Gauss-Kronrod integral of ``f`` over ``[lo, hi]``.

    Endpoints are never evaluated, so integrable endpoint singularities are
    fine. ``points`` marks interior locations where the integrand changes
    scale; they seed the subdivision.

    Raises
    ------
    NonConvergence
        If the subdivision budget is exhausted before the error estimate
        meets ``max(abs_tol, rel_tol * |result|)``.
    """
    if not lo < hi:
        raise ValueError("integration requires lo < hi")
    pts = None
    if points is not None:
        pts = [p for p in points if lo < p < hi] or None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _spi.IntegrationWarning)
        out = _spi.quad(
            f,
            lo,
            hi,
            epsabs=spec.abs_tol,
            epsrel=spec.rel_tol,
            limit=spec.max_subdivisions,
            points=pts,
            full_output=1,
        )
    return _check(out[0], out[1], out[3] if len(out) > 3 else 0, spec, "integrate")


def integrate_semiinfinite(
    f: Callable[[float], float],
    lo: float,
    spec: QuadSpec = DEFAULT_QUAD,
    scale: float = 1.0,
    points: Optional[Sequence[float]] = None,
) -> float:
    """Integral of ``f`` over ``[lo, inf)``.

    Uses ``x = lo + scale * t / (1 - t)`` on ``t in [0, 1)``. ``scale`` should
    be the characteristic width of the integrand (e.g. its mean) so the
    mapped integrand is not squeezed against either end. ``points`` are given
    in the original variable.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")

    def g(t):
        u = 1.0 - t
        val = f(lo + scale * t / u)
        return 0.0 if val == 0.0 else val * scale / (u * u)

    tpts = None
    if points is not None:
        tpts = [(p - lo) / (scale + p - lo) for p in points if p > lo]
    return integrate(g, 0.0, 1.0, spec, points=tpts)


def differentiate(
    F: Callable[[float], float],
    x: float,
    scale: float,
    lower: Optional[float] = None,
    levels: int = 10,
) -> float:
    """Central difference at ``x`` refined by Richardson extrapolation.

    Ridders' scheme: the step starts at ``0.1 * scale`` and shrinks by 1.4
    per level; the tableau entry with the smallest error estimate wins.

    Raises
    ------
    DegenerateStep
        If ``x - h`` falls below ``lower`` for the initial step.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    h = 0.1 * scale
    if lower is not None and x - h < lower:
        raise DegenerateStep(f"x - h = {x - h:.6g} is below the domain bound {lower:.6g}")
    con, con2 = 1.4, 1.96
    a = np.zeros((levels, levels))
    a[0, 0] = (F(x + h) - F(x - h)) / (2.0 * h)
    best, err = a[0, 0], math.inf
    for i in range(1, levels):
        h /= con
        a[0, i] = (F(x + h) - F(x - h)) / (2.0 * h)
        fac = con2
        for j in range(1, i + 1):
            a[j, i] = (a[j - 1, i] * fac - a[j - 1, i - 1]) / (fac - 1.0)
            fac *= con2
            e = max(abs(a[j, i] - a[j - 1, i]), abs(a[j, i] - a[j - 1, i - 1]))
            if e <= err:
                err, best = e, a[j, i]
        if abs(a[i, i] - a[i - 1, i - 1]) >= 2.0 * err:
            break
    return float(best)


def find_root(g: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10) -> float:
    """Brent's method on a sign-changing bracket.

    Raises
    ------
    NoSignChange
        If ``g(lo)`` and ``g(hi)`` have the same sign.
    """
    glo, ghi = g(lo), g(hi)
    if glo == 0.0:
        return float(lo)
    if ghi == 0.0:
        return float(hi)
    if np.sign(glo) == np.sign(ghi):
        raise NoSignChange(
            f"no sign change on [{lo:.6g}, {hi:.6g}]: g = {glo:.6g}, {ghi:.6g}"
        )
    return float(_spo.brentq(g, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500))


def ks_distance(analytic: TabulatedPdf, samples) -> float:
    """Sup distance between the empirical CDF of ``samples`` and the CDF of
    ``analytic`` (cumulative Simpson, linearly interpolated)."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("samples must be nonempty")
    if np.any(x[1:] < x[:-1]):
        x = np.sort(x)
    cdf = analytic.cdf()
    F = np.interp(x, analytic.grid, cdf, left=0.0, right=cdf[-1])
    n = x.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def gauss_legendre(n: int, lo: float = 0.0, hi: float = 1.0):
    """Gauss-Legendre nodes and weights mapped to ``[lo, hi]``."""
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def _coarse_estimate(f, edges, order=32):
    x, w = np.polynomial.legendre.leggauss(order)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        nodes = a + half * (x + 1.0)
        vals = np.stack([np.asarray(f(t), dtype=float) for t in nodes])
        total = total + half * np.tensordot(w, vals, axes=1)
    return total


def integrate_vec(
    f: Callable[[float], np.ndarray],
    lo: float,
    hi: float,
    spec: QuadSpec = DEFAULT_QUAD,
    points: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """Integrate an array-valued integrand over ``[lo, hi]``.

    Each output component is first scaled by a coarse Gauss-Legendre estimate
    of its own magnitude, so ``spec`` applies componentwise in relative terms
    even when components differ by hundreds of orders of magnitude.
    """
    if not lo < hi:
        raise ValueError("integration requires lo < hi")
    inner = sorted(p for p in (points or ()) if lo < p < hi)
    edges = [lo, *inner, hi]
    with np.errstate(all="ignore"):
        coarse = np.abs(_coarse_estimate(f, edges))
    scale = np.where(np.isfinite(coarse) & (coarse > 0), coarse, 1.0)

    def g(t):
        return np.asarray(f(t), dtype=float) / scale

    with warnings.catch_warnings(), np.errstate(all="ignore"):
        warnings.simplefilter("ignore", _spi.IntegrationWarning)
        res, err, info = _spi.quad_vec(
            g,
            lo,
            hi,
            epsabs=spec.abs_tol,
            epsrel=spec.rel_tol,
            norm="max",
            limit=spec.max_subdivisions,
            points=inner or None,
            full_output=True,
        )
    res = np.asarray(res, dtype=float)
    if not np.all(np.isfinite(res)):
        raise NonConvergence("integrate_vec: non-finite result")
    if info.status != 0 and err > max(spec.abs_tol, spec.rel_tol * np.max(np.abs(res))):
        raise NonConvergence(f"integrate_vec: error {err:.3g} after {info.intervals.shape[0]} intervals")
    return res * scale
