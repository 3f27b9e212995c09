"""Intercell interference and location/cell rates with six first-tier
interferers.

Under Rayleigh fading the total interference at a location is a sum of six
exponentials with distinct means ``I_j``: a hypoexponential variable with
density ``sum_j C_j / I_j exp(-eta / I_j)`` and
``C_j = prod_{l != j} I_j / (I_j - I_l)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

import mpmath
import numpy as np
from scipy import linalg as _linalg

from . import _kernels
from .channel import (CellScenario, FadingModel, RayleighPowerFading, UserLocation,
                      NUM_INTERFERERS)
from .errors import NearDegenerateMeans, NonConvergence, PoleCrossing
from .numerics import (DEFAULT_QUAD, QuadSpec, TabulatedPdf, find_root, gauss_legendre,
                       integrate_semiinfinite)
from .schedulers import Greedy, ProportionalFair, RoundRobin, SchedulerSpec, TruncatedGaussian

DEGENERACY_TOL = 1e-9
PERTURBATION = 1e-6
# max |C_j| beyond which double-precision mixtures lose more than ~1e-10
ILL_CONDITIONED = 1e6


def hypoexp_coefficients(means) -> np.ndarray:
    """Partial-fraction weights of a sum of independent exponentials.

    Raises
    ------
    NearDegenerateMeans
        If two means agree to within one part in 1e9.
    """
    m = np.asarray(means, dtype=float)
    if m.ndim != 1 or m.size < 1 or np.any(m <= 0):
        raise ValueError("means must be a positive 1-D vector")
    diff = m[:, None] - m[None, :]
    np.fill_diagonal(diff, np.inf)
    rel = np.abs(diff) / np.maximum(m[:, None], m[None, :])
    if m.size > 1 and rel.min() <= DEGENERACY_TOL:
        raise NearDegenerateMeans(
            f"interference means coincide to {rel.min():.2g} relative"
        )
    ratio = m[:, None] / diff
    np.fill_diagonal(ratio, 1.0)
    return ratio.prod(axis=1)


@dataclass(frozen=True)
class InterferenceProfile:
    """Mean signal and interference powers at one user location.

    ``coefficients`` is ``None`` when the interferer means are too close for
    the partial-fraction form; closed forms that need it then raise.
    """

    location: UserLocation
    signal_mean: float
    mean_interference: np.ndarray
    coefficients: Optional[np.ndarray]

    @classmethod
    def at(cls, scenario: CellScenario, loc: UserLocation, fading_mean: float = 1.0,
           perturb: bool = True) -> "InterferenceProfile":
        """Profile at ``loc``. Locations with coinciding interferer distances
        (cell centre, symmetry axes) are nudged by one part in 1e6 of the
        cell radius when ``perturb`` is set."""
        sig, imeans = location_means(scenario, np.array([loc.u]), np.array([loc.v]), fading_mean)
        try:
            coeffs = hypoexp_coefficients(imeans[0])
        except NearDegenerateMeans:
            if not perturb:
                raise
            eps = PERTURBATION * scenario.radius
            loc = UserLocation(loc.u + eps * math.cos(1.0), loc.v + eps * math.sin(1.0))
            sig, imeans = location_means(scenario, np.array([loc.u]), np.array([loc.v]), fading_mean)
            coeffs = hypoexp_coefficients(imeans[0])
        return cls(loc, float(sig[0]), imeans[0], coeffs)

    @property
    def conditioning(self) -> float:
        """``max |C_j|``; relative cancellation error of the mixture form is
        about this times machine epsilon."""
        return float(np.max(np.abs(self.coefficients)))


def location_means(scenario: CellScenario, u, v, fading_mean: float = 1.0):
    """Mean serving power ``xi delta^-alpha`` and the (n, 6) interferer mean
    powers at locations ``(u, v)``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    sp = scenario.serving
    with np.errstate(divide="ignore"):
        sig = sp.xi * np.hypot(u, v) ** (-sp.exponent) * fading_mean
    pos = scenario.interferer_positions()
    d = np.hypot(u[:, None] - pos[None, :, 0], v[:, None] - pos[None, :, 1])
    xi = np.array([p.xi for p in scenario.interferers])
    al = np.array([p.exponent for p in scenario.interferers])
    return sig, xi[None, :] * d ** (-al[None, :]) * fading_mean


def interference_mgf(profile: InterferenceProfile, s: float, fading: Optional[FadingModel] = None) -> float:
    """``E[exp(s I_total)]`` as the product of per-interferer MGFs.

    ``mean_interference`` already carries the fading mean, so each factor is
    the MGF of a unit-mean fading scaled by ``I_j``.
    """
    top = float(np.max(profile.mean_interference))
    if fading is None or isinstance(fading, RayleighPowerFading):
        if s * top >= 1.0:
            raise PoleCrossing(f"s = {s:.6g} >= 1 / max(I_j) = {1 / top:.6g}")
        return float(np.prod(1.0 / (1.0 - s * profile.mean_interference)))
    out = 1.0
    for m in profile.mean_interference:
        out *= fading.mgf(s * m / fading.mean)
    return out


def interference_pdf(profile: InterferenceProfile, eta) -> np.ndarray:
    """Hypoexponential density of the total interference (Rayleigh)."""
    if profile.coefficients is None:
        raise NearDegenerateMeans("profile has no partial-fraction coefficients")
    eta = np.asarray(eta, dtype=float)
    if profile.conditioning > ILL_CONDITIONED:
        return _hypoexp_pdf_chain(eta, profile.mean_interference)
    # the signed mixture can round to -eps where the density is ~0
    return np.maximum(_kernels.hypoexp_pdf(eta, profile.coefficients, profile.mean_interference), 0.0)


def _hypoexp_pdf_chain(eta, means):
    """Hypoexponential density as the absorption density of a chain of
    exponential phases, ``f(eta) = [exp(Q eta)]_{0,k-1} / m_{k-1}``. No
    partial fractions, so no cancellation when means nearly coincide."""
    rates = 1.0 / np.asarray(means, dtype=float)
    k = rates.size
    Q = np.diag(-rates) + np.diag(rates[:-1], 1)
    flat = eta.ravel()
    out = np.array([_linalg.expm(Q * e)[0, k - 1] if e > 0 else 0.0 for e in flat]) * rates[-1]
    return np.maximum(out, 0.0).reshape(eta.shape)


def interference_pdf_numeric(means, fading: FadingModel, grid_points: int = 1 << 14,
                             span: float = 40.0) -> TabulatedPdf:
    """Density of ``sum_j m_j A_j / E[A]`` by repeated pairwise convolution on
    a uniform grid (any fading law)."""
    means = np.asarray(means, dtype=float)
    top = span * means.sum()
    h = top / (grid_points - 1)
    x = np.arange(grid_points) * h
    mu = fading.mean
    total = None
    for m in means:
        c = m / mu
        comp = fading.pdf(x / c) / c
        comp[0] = fading.pdf(h / (2 * c)) / c if not np.isfinite(comp[0]) else comp[0]
        # unit trapezoid mass per factor keeps narrow components from leaking mass
        comp /= h * (comp.sum() - 0.5 * (comp[0] + comp[-1]))
        if total is None:
            total = comp
        else:
            full = np.convolve(total, comp)[:grid_points] * h
            # trapezoid end correction
            full -= 0.5 * h * (total[0] * comp + comp[0] * total)
            total = np.maximum(full, 0.0)
    return TabulatedPdf(x, total)


def sinr_pdf_at(profile: InterferenceProfile, fading: FadingModel, noise: float, gamma_grid,
                quad: QuadSpec = DEFAULT_QUAD, interference: Optional[TabulatedPdf] = None,
                zero_interference: bool = False) -> TabulatedPdf:
    """SINR density at a location by integrating the conditional signal
    density against the interference density.

    For Rayleigh fading the hypoexponential interference density is used
    unless ``interference`` is given; other laws need ``interference`` (see
    :func:`interference_pdf_numeric`), which is computed on demand.
    """
    gamma_grid = np.asarray(gamma_grid, dtype=float)
    sig = profile.signal_mean / fading.mean
    if zero_interference:
        vals = noise / sig * fading.pdf(noise * gamma_grid / sig)
        return TabulatedPdf(gamma_grid, vals)
    if interference is None and isinstance(fading, RayleighPowerFading) and profile.coefficients is not None:
        def f_int(eta):
            return float(interference_pdf(profile, np.array([eta]))[0])
    else:
        tab = interference or interference_pdf_numeric(profile.mean_interference, fading)

        def f_int(eta):
            return float(np.interp(eta, tab.grid, tab.values, right=0.0))

    scale = float(profile.mean_interference.sum())
    vals = np.empty_like(gamma_grid)
    for i, g in enumerate(gamma_grid):
        def h(eta, g=g):
            w = (noise + eta) / sig
            return w * float(fading.pdf(w * g)) * f_int(eta)

        # at large g the signal factor cuts the eta integrand off near sig / g
        vals[i] = integrate_semiinfinite(h, 0.0, quad, scale=scale / (1.0 + g * scale / sig))
    return TabulatedPdf(gamma_grid, np.maximum(vals, 0.0))


def rate_pdf_at(profile: InterferenceProfile, fading: FadingModel, noise: float, r_grid,
                method: str = "closed", quad: QuadSpec = DEFAULT_QUAD) -> TabulatedPdf:
    """Rate density ``e^r f_SINR(e^r - 1)`` at a location.

    ``method="closed"`` (Rayleigh only) evaluates::

        e^r exp(-(e^r - 1) I_n / S) sum_j C_j (c_j + d_j)
        c_j = I_n / ((e^r - 1) I_j + S),  d_j = S I_j / ((e^r - 1) I_j + S)^2

    with ``S`` the mean serving power. ``method="quadrature"`` goes through
    :func:`sinr_pdf_at`.
    """
    r = np.asarray(r_grid, dtype=float)
    if method == "quadrature":
        f = sinr_pdf_at(profile, fading, noise, np.expm1(r), quad)
        return TabulatedPdf(r, np.exp(r) * f.values)
    if method != "closed":
        raise ValueError("method must be 'closed' or 'quadrature'")
    if not isinstance(fading, RayleighPowerFading):
        raise TypeError("closed-form rate pdf requires Rayleigh fading")
    return TabulatedPdf(r, np.maximum(rayleigh_rate_density(profile, noise, r), 0.0))


def rayleigh_rate_density(profile: InterferenceProfile, noise: float, r) -> np.ndarray:
    if profile.coefficients is None:
        raise NearDegenerateMeans("profile has no partial-fraction coefficients")
    r = np.asarray(r, dtype=float)
    # beyond r = 300 the density is below e^-290 and (e^r)^2 overflows
    far = r > 300.0
    if np.any(far):
        out = np.zeros_like(r)
        out[~far] = rayleigh_rate_density(profile, noise, r[~far])
        return out
    if profile.conditioning > ILL_CONDITIONED:
        return _rayleigh_rate_density_mp(profile, noise, r)
    g = np.expm1(r)[..., None]
    S, Ij, C = profile.signal_mean, profile.mean_interference, profile.coefficients
    den = g * Ij + S
    terms = C * (noise / den + S * Ij / den**2)
    return np.exp(r) * np.exp(-g[..., 0] * noise / S) * terms.sum(axis=-1)


def rayleigh_sinr_survival(profile: InterferenceProfile, noise: float, gamma) -> np.ndarray:
    """``P(SINR > g) = exp(-g I_n / S) prod_j 1 / (1 + g I_j / S)``;
    valid for coinciding means."""
    g = np.asarray(gamma, dtype=float)[..., None]
    S = profile.signal_mean
    return np.exp(-g[..., 0] * noise / S) / np.prod(1.0 + g * profile.mean_interference / S, axis=-1)


def avg_rate_interference_limited(profile: InterferenceProfile) -> float:
    """Mean rate with noise neglected::

        sum_j C_j S / (S - I_j) ln(1 + (S - I_j) / I_j)

    Terms with ``S`` equal to ``I_j`` take their limit ``C_j``.
    """
    if profile.coefficients is None:
        raise NearDegenerateMeans("profile has no partial-fraction coefficients")
    if profile.conditioning > ILL_CONDITIONED:
        return _avg_rate_interference_limited_mp(profile)
    S, Ij, C = profile.signal_mean, profile.mean_interference, profile.coefficients
    t = (S - Ij) / Ij
    with np.errstate(divide="ignore", invalid="ignore"):
        lr = np.where(np.abs(t) < 1e-8, 1.0 - 0.5 * t, np.log1p(t) / t)
    return float(np.sum(C * (1.0 + t) * lr))


def _mp_context(profile):
    # enough digits to absorb the cancellation between signed coefficients
    return max(30, int(math.log10(profile.conditioning)) + 25)


def _mp_coefficients(means):
    m = [mpmath.mpf(float(x)) for x in means]
    out = []
    for j, mj in enumerate(m):
        c = mpmath.mpf(1)
        for l, ml in enumerate(m):
            if l != j:
                c *= mj / (mj - ml)
        out.append(c)
    return m, out


def _avg_rate_interference_limited_mp(profile):
    with mpmath.workdps(_mp_context(profile)):
        m, C = _mp_coefficients(profile.mean_interference)
        S = mpmath.mpf(profile.signal_mean)
        total = mpmath.mpf(0)
        for mj, cj in zip(m, C):
            t = (S - mj) / mj
            total += cj * (1 + t) * (mpmath.log1p(t) / t if t != 0 else 1)
        return float(total)


def _rayleigh_rate_density_mp(profile, noise, r):
    out = np.empty(r.shape)
    with mpmath.workdps(_mp_context(profile)):
        m, C = _mp_coefficients(profile.mean_interference)
        S, n = mpmath.mpf(profile.signal_mean), mpmath.mpf(noise)
        for idx, rv in np.ndenumerate(r):
            g = mpmath.expm1(mpmath.mpf(float(rv)))
            acc = mpmath.mpf(0)
            for mj, cj in zip(m, C):
                den = g * mj + S
                acc += cj * (n / den + S * mj / den**2)
            out[idx] = float(mpmath.exp(rv) * mpmath.exp(-g * n / S) * acc)
    return out


_LOG_RULE = _kernels.log_rule()


def location_mean_rate(signal_mean, interf_means, noise: float) -> np.ndarray:
    """Mean Rayleigh rate at many locations at once (product-form survival,
    robust to coinciding means). ``interf_means`` has shape (n, k)."""
    sig = np.ascontiguousarray(np.atleast_1d(signal_mean), dtype=float)
    im = np.ascontiguousarray(np.atleast_2d(interf_means), dtype=float)
    if im.shape[1] == 0:
        im = np.zeros((sig.size, 0))
    return _kernels.location_mean_rate(sig, im, float(noise), *_LOG_RULE)


def mean_rate_at(profile: InterferenceProfile, noise: float, fading: Optional[FadingModel] = None) -> float:
    """Mean rate at a location, noise included."""
    if fading is None or isinstance(fading, RayleighPowerFading):
        return float(location_mean_rate([profile.signal_mean], profile.mean_interference[None, :], noise)[0])
    return _generic_mean_rate(profile.signal_mean, profile.mean_interference, fading, noise)


def _generic_mean_rate(signal_mean, imeans, fading, noise):
    """``int_0^inf P(SINR > g) / (1 + g) dg`` with the interference law
    tabulated by convolution."""
    tab = interference_pdf_numeric(imeans, fading, grid_points=1 << 14)
    eta, w = tab.grid, tab.values
    wts = np.full(eta.size, eta[1] - eta[0])
    wts[0] = wts[-1] = 0.5 * wts[0]
    sig = signal_mean / fading.mean

    def surv(g):
        return float(np.sum(wts * w * fading.sf((noise + eta) * g / sig)))

    scale = sig / (noise + float(np.sum(imeans)))
    return integrate_semiinfinite(lambda g: surv(g) / (1.0 + g), 0.0,
                                  QuadSpec(1e-9, 1e-7), scale=scale)


# -- truncated-Gaussian scheduler ----------------------------------------------

@dataclass(frozen=True)
class SchedulerDensity:
    """Radial selection density ``(1/beta) delta/sigma^2 exp(-delta^2/(2 sigma^2))``
    on ``[d0, rho]``. ``sigma = inf`` is the uniform-area density."""

    sigma: float
    rho: float
    d0: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not 0 <= self.d0 < self.rho:
            raise ValueError("need 0 <= d0 < rho")

    @property
    def uniform(self) -> bool:
        return math.isinf(self.sigma)

    @property
    def _span(self):
        # (rho^2 - d0^2) / (2 sigma^2)
        return (self.rho**2 - self.d0**2) / (2.0 * self.sigma**2)

    @property
    def beta(self) -> float:
        if self.uniform:
            return 0.0
        return math.exp(-self.d0**2 / (2 * self.sigma**2)) * -math.expm1(-self._span)

    def pdf(self, delta):
        d = np.asarray(delta, dtype=float)
        inside = (d >= self.d0) & (d <= self.rho)
        if self.uniform:
            return np.where(inside, 2.0 * d / (self.rho**2 - self.d0**2), 0.0)
        s2 = self.sigma**2
        # divide by beta inside the exponent to stay finite for tiny sigma
        lognorm = -self.d0**2 / (2 * s2) + math.log(-math.expm1(-self._span))
        with np.errstate(divide="ignore"):
            val = np.exp(np.log(d / s2) - d**2 / (2 * s2) - lognorm)
        return np.where(inside, val, 0.0)

    def cdf(self, delta):
        d = np.clip(np.asarray(delta, dtype=float), self.d0, self.rho)
        if self.uniform:
            return (d**2 - self.d0**2) / (self.rho**2 - self.d0**2)
        s2 = self.sigma**2
        return -np.expm1(-(d**2 - self.d0**2) / (2 * s2)) / -math.expm1(-self._span)

    def ppf(self, q):
        q = np.asarray(q, dtype=float)
        if self.uniform:
            return np.sqrt(self.d0**2 + q * (self.rho**2 - self.d0**2))
        with np.errstate(divide="ignore"):
            d2 = self.d0**2 - 2 * self.sigma**2 * np.log1p(q * math.expm1(-self._span))
        return np.minimum(np.sqrt(d2), self.rho)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.ppf(rng.random(n))

    def median(self) -> float:
        return float(self.ppf(0.5))


def scheduler_density(sched: SchedulerDensity, delta):
    return sched.pdf(delta)


def _density_for(sigma: float, scenario: CellScenario) -> SchedulerDensity:
    return SchedulerDensity(sigma, scenario.radius, scenario.user_min_distance)


def _delta_rule(sched: SchedulerDensity, n: int):
    """Composite Gauss-Legendre in ``ln delta``, panels split around ``sigma``.

    Rates behave like ``ln delta`` near the cell centre, so a rule in the
    log-distance variable converges geometrically. Weights are density times
    Jacobian and sum to one up to the rule's error.
    """
    lo, hi = math.log(sched.d0 if sched.d0 > 0 else 1e-9 * sched.rho), math.log(sched.rho)
    cuts = [lo, hi]
    if not sched.uniform:
        for k in (0.25, 1.0, 4.0):
            c = math.log(k * sched.sigma)
            if lo < c < hi:
                cuts.append(c)
    cuts = sorted(cuts)
    per = max(4, n // (len(cuts) - 1))
    nodes, weights = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        x, w = gauss_legendre(per, a, b)
        d = np.exp(x)
        nodes.append(d)
        weights.append(w * d * sched.pdf(d))
    return np.concatenate(nodes), np.concatenate(weights)


def zero_interference_rate(scenario: CellScenario, sched: SchedulerDensity,
                           fading: Optional[FadingModel] = None, n_delta: int = 256) -> float:
    """Cell average rate of the scheduler density with interferers switched
    off (noise only)."""
    fading = fading or RayleighPowerFading()
    d, w = _delta_rule(sched, n_delta)
    sig = scenario.serving.xi * d ** (-scenario.alpha) * fading.mean
    if isinstance(fading, RayleighPowerFading):
        vals = location_mean_rate(sig, np.zeros((d.size, 0)), scenario.noise_power)
    else:
        vals = np.array([_single_link_rate(s / scenario.noise_power, fading) for s in sig])
    return float(w @ vals)


def _single_link_rate(mean_snr, fading):
    scale = mean_snr / fading.mean
    return integrate_semiinfinite(lambda a: float(fading.sf(a)) * scale / (1.0 + scale * a),
                                  0.0, scale=fading.mean)


def _cell_grid_rate(scenario, sched, fading, noise, n_delta, n_theta):
    d, wd = _delta_rule(sched, n_delta)
    th = 2.0 * np.pi * np.arange(n_theta) / n_theta
    D, TH = np.meshgrid(d, th, indexing="ij")
    u, v = (D * np.cos(TH)).ravel(), (D * np.sin(TH)).ravel()
    sig, im = location_means(scenario, u, v, fading.mean)
    if isinstance(fading, RayleighPowerFading):
        vals = location_mean_rate(sig, im, noise)
    else:
        vals = np.array([_generic_mean_rate(s, m, fading, noise) for s, m in zip(sig, im)])
    return float(wd @ vals.reshape(d.size, n_theta).mean(axis=1))


def cell_average_rate(scenario: CellScenario, sched: SchedulerDensity,
                      fading: Optional[FadingModel] = None, noise: Optional[float] = None,
                      interference_limited: bool = False, n_delta: int = 64, n_theta: int = 32,
                      check: bool = True, tol: float = 1e-6) -> float:
    """Average rate over the scheduled user's position.

    Distance follows ``sched`` (composite Gauss-Legendre in ``ln delta``), angle is
    uniform (periodic trapezoid). With ``check`` the grid is doubled in both
    directions and the finer value is returned; a relative change above
    ``tol`` raises :class:`NonConvergence`.
    """
    fading = fading or RayleighPowerFading()
    noise = 0.0 if interference_limited else (scenario.noise_power if noise is None else noise)
    coarse = _cell_grid_rate(scenario, sched, fading, noise, n_delta, n_theta)
    if not check:
        return coarse
    fine = _cell_grid_rate(scenario, sched, fading, noise, 2 * n_delta, 2 * n_theta)
    if abs(fine - coarse) > tol * abs(fine):
        raise NonConvergence(
            f"cell average moved {abs(fine - coarse) / abs(fine):.2e} relative on grid doubling"
        )
    return fine


@dataclass(frozen=True)
class Calibration:
    sigma: float
    rate: float
    coverage_radius: float
    coverage_fraction: float


def calibrate_sigma(target_rate: float, scenario: CellScenario, fading: Optional[FadingModel] = None,
                    coverage_radius: float = 300.0, sigma_max: Optional[float] = None,
                    tol: float = 1e-10) -> Calibration:
    """Scheduler spread whose noise-only average rate equals ``target_rate``.

    Only the rate is matched; the served fraction within
    ``coverage_radius`` is reported alongside. Targets at or below the
    rate at ``sigma_max`` (default ``10 * rho``) map to ``sigma = inf``.

    Raises
    ------
    NoSignChange
        If the target exceeds the rate reachable as ``sigma -> 0``.
    """
    fading = fading or RayleighPowerFading()
    hi = sigma_max or 10.0 * scenario.radius
    lo = 0.1 * scenario.user_min_distance

    def rate(sig):
        return zero_interference_rate(scenario, _density_for(sig, scenario), fading)

    if target_rate <= rate(hi):
        sigma = math.inf
    else:
        x = find_root(lambda ls: rate(math.exp(ls)) - target_rate, math.log(lo), math.log(hi), tol)
        sigma = math.exp(x)
    dens = _density_for(sigma, scenario)
    return Calibration(sigma, rate(sigma), coverage_radius, float(dens.cdf(coverage_radius)))


# -- capacity-coverage sweeps ----------------------------------------------------

@dataclass(frozen=True)
class PowerPolicy:
    """``fixed``: every radius uses ``reference_power``. ``edge-scaled``:
    ``P(rho) = reference_power (rho / reference_radius)^alpha`` so the
    cell-edge pathloss stays constant."""

    mode: str = "fixed"
    reference_power: float = 1.0
    reference_radius: float = 4000.0

    def __post_init__(self):
        if self.mode not in ("fixed", "edge-scaled"):
            raise ValueError("policy mode must be 'fixed' or 'edge-scaled'")

    def power(self, rho: float, alpha: float) -> float:
        if self.mode == "fixed":
            return self.reference_power
        return self.reference_power * (rho / self.reference_radius) ** alpha


@dataclass(frozen=True)
class SweepRow:
    radius_m: float
    scheduler: str
    num_users: int
    power_w: float
    sigma_m: float
    avg_rate_multi: float
    avg_rate_single: float

    @property
    def gap(self) -> float:
        return self.avg_rate_single - self.avg_rate_multi


def scenario_at_radius(template: CellScenario, rho: float, policy: PowerPolicy) -> CellScenario:
    """Template rescaled to radius ``rho`` at fixed user density."""
    n = max(1, int(round(template.num_users * (rho / template.radius) ** 2)))
    p = policy.power(rho, template.alpha)
    factor = p / template.serving.power_w
    serving = _with_power(template.serving, p)
    interferers = tuple(_with_power(q, q.power_w * factor) for q in template.interferers)
    return template.replace(radius=rho, num_users=n, serving=serving, interferers=interferers)


def _with_power(params, p):
    from dataclasses import replace
    return replace(params, power_w=p)


def single_cell_average(scheduler: SchedulerSpec, scenario: CellScenario, fading: FadingModel,
                        greedy_model: str = "iid") -> float:
    if isinstance(scheduler, TruncatedGaussian):
        return zero_interference_rate(scenario, _density_for(scheduler.sigma, scenario), fading)
    from .singlecell import SingleCellAnalysis, mean_rate

    return mean_rate(scheduler, SingleCellAnalysis(scenario, fading), greedy_model)


def tradeoff_sweep(radii: Sequence[float], schedulers: Iterable[SchedulerSpec], policy: PowerPolicy,
                   template: CellScenario, fading: Optional[FadingModel] = None,
                   interference_limited: bool = False, greedy_model: str = "iid") -> List[SweepRow]:
    """Average rates over a radius sweep, with and without interference.

    Greedy and proportional-fair enter the multi-cell model through the
    scheduler spread calibrated, at each radius, to their own noise-only
    average rate; round-robin is ``sigma = inf``.
    """
    radii = [float(r) for r in radii]
    if any(r <= 0 for r in radii) or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be positive and increasing")
    fading = fading or RayleighPowerFading()
    schedulers = list(schedulers)
    rows = []
    for rho in radii:
        sc = scenario_at_radius(template, rho, policy)
        for sch in schedulers:
            single = single_cell_average(sch, sc, fading, greedy_model)
            if isinstance(sch, TruncatedGaussian):
                sigma = sch.sigma
            elif isinstance(sch, RoundRobin):
                sigma = math.inf
            else:
                sigma = calibrate_sigma(single, sc, fading).sigma
            multi = cell_average_rate(sc, _density_for(sigma, sc), fading,
                                      interference_limited=interference_limited, tol=1e-4)
            rows.append(SweepRow(rho, getattr(sch, "name", str(sch)), sc.num_users,
                                 sc.serving.power_w, sigma, multi, single))
    return rows
