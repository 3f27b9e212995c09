"""Downlink rate distributions in an isolated cell.

Users are uniform over the disc of radius ``rho`` (density ``2 delta /
rho^2`` on ``[0, rho]``) and the served user's SNR is ``xi' delta^-alpha A``
with ``xi' = xi / I_n``. All rates are in nats/s/Hz.

Two greedy models are available:

``"iid"``
    The exact law of the best of ``N`` iid users,
    ``F_max(g) = (E_delta F_A(delta^alpha g / xi'))^N``. This is what a
    literal simulation of uniformly dropped users produces.
``"ring"``
    The continuum ring model, where each thin ring holds exactly its mean
    user count: ``log F_max(g) = N E_delta[log F_A(delta^alpha g / xi')]``.
    It is a Jensen lower bound on the iid CDF and differs from it in the
    bulk and the tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as _spi
from scipy import special

from .channel import CellScenario, FadingModel, RayleighPowerFading
from .errors import NonConvergence
from .numerics import DEFAULT_QUAD, QuadSpec, TabulatedPdf, integrate_vec
from .schedulers import Greedy, ProportionalFair, RoundRobin, SchedulerSpec

GREEDY_MODELS = ("iid", "ring")


@dataclass(frozen=True)
class SingleCellAnalysis:
    scenario: CellScenario
    fading: FadingModel = field(default_factory=RayleighPowerFading)
    rate_grid: np.ndarray = field(default_factory=lambda: np.linspace(0.0, 20.0, 801))
    quad: QuadSpec = DEFAULT_QUAD

    def __post_init__(self):
        g = np.asarray(self.rate_grid, dtype=float)
        if g.ndim != 1 or g.size < 2 or np.any(np.diff(g) <= 0) or g[0] < 0:
            raise ValueError("rate_grid must be strictly increasing and non-negative")
        object.__setattr__(self, "rate_grid", g)

    @property
    def rho(self) -> float:
        return self.scenario.radius

    @property
    def alpha(self) -> float:
        return self.scenario.alpha

    @property
    def snr_composite(self) -> float:
        return self.scenario.snr_composite

    @property
    def num_users(self) -> int:
        return self.scenario.num_users

    def with_grid(self, grid) -> "SingleCellAnalysis":
        return SingleCellAnalysis(self.scenario, self.fading, np.asarray(grid, float), self.quad)

    def breakpoints(self):
        # the integrands in delta change scale at delta ~ (xi'/gamma)^(1/alpha),
        # which spans many decades across a rate grid
        return list(self.rho * np.logspace(-12, -0.05, 48))


def _gamma_of(r):
    return np.expm1(np.asarray(r, dtype=float))


def _delta_integral(analysis, integrand, rates):
    """``int_0^rho f_D(delta) integrand(delta, gamma) d delta`` for every
    rate, with ``gamma = e^r - 1``."""
    rho = analysis.rho
    gam = _gamma_of(rates)

    def f(d):
        return (2.0 * d / rho**2) * integrand(d, gam)

    return integrate_vec(f, 0.0, rho, analysis.quad, points=analysis.breakpoints())


def _rr_snr_kernel(analysis):
    a, xp, fad = analysis.alpha, analysis.snr_composite, analysis.fading

    def k(d, gam):
        s = d**a / xp
        return s * fad.pdf(gam * s)

    return k


def rr_rate_density(r, analysis: SingleCellAnalysis) -> np.ndarray:
    """Round-robin rate density at rates ``r`` by quadrature over the user
    distance."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    return np.exp(r) * _delta_integral(analysis, _rr_snr_kernel(analysis), r)


def rr_rate_pdf(analysis: SingleCellAnalysis) -> TabulatedPdf:
    """Round-robin rate pdf on ``analysis.rate_grid`` (generic fading)."""
    return TabulatedPdf(analysis.rate_grid, rr_rate_density(analysis.rate_grid, analysis))


def rr_rate_pdf_rayleigh(r, scenario: CellScenario, snr_composite: float | None = None,
                         mean_power: float = 1.0) -> np.ndarray:
    """Closed-form round-robin rate density under Rayleigh fading.

    With ``x = rho^alpha (e^r - 1) / xi'`` and ``s = 2 / alpha``::

        f(r) = s e^r / (e^r - 1) * x^-s * lower_gamma(s + 1, x)

    which for ``alpha = 2`` is ``e^r/(e^r-1) [(1 - e^-x)/x - e^-x]``. The
    regularized incomplete gamma keeps full precision as ``x -> 0``, where
    the density tends to ``e^r rho^alpha / (xi' (1 + alpha/2))``.
    """
    r = np.asarray(r, dtype=float)
    xp = (scenario.snr_composite if snr_composite is None else snr_composite) * mean_power
    a = scenario.alpha
    s = 2.0 / a
    rho_a = scenario.radius**a
    c = rho_a / xp
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        # log(e^r - 1) without overflow at large r
        log_gam = np.where(r > 1.0, r + np.log1p(-np.exp(-r)), np.log(np.expm1(np.minimum(r, 1.0))))
        log_x = math.log(c) + log_gam
        x = np.exp(log_x)
        # e^r x^-s lower_gamma(s+1, x) / gam, written to stay finite at gam = 0 and r -> inf
        log_tail = (r + np.log(special.gammainc(s + 1.0, x)) + special.gammaln(s + 1.0)
                    - (s + 1.0) * log_x + math.log(c))
        small = np.exp(r) * c / (s + 1.0) * (1.0 - (s + 1.0) / (s + 2.0) * x)
    return s * np.where(x < 1e-8, small, np.exp(log_tail))


def _log_best_of_iid(analysis, rates):
    """``log P(max SNR <= gamma)`` for N iid users and the per-user
    survival ``S(gamma) = P(SNR > gamma)``."""
    a, xp, fad = analysis.alpha, analysis.snr_composite, analysis.fading
    surv = _delta_integral(analysis, lambda d, g: fad.sf(g * d**a / xp), rates)
    surv = np.clip(surv, 0.0, 1.0)
    logG = np.log1p(-surv)
    low = surv > 0.5
    if np.any(low):
        # complement formed directly to keep precision when P(SNR <= gamma) is tiny
        cdf = _delta_integral(analysis, lambda d, g: fad.cdf(g * d**a / xp), rates[low])
        with np.errstate(divide="ignore"):
            logG[low] = np.log(cdf)
    return logG, surv


def greedy_max_snr_logcdf(gamma, analysis: SingleCellAnalysis) -> np.ndarray:
    """Ring-model ``log P(max SNR <= gamma)``:
    ``N int_0^rho (2 delta / rho^2) log F_A(delta^alpha gamma / xi') d delta``.

    Returns ``-inf`` where the CDF vanishes.
    """
    gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
    out = np.full(gamma.shape, -np.inf)
    pos = gamma > 0
    if np.any(pos):
        a, xp, fad = analysis.alpha, analysis.snr_composite, analysis.fading
        out[pos] = analysis.num_users * _delta_integral(
            analysis, lambda d, g: fad.logcdf(g * d**a / xp), np.log1p(gamma[pos])
        )
    return out


def greedy_max_snr_logcdf_rings(gamma, analysis: SingleCellAnalysis, num_rings: int) -> np.ndarray:
    """Ring-model log-CDF with ``num_rings`` equal-width rings, ring ``i``
    holding ``N 2 delta_i d_rho / rho^2`` users (real exponent, not rounded)."""
    gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
    rho, a, xp = analysis.rho, analysis.alpha, analysis.snr_composite
    width = rho / num_rings
    centers = (np.arange(num_rings) + 0.5) * width
    counts = analysis.num_users * 2.0 * centers * width / rho**2
    args = np.outer(gamma, centers**a / xp)
    return analysis.fading.logcdf(args) @ counts


def greedy_max_snr_logcdf_iid(gamma, analysis: SingleCellAnalysis) -> np.ndarray:
    """Exact ``log P(max SNR <= gamma)`` for N iid uniformly dropped users."""
    gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
    out = np.full(gamma.shape, -np.inf)
    pos = gamma > 0
    if np.any(pos):
        logG, _ = _log_best_of_iid(analysis, np.log1p(gamma[pos]))
        out[pos] = analysis.num_users * logG
    return out


def greedy_rate_logpdf(r, analysis: SingleCellAnalysis, model: str = "iid") -> np.ndarray:
    """Natural log of the greedy rate density.

    Computed in log space because at small rates the density is of order
    ``r^(N-1)`` and underflows double precision long before the CDF slope
    can be measured.
    """
    if model not in GREEDY_MODELS:
        raise ValueError(f"model must be one of {GREEDY_MODELS}")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    n = analysis.num_users
    out = np.full(r.shape, -np.inf)
    pos = r > 0
    if not np.any(pos):
        if n == 1:
            out[:] = np.log(rr_rate_density(r, analysis))
        return out
    rp = r[pos]
    with np.errstate(divide="ignore"):
        if model == "iid":
            logG, _ = _log_best_of_iid(analysis, rp)
            out[pos] = math.log(n) + (n - 1) * logG + np.log(rr_rate_density(rp, analysis))
        else:
            a, xp, fad = analysis.alpha, analysis.snr_composite, analysis.fading
            logF = greedy_max_snr_logcdf(np.expm1(rp), analysis)

            def hazard(d, g):
                s = d**a / xp
                return s * fad.pdf_over_cdf(g * s)

            dlog = n * _delta_integral(analysis, hazard, rp)
            out[pos] = rp + logF + np.log(dlog)
    if n == 1 and np.any(~pos):
        out[~pos] = np.log(rr_rate_density(r[~pos], analysis))
    return out


def greedy_rate_pdf(analysis: SingleCellAnalysis, model: str = "iid") -> TabulatedPdf:
    """Greedy (max-SNR) rate pdf on ``analysis.rate_grid``."""
    with np.errstate(under="ignore"):
        vals = np.exp(greedy_rate_logpdf(analysis.rate_grid, analysis, model))
    return TabulatedPdf(analysis.rate_grid, vals)


def pf_rate_density(r, analysis: SingleCellAnalysis) -> np.ndarray:
    """Proportional-fair rate density: uniform served location, served
    fading is the largest of N draws (density ``N f_A F_A^(N-1)``)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    a, xp, fad, n = analysis.alpha, analysis.snr_composite, analysis.fading, analysis.num_users

    def k(d, gam):
        s = d**a / xp
        arg = gam * s
        if n == 1:
            return s * fad.pdf(arg)
        with np.errstate(divide="ignore", under="ignore"):
            return s * n * fad.pdf(arg) * np.exp((n - 1) * fad.logcdf(arg))

    return np.exp(r) * _delta_integral(analysis, k, r)


def pf_rate_pdf(analysis: SingleCellAnalysis) -> TabulatedPdf:
    return TabulatedPdf(analysis.rate_grid, pf_rate_density(analysis.rate_grid, analysis))


def rate_pdf(scheduler: SchedulerSpec, analysis: SingleCellAnalysis, greedy_model: str = "iid") -> TabulatedPdf:
    if isinstance(scheduler, RoundRobin):
        return rr_rate_pdf(analysis)
    if isinstance(scheduler, Greedy):
        return greedy_rate_pdf(analysis, greedy_model)
    if isinstance(scheduler, ProportionalFair):
        return pf_rate_pdf(analysis)
    raise TypeError(f"no single-cell pdf for {scheduler!r}")


def _survival_rate_grid(analysis):
    """Rate grid long enough that P(R > r_max) is negligible."""
    xp_edge = analysis.snr_composite / analysis.rho**analysis.alpha
    top = max(1.0, math.log1p(analysis.num_users * xp_edge * analysis.fading.mean))
    r_max = top + 40.0
    return np.linspace(0.0, r_max, 4001)


def rate_survival(scheduler: SchedulerSpec, analysis: SingleCellAnalysis, rates,
                  greedy_model: str = "iid") -> np.ndarray:
    """``P(R > r)`` for the served user's rate."""
    r = np.asarray(rates, dtype=float)
    out = np.ones_like(r)
    pos = r > 0
    rp = r[pos]
    a, xp, fad, n = analysis.alpha, analysis.snr_composite, analysis.fading, analysis.num_users
    if isinstance(scheduler, RoundRobin) or n == 1 and not isinstance(scheduler, Greedy):
        vals = _delta_integral(analysis, lambda d, g: fad.sf(g * d**a / xp), rp)
    elif isinstance(scheduler, Greedy):
        if greedy_model == "iid":
            logG, _ = _log_best_of_iid(analysis, rp)
            vals = -np.expm1(n * logG)
        else:
            vals = -np.expm1(greedy_max_snr_logcdf(np.expm1(rp), analysis))
    elif isinstance(scheduler, ProportionalFair):
        vals = _delta_integral(
            analysis, lambda d, g: -np.expm1(n * fad.logcdf(g * d**a / xp)), rp
        )
    else:
        raise TypeError(f"no single-cell survival for {scheduler!r}")
    out[pos] = np.clip(vals, 0.0, 1.0)
    return out


def mean_rate(scheduler: SchedulerSpec, analysis: SingleCellAnalysis, greedy_model: str = "iid") -> float:
    """Average served rate ``E[R] = int_0^inf P(R > r) dr`` (nats/s/Hz)."""
    r = _survival_rate_grid(analysis)
    surv = rate_survival(scheduler, analysis, r, greedy_model)
    if surv[-1] > 1e-10:
        raise NonConvergence("rate survival not negligible at the end of the grid")
    return float(_spi.simpson(surv, x=r))


def area_fraction(radius, rho: float, lower: float = 0.0):
    """Fraction of the annulus ``[lower, rho]`` lying within ``radius``."""
    radius = np.clip(np.asarray(radius, dtype=float), lower, rho)
    return (radius**2 - lower**2) / (rho**2 - lower**2)


def greedy_served_distance_cdf(radius_grid, analysis: SingleCellAnalysis, model: str = "iid") -> np.ndarray:
    """Analytic ``P(served distance <= r*)`` under greedy scheduling.

    ``iid``: ``int N G(g)^(N-1) g_{r*}(g) dg`` with ``g_{r*}`` the SNR density
    of a user restricted to ``delta <= r*``. ``ring``: the same with the
    ring-model CDF and reversed hazard.
    """
    if model not in GREEDY_MODELS:
        raise ValueError(f"model must be one of {GREEDY_MODELS}")
    radius_grid = np.atleast_1d(np.asarray(radius_grid, dtype=float))
    r = _survival_rate_grid(analysis)[1:]
    rho, a, xp, fad, n = analysis.rho, analysis.alpha, analysis.snr_composite, analysis.fading, analysis.num_users
    gam = np.expm1(r)
    if model == "iid":
        logG, _ = _log_best_of_iid(analysis, r)
        weight = n * np.exp((n - 1) * logG)

        def k(d, g):
            s = d**a / xp
            return s * fad.pdf(g * s)
    else:
        weight = n * np.exp(greedy_max_snr_logcdf(gam, analysis))

        def k(d, g):
            s = d**a / xp
            return s * fad.pdf_over_cdf(g * s)

    out = []
    for rs in radius_grid:
        if rs <= 0:
            out.append(0.0)
            continue
        rs = min(rs, rho)
        pts = [p for p in analysis.breakpoints() if p < rs]
        inner = integrate_vec(lambda d: (2.0 * d / rho**2) * k(d, gam), 0.0, rs, analysis.quad, points=pts)
        dens = np.exp(r) * weight * inner
        out.append(float(_spi.simpson(np.concatenate([[0.0], dens]), x=np.concatenate([[0.0], r]))))
    return np.array(out)


def effective_coverage_cdf(scheduler: SchedulerSpec, analysis: SingleCellAnalysis, radius_grid,
                           method: str = "mc", drops: int = 200_000, seed: int = 1) -> np.ndarray:
    """Fraction of served users within each radius in ``radius_grid``.

    Round-robin and proportional-fair serve a uniformly located user, so
    this is the area fraction. Greedy is estimated by simulation
    (``method="mc"``) or from the analytic ``"iid"`` / ``"ring"`` models.
    """
    radius_grid = np.atleast_1d(np.asarray(radius_grid, dtype=float))
    if isinstance(scheduler, (RoundRobin, ProportionalFair)):
        return area_fraction(radius_grid, analysis.rho)
    if not isinstance(scheduler, Greedy):
        raise TypeError(f"no coverage for {scheduler!r}")
    if method in GREEDY_MODELS:
        return greedy_served_distance_cdf(radius_grid, analysis, method)
    if method != "mc":
        raise ValueError("method must be 'mc', 'iid' or 'ring'")
    from .montecarlo import SimConfig, simulate_single_cell

    cfg = SimConfig(seed=seed, num_drops=drops, scenario=analysis.scenario,
                    fading=analysis.fading, scheduler=scheduler)
    _, dist = simulate_single_cell(cfg)
    dist = np.sort(dist)
    return np.searchsorted(dist, radius_grid, side="right") / dist.size
