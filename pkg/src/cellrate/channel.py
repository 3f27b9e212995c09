"""Physical layer: fading laws, pathloss, cell geometry and user placement."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import Tuple

import numpy as np
from scipy import special

from .errors import BelowReferenceDistance, PoleCrossing, ScenarioError

NUM_INTERFERERS = 6


class FadingModel(ABC):
    """Univariate non-negative power-gain distribution.

    Subclasses provide vectorised ``pdf``, ``cdf``, ``sf`` and ``logcdf``.
    ``logcdf`` exists separately because the ring-model greedy CDF sums logs
    of CDF values that underflow in linear scale.
    """

    @property
    @abstractmethod
    def mean(self) -> float: ...

    @abstractmethod
    def pdf(self, a): ...

    @abstractmethod
    def cdf(self, a): ...

    @abstractmethod
    def sf(self, a): ...

    @abstractmethod
    def logcdf(self, a): ...

    @abstractmethod
    def sample(self, rng: np.random.Generator, size) -> np.ndarray: ...

    def pdf_over_cdf(self, a):
        """Reversed hazard f/F, evaluated without forming F explicitly
        where possible."""
        a = np.asarray(a, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.pdf(a) / self.cdf(a)

    def mgf(self, s: float) -> float:
        """E[exp(s A)] by quadrature; finite only below the abscissa of
        convergence."""
        from .numerics import integrate_semiinfinite

        return integrate_semiinfinite(
            lambda a: float(self.pdf(a)) * math.exp(s * a), 0.0, scale=self.mean
        )


@dataclass(frozen=True)
class RayleighPowerFading(FadingModel):
    """Exponential power gain (Rayleigh amplitude)."""

    mean_power: float = 1.0

    def __post_init__(self):
        if not self.mean_power > 0:
            raise ScenarioError("fading mean_power must be positive")

    @property
    def mean(self) -> float:
        return self.mean_power

    def pdf(self, a):
        a = np.asarray(a, dtype=float)
        return np.where(a >= 0, np.exp(-a / self.mean_power) / self.mean_power, 0.0)

    def cdf(self, a):
        a = np.asarray(a, dtype=float)
        return np.where(a > 0, -np.expm1(-np.maximum(a, 0) / self.mean_power), 0.0)

    def sf(self, a):
        a = np.asarray(a, dtype=float)
        return np.where(a > 0, np.exp(-np.maximum(a, 0) / self.mean_power), 1.0)

    def logcdf(self, a):
        a = np.asarray(a, dtype=float) / self.mean_power
        with np.errstate(divide="ignore"):
            # log(1 - e^-x): log(-expm1(-x)) near 0, log1p(-e^-x) in the tail
            return np.where(
                a > math.log(2.0),
                np.log1p(-np.exp(-np.maximum(a, 0))),
                np.log(-np.expm1(-np.maximum(a, 0))),
            )

    def pdf_over_cdf(self, a):
        a = np.asarray(a, dtype=float) / self.mean_power
        with np.errstate(divide="ignore", over="ignore"):
            return 1.0 / (self.mean_power * np.expm1(a))

    def sample(self, rng, size):
        return rng.exponential(self.mean_power, size)

    def mgf(self, s: float) -> float:
        if s * self.mean_power >= 1.0:
            raise PoleCrossing(f"s = {s:.6g} at or beyond pole 1/{self.mean_power:.6g}")
        return 1.0 / (1.0 - s * self.mean_power)


@dataclass(frozen=True)
class NakagamiPowerFading(FadingModel):
    """Gamma-distributed power gain (Nakagami-m amplitude), shape ``m``."""

    m: float = 2.0
    mean_power: float = 1.0

    def __post_init__(self):
        if not (self.m > 0 and self.mean_power > 0):
            raise ScenarioError("Nakagami m and mean_power must be positive")

    @property
    def mean(self) -> float:
        return self.mean_power

    @property
    def _theta(self):
        return self.mean_power / self.m

    def pdf(self, a):
        a = np.asarray(a, dtype=float)
        x = np.maximum(a, 0) / self._theta
        with np.errstate(divide="ignore"):
            logp = (self.m - 1) * np.log(x) - x - special.gammaln(self.m) - math.log(self._theta)
        return np.where(a > 0, np.exp(logp), 0.0)

    def cdf(self, a):
        a = np.asarray(a, dtype=float)
        return special.gammainc(self.m, np.maximum(a, 0) / self._theta)

    def sf(self, a):
        a = np.asarray(a, dtype=float)
        return special.gammaincc(self.m, np.maximum(a, 0) / self._theta)

    def logcdf(self, a):
        x = np.maximum(np.asarray(a, dtype=float), 0) / self._theta
        small = x < 1.0
        xs = np.where(small, x, 0.5)
        # P(m, x) = x^m e^-x / Gamma(m+1) * sum_k x^k / ((m+1)...(m+k))
        term, series = np.ones_like(xs), np.ones_like(xs)
        for k in range(1, 40):
            term = term * xs / (self.m + k)
            series = series + term
        with np.errstate(divide="ignore"):
            low = self.m * np.log(xs) - xs - special.gammaln(self.m + 1) + np.log(series)
            high = np.log1p(-special.gammaincc(self.m, np.where(small, 1.0, x)))
        return np.where(small, low, high)

    def sample(self, rng, size):
        return rng.gamma(self.m, self._theta, size)

    def mgf(self, s: float) -> float:
        if s * self._theta >= 1.0:
            raise PoleCrossing(f"s = {s:.6g} at or beyond pole {1 / self._theta:.6g}")
        return (1.0 - s * self._theta) ** (-self.m)


@dataclass(frozen=True)
class PathlossParams:
    """``10^(K/10) * P * (delta / d0)^-alpha`` written as ``xi * delta^-alpha``."""

    exponent: float = 2.0
    constant_db: float = -80.0
    reference_m: float = 1.0
    power_w: float = 1.0

    def __post_init__(self):
        if not self.exponent > 0:
            raise ScenarioError("exponent must be positive")
        if not self.reference_m > 0:
            raise ScenarioError("reference distance must be positive")
        if not self.power_w > 0:
            raise ScenarioError("transmit power must be positive")

    @property
    def xi(self) -> float:
        """Composite power ``10^(K/10) * P * d0^alpha`` (W m^alpha)."""
        return 10.0 ** (self.constant_db / 10.0) * self.power_w * self.reference_m**self.exponent


@dataclass(frozen=True)
class UserLocation:
    u: float
    v: float

    @property
    def delta(self) -> float:
        return math.hypot(self.u, self.v)

    @classmethod
    def polar(cls, delta: float, theta: float) -> "UserLocation":
        return cls(delta * math.cos(theta), delta * math.sin(theta))


@dataclass(frozen=True)
class CellScenario:
    """Central cell plus six first-tier interferers at distance ``2 * radius``.

    ``noise_power`` is total in-band noise in watts; it is never folded into
    ``xi``. Interferer ``k`` (0-based) sits at angle ``k * pi / 3 +
    ring_offset``.
    """

    radius: float = 1000.0
    num_users: int = 100
    serving: PathlossParams = field(default_factory=PathlossParams)
    interferers: Tuple[PathlossParams, ...] = ()
    noise_power: float = 1e-14
    user_min_distance: float = -1.0
    ring_offset: float = 0.0

    def __post_init__(self):
        if not self.interferers:
            object.__setattr__(self, "interferers", (self.serving,) * NUM_INTERFERERS)
        else:
            object.__setattr__(self, "interferers", tuple(self.interferers))
        if self.user_min_distance < 0:
            object.__setattr__(self, "user_min_distance", self.serving.reference_m)
        if len(self.interferers) != NUM_INTERFERERS:
            raise ScenarioError(
                f"[interferers] exactly {NUM_INTERFERERS} first-tier interferers required, "
                f"got {len(self.interferers)}"
            )
        if int(self.num_users) != self.num_users or self.num_users < 1:
            raise ScenarioError("num_users must be an integer >= 1")
        if not self.noise_power > 0:
            raise ScenarioError("noise power must be positive")
        if not self.radius > self.user_min_distance:
            raise ScenarioError("radius must exceed the minimum user distance")

    @property
    def snr_composite(self) -> float:
        """``xi / I_n``: mean SNR at unit distance (m^alpha)."""
        return self.serving.xi / self.noise_power

    @property
    def alpha(self) -> float:
        return self.serving.exponent

    def interferer_positions(self) -> np.ndarray:
        k = np.arange(NUM_INTERFERERS)
        ang = k * math.pi / 3.0 + self.ring_offset
        return 2.0 * self.radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)

    def replace(self, **changes) -> "CellScenario":
        return replace(self, **changes)

    @classmethod
    def case_study(cls) -> "CellScenario":
        return cls()


def uniform_area_density(delta, rho: float):
    """``2 delta / rho^2`` on ``[0, rho]``, zero elsewhere."""
    delta = np.asarray(delta, dtype=float)
    return np.where((delta >= 0) & (delta <= rho), 2.0 * delta / rho**2, 0.0)


def interferer_distance(loc: UserLocation, j: int, rho: float, ring_offset: float = 0.0) -> float:
    """Distance from ``loc`` to interferer ``j`` (1-based, angle
    ``(j - 1) pi / 3``)."""
    if not 1 <= j <= NUM_INTERFERERS:
        raise ValueError("interferer index must be in 1..6")
    ang = (j - 1) * math.pi / 3.0 + ring_offset
    return math.hypot(loc.u - 2.0 * rho * math.cos(ang), loc.v - 2.0 * rho * math.sin(ang))


def mean_rx_power(params: PathlossParams, delta, fading_mean: float = 1.0):
    """Mean received power ``xi * delta^-alpha * E[A]`` in watts."""
    d = np.asarray(delta, dtype=float)
    if np.any(d < params.reference_m):
        raise BelowReferenceDistance(
            f"distance below reference distance {params.reference_m} m"
        )
    out = params.xi * d ** (-params.exponent) * fading_mean
    return float(out) if out.ndim == 0 else out
