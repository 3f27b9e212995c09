import math
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from cellrate import multicell as mc
from cellrate.channel import (CellScenario, NakagamiPowerFading, RayleighPowerFading, UserLocation)
from cellrate.errors import NearDegenerateMeans, NoSignChange, PoleCrossing
from cellrate.montecarlo import SimConfig, simulate_multi_cell
from cellrate.numerics import QuadSpec, integrate_semiinfinite, ks_distance
from cellrate.schedulers import Greedy, RoundRobin

from conftest import rel_err

distinct_means = st.lists(st.floats(1e-3, 1e3), min_size=2, max_size=6, unique=True).filter(
    lambda m: min(abs(a - b) / max(a, b) for i, a in enumerate(m) for b in m[i + 1:]) > 1e-3)


def recursion_coefficients(means):
    """C_{j,M} = prod_{l>j} V_{j,l} * sum_{k<j} V_{j,k} C_{k,j-1}, empty sum and product = 1."""
    m = list(means)

    def V(j, l):
        return m[j - 1] / (m[j - 1] - m[l - 1])

    @lru_cache(maxsize=None)
    def C(j, M):
        prod = math.prod(V(j, l) for l in range(j + 1, M + 1))
        if j == 1:
            return prod
        return prod * sum(V(j, k) * C(k, j - 1) for k in range(1, j))

    return np.array([C(j, len(m)) for j in range(1, len(m) + 1)])


def convolution_oracle(means, eta):
    """Density of a sum of exponentials: each convolution with an exponential
    of mean m_k is the linear ODE y_k' = (y_{k-1} - y_k) / m_k, y_k(0) = 0."""
    unit = float(np.sum(means))
    m = np.asarray(means, float) / unit
    eta = np.asarray(eta, float) / unit

    def rhs(t, y):
        d = np.empty_like(y)
        d[0] = -y[0] / m[0]
        d[1:] = (y[:-1] - y[1:]) / m[1:]
        return d

    y0 = np.zeros(m.size)
    y0[0] = 1.0 / m[0]
    sol = solve_ivp(rhs, (0.0, float(np.max(eta))), y0, method="DOP853", t_eval=np.sort(eta),
                    rtol=1e-13, atol=1e-30)
    assert sol.success
    return sol.y[-1] / unit


def test_two_term_partial_fractions():
    np.testing.assert_allclose(mc.hypoexp_coefficients([2.0, 1.0]), [2.0, -1.0])


def test_degenerate_means_rejected():
    with pytest.raises(NearDegenerateMeans):
        mc.hypoexp_coefficients([1.0, 2.0, 1.0 + 1e-12])
    with pytest.raises(ValueError):
        mc.hypoexp_coefficients([1.0, -2.0])


@settings(max_examples=200, deadline=None)
@given(distinct_means)
def test_coefficients_sum_to_one_and_pdf_nonnegative(means):
    c = mc.hypoexp_coefficients(means)
    assert abs(c.sum() - 1) <= 1e-9 * max(1.0, np.max(np.abs(c)) * 1e-6)
    eta = np.linspace(0.0, 30 * sum(means), 1000)
    prof = mc.InterferenceProfile(UserLocation(0, 0), 1.0, np.asarray(means), c)
    f = mc.interference_pdf(prof, eta)
    assert np.all(f >= 0.0)
    # the raw signed mixture dips below zero only by rounding
    from cellrate import _kernels
    raw = _kernels.hypoexp_pdf(eta, c, np.asarray(means))
    assert np.all(raw >= -1e-13 * np.max(np.abs(c) / np.asarray(means)))


@settings(max_examples=100, deadline=None)
@given(distinct_means)
def test_residue_formula_matches_recursion(means):
    c = mc.hypoexp_coefficients(means)
    # the recursion sums signed terms, so compare on the scale of the largest coefficient
    assert np.max(np.abs(recursion_coefficients(means) - c)) <= 1e-9 * max(1.0, np.max(np.abs(c)))


def _profile(scenario, u, v):
    return mc.InterferenceProfile.at(scenario, UserLocation(u, v))


def test_profile_at_location(scenario):
    p = _profile(scenario, 500.0, 0.0)
    assert p.signal_mean == pytest.approx(1e-8 / 500**2)
    # (500, 0) lies on a symmetry axis, so the location is nudged by 1e-6 rho
    np.testing.assert_allclose(p.mean_interference[0], 1e-8 / 1500**2, rtol=1e-5)
    np.testing.assert_allclose(p.mean_interference[3], 1e-8 / 2500**2, rtol=1e-5)
    # the nudge makes two means nearly equal; double rounding then limits the sum to eps * max|C|
    assert abs(p.coefficients.sum() - 1) < 1e-15 * p.conditioning
    q = _profile(scenario, 420.0, 310.0)
    assert q.location == UserLocation(420.0, 310.0)
    assert q.coefficients.sum() == pytest.approx(1.0, abs=1e-9)


def test_centre_is_perturbed(scenario):
    p = _profile(scenario, 0.0, 0.0)
    assert p.location.delta == pytest.approx(1e-6 * scenario.radius)
    with pytest.raises(NearDegenerateMeans):
        mc.InterferenceProfile.at(scenario, UserLocation(0.0, 0.0), perturb=False)


def test_pdf_matches_convolution_oracle(scenario):
    p = _profile(scenario, 420.0, 310.0)
    eta = np.linspace(0.05, 6.0, 10) * p.mean_interference.sum()
    oracle = convolution_oracle(p.mean_interference, eta)
    assert rel_err(mc.interference_pdf(p, eta), oracle) < 1e-6


def test_grid_convolution_matches_closed_form(scenario):
    p = _profile(scenario, 420.0, 310.0)
    tab = mc.interference_pdf_numeric(p.mean_interference, RayleighPowerFading())
    eta = np.linspace(0.2, 5.0, 20) * p.mean_interference.sum()
    assert rel_err(tab(eta), mc.interference_pdf(p, eta)) < 2e-3
    assert tab.total_mass == pytest.approx(1.0, abs=1e-4)


def test_hypoexp_mass(scenario):
    p = _profile(scenario, -300.0, 650.0)
    m = integrate_semiinfinite(lambda e: float(mc.interference_pdf(p, [e])[0]), 0.0,
                               scale=p.mean_interference.sum())
    assert m == pytest.approx(1.0, abs=1e-8)


def test_mgf(scenario):
    p = _profile(scenario, 500.0, 0.0)
    assert mc.interference_mgf(p, 0.0) == 1.0
    h = 1e-3 / p.mean_interference.max()
    d = (mc.interference_mgf(p, h) - mc.interference_mgf(p, -h)) / (2 * h)
    assert d == pytest.approx(p.mean_interference.sum(), rel=1e-5)
    with pytest.raises(PoleCrossing):
        mc.interference_mgf(p, 1.0 / p.mean_interference.max())
    # at s = 0.5 / max the estimator exp(s I) has infinite variance; 0.25 / max keeps it finite
    s = 0.25 / p.mean_interference.max()
    _, tot, _ = simulate_multi_cell(SimConfig(3, 1_000_000, scenario), loc=p.location)
    assert np.mean(np.exp(s * tot)) == pytest.approx(mc.interference_mgf(p, s), rel=0.005)
    # generic path reproduces the Rayleigh product
    assert mc.interference_mgf(p, s, NakagamiPowerFading(1.0)) == pytest.approx(mc.interference_mgf(p, s))
    # analytic value at 0.5 / max, against quadrature of the pdf
    s = 0.5 / p.mean_interference.max()
    q = integrate_semiinfinite(
        lambda e: float(mc.interference_pdf(p, [e])[0]) * math.exp(min(s * e, 700.0)), 0.0,
        scale=p.mean_interference.sum())
    assert q == pytest.approx(mc.interference_mgf(p, s), rel=1e-7)


def test_sinr_pdf_zero_interference(scenario, analysis):
    p = _profile(scenario, 500.0, 0.0)
    g = np.linspace(0.0, 20.0, 50)
    f = mc.sinr_pdf_at(p, RayleighPowerFading(), scenario.noise_power, g, zero_interference=True)
    snr = p.signal_mean / scenario.noise_power
    np.testing.assert_allclose(f.values, np.exp(-g / snr) / snr)


def test_rate_pdf_quadrature_matches_closed_form(scenario):
    p = _profile(scenario, 500.0, 0.0)
    r = np.linspace(0.0, 6.0, 25)
    closed = mc.rate_pdf_at(p, RayleighPowerFading(), scenario.noise_power, r).values
    quad = mc.rate_pdf_at(p, RayleighPowerFading(), scenario.noise_power, r, method="quadrature",
                          quad=QuadSpec(abs_tol=1e-300, rel_tol=1e-9, max_subdivisions=5000)).values
    assert rel_err(quad, closed) < 1e-5


def test_sinr_ks_against_simulation(scenario):
    p = _profile(scenario, 500.0, 0.0)
    r = np.linspace(0.0, 12.0, 2401)
    pdf = mc.rate_pdf_at(p, RayleighPowerFading(), scenario.noise_power, r)
    _, _, rate = simulate_multi_cell(SimConfig(4, 1_000_000, scenario), loc=p.location)
    # the rate is a monotone map of the SINR, so the KS distances coincide
    assert ks_distance(pdf, rate) < 0.005


def _random_locations(scenario, n, seed):
    rng = np.random.default_rng(seed)
    d = scenario.radius * np.sqrt(rng.uniform(1e-4, 1.0, n))
    th = rng.uniform(0, 2 * math.pi, n)
    return [(float(a * math.cos(b)), float(a * math.sin(b))) for a, b in zip(d, th)]


def test_rate_pdf_mass_and_moments(scenario):
    for u, v in _random_locations(scenario, 20, 1):
        p = _profile(scenario, u, v)
        f = lambda r, n=0.0: float(mc.rayleigh_rate_density(p, n, np.array([r]))[0])  # noqa: E731
        assert integrate_semiinfinite(f, 0.0, scale=2.0) == pytest.approx(1.0, abs=1e-6)
        mass = integrate_semiinfinite(lambda r: f(r, scenario.noise_power), 0.0, scale=2.0)
        assert mass == pytest.approx(1.0, abs=1e-6)
        first = integrate_semiinfinite(lambda r: r * f(r), 0.0, scale=2.0)
        assert first == pytest.approx(mc.avg_rate_interference_limited(p), rel=1e-6)
        noisy = integrate_semiinfinite(lambda r: r * f(r, scenario.noise_power), 0.0, scale=2.0)
        assert noisy == pytest.approx(mc.mean_rate_at(p, scenario.noise_power), rel=1e-6)


def test_interference_limited_mean_against_simulation(scenario):
    p = _profile(scenario, 300.0, 200.0)
    _, _, rate = simulate_multi_cell(SimConfig(5, 1_000_000, scenario.replace(noise_power=1e-300)),
                                     loc=p.location)
    assert rate.mean() == pytest.approx(mc.avg_rate_interference_limited(p), rel=0.003)


def test_single_dominant_interferer_limit():
    S, I1 = 3.0, 0.7
    prof = mc.InterferenceProfile(UserLocation(0, 0), S, np.array([I1] + [1e-9 * k for k in range(1, 6)]),
                                  None)
    prof = mc.InterferenceProfile(prof.location, S, prof.mean_interference,
                                  mc.hypoexp_coefficients(prof.mean_interference))
    two_term = S / (S - I1) * math.log(S / I1)
    assert mc.avg_rate_interference_limited(prof) == pytest.approx(two_term, rel=1e-6)


def test_mean_rate_survival_path_tolerates_equal_means():
    S = 2.0
    im = np.full((1, 6), 0.1)
    v = mc.location_mean_rate([S], im, 0.0)[0]
    # Erlang-6 interference: E[ln(1 + S A / y)] = e^(y/S) E1(y/S) for exponential A
    from scipy import integrate, special
    ref = integrate.quad(lambda y: y**5 * math.exp(-y / 0.1) / (math.factorial(5) * 0.1**6)
                         * math.exp(y / S) * special.exp1(y / S), 0, 20.0, epsabs=0, epsrel=1e-12,
                         limit=200)[0]
    assert v == pytest.approx(ref, rel=1e-8)


# -- scheduler density ----------------------------------------------------------

@pytest.mark.parametrize("sigma", np.logspace(0, 5, 11).tolist() + [math.inf])
def test_scheduler_density_is_pdf(sigma):
    d = mc.SchedulerDensity(sigma, 1000.0, 1.0)
    from cellrate.numerics import integrate
    pts = [] if d.uniform else [min(999.0, max(2.0, sigma))]
    assert integrate(lambda x: float(d.pdf(x)), 1.0, 1000.0, points=pts) == pytest.approx(1.0, abs=1e-6)
    q = np.linspace(0, 1, 11)
    np.testing.assert_allclose(d.cdf(d.ppf(q)), q, atol=1e-12)


def test_scheduler_density_limits():
    rho, d0 = 1000.0, 1.0
    x = np.linspace(d0, rho, 7)
    uni = mc.SchedulerDensity(math.inf, rho, d0).pdf(x)
    np.testing.assert_allclose(uni, 2 * x / (rho**2 - d0**2))
    np.testing.assert_allclose(mc.SchedulerDensity(1e7, rho, d0).pdf(x), uni, rtol=1e-7)
    assert mc.SchedulerDensity(50, rho, d0).median() < mc.SchedulerDensity(200, rho, d0).median()
    np.testing.assert_allclose(mc.scheduler_density(mc.SchedulerDensity(80, rho, d0), [0.5, 1001]), 0.0)
    with pytest.raises(ValueError):
        mc.SchedulerDensity(0.0, rho, d0)


# -- cell averages -----------------------------------------------------------------

def test_cell_average_monotone_in_sigma(scenario):
    rates = [mc.cell_average_rate(scenario, mc.SchedulerDensity(s, scenario.radius, 1.0))
             for s in (50, 100, 200, 400, 800, math.inf)]
    assert all(b <= a for a, b in zip(rates, rates[1:]))


def test_cell_average_rotation_invariant(scenario):
    d = mc.SchedulerDensity(150.0, scenario.radius, 1.0)
    a = mc.cell_average_rate(scenario, d)
    b = mc.cell_average_rate(scenario.replace(ring_offset=math.pi / 3), d)
    assert b == pytest.approx(a, rel=1e-9)


def test_cell_average_against_simulation(scenario):
    d = mc.SchedulerDensity(200.0, scenario.radius, 1.0)
    _, _, rate = simulate_multi_cell(SimConfig(6, 1_000_000, scenario), density=d)
    assert rate.mean() == pytest.approx(mc.cell_average_rate(scenario, d), rel=0.01)


def test_cell_average_uniform_matches_direct_quadrature(scenario):
    from scipy import integrate
    d = mc.SchedulerDensity(math.inf, scenario.radius, 1.0)
    got = mc.cell_average_rate(scenario, d, interference_limited=True)

    def inner(delta):
        th = np.linspace(0, 2 * math.pi, 64, endpoint=False)
        sig, im = mc.location_means(scenario, delta * np.cos(th), delta * np.sin(th))
        return mc.location_mean_rate(sig, im, 0.0).mean()

    ref = integrate.quad(lambda x: inner(math.exp(x)) * float(d.pdf(math.exp(x))) * math.exp(x),
                         0.0, math.log(scenario.radius), epsrel=1e-10, limit=200)[0]
    assert got == pytest.approx(ref, rel=1e-7)


def test_zero_interference_rate_uniform_matches_single_cell_integral(scenario):
    d = mc.SchedulerDensity(math.inf, scenario.radius, 1.0)
    from scipy import integrate, special
    xp, rho = scenario.snr_composite, scenario.radius

    def rate(delta):  # E[ln(1 + snr A)] = e^{1/snr} E1(1/snr)
        snr = xp / delta**2
        return math.exp(1 / snr) * special.exp1(1 / snr)

    ref = integrate.quad(lambda x: rate(x) * 2 * x / (rho**2 - 1), 1.0, rho, epsrel=1e-11, limit=200)[0]
    assert mc.zero_interference_rate(scenario, d) == pytest.approx(ref, rel=1e-9)


def test_calibration(scenario):
    from cellrate.singlecell import SingleCellAnalysis, mean_rate
    an = SingleCellAnalysis(scenario)
    cal = mc.calibrate_sigma(mean_rate(Greedy(), an), scenario)
    assert 52.9 <= cal.sigma <= 64.7
    assert cal.rate == pytest.approx(mean_rate(Greedy(), an), rel=1e-8)
    assert 0 < cal.coverage_fraction <= 1
    rr = mc.calibrate_sigma(mean_rate(RoundRobin(), an), scenario)
    assert math.isinf(rr.sigma)
    with pytest.raises(NoSignChange):
        mc.calibrate_sigma(100.0, scenario)


def test_power_policy_and_scaling(scenario):
    pol = mc.PowerPolicy("edge-scaled", 1.0, 4000.0)
    assert pol.power(2000.0, 2.0) == pytest.approx(0.25)
    s = mc.scenario_at_radius(scenario, 2000.0, pol)
    assert s.num_users == 400 and s.serving.power_w == pytest.approx(0.25)
    assert all(p.power_w == pytest.approx(0.25) for p in s.interferers)
    assert mc.scenario_at_radius(scenario, 250.0, mc.PowerPolicy()).num_users == 6
    with pytest.raises(ValueError):
        mc.PowerPolicy("bogus")


def test_tradeoff_sweep_small(scenario):
    rows = mc.tradeoff_sweep([500.0, 1000.0], [RoundRobin(), Greedy()], mc.PowerPolicy(), scenario)
    assert [r.scheduler for r in rows] == ["rr", "greedy", "rr", "greedy"]
    assert all(r.avg_rate_multi <= r.avg_rate_single for r in rows)
    assert math.isinf(rows[0].sigma_m) and rows[1].sigma_m < 200
    with pytest.raises(ValueError):
        mc.tradeoff_sweep([1000.0, 500.0], [RoundRobin()], mc.PowerPolicy(), scenario)


def test_nakagami_cell_average_runs(scenario):
    fad = NakagamiPowerFading(2.0)
    p = _profile(scenario, 400.0, 100.0)
    generic = mc.mean_rate_at(p, scenario.noise_power, fad)
    # m = 2 must sit above the Rayleigh value at the same location (less fading loss)
    assert generic > mc.mean_rate_at(p, scenario.noise_power) * 0.99
    _, _, rate = simulate_multi_cell(SimConfig(8, 400_000, scenario, fading=fad), loc=p.location)
    assert rate.mean() == pytest.approx(generic, rel=0.005)
