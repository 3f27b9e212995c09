import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cellrate.channel import (CellScenario, NakagamiPowerFading, PathlossParams, RayleighPowerFading,
                              UserLocation, interferer_distance, mean_rx_power, uniform_area_density)
from cellrate.errors import BelowReferenceDistance, PoleCrossing, ScenarioError
from cellrate.numerics import TabulatedPdf, integrate, integrate_semiinfinite, ks_distance

FADINGS = [RayleighPowerFading(), RayleighPowerFading(2.5), NakagamiPowerFading(2.0),
           NakagamiPowerFading(0.7, 3.0)]


def test_rayleigh_unit_mean_pdf():
    a = np.linspace(0, 10, 11)
    np.testing.assert_allclose(RayleighPowerFading().pdf(a), np.exp(-a))


@pytest.mark.parametrize("fad", FADINGS, ids=repr)
def test_fading_is_a_distribution(fad):
    assert integrate_semiinfinite(lambda a: float(fad.pdf(a)), 0.0, scale=fad.mean) == pytest.approx(1.0, abs=1e-6)
    a = np.linspace(0.0, 20 * fad.mean, 400)
    c = fad.cdf(a)
    assert c[0] == 0.0 and np.all(np.diff(c) >= 0) and c[-1] == pytest.approx(1.0, abs=1e-6)
    np.testing.assert_allclose(c + fad.sf(a), 1.0, atol=1e-14)
    mean = integrate_semiinfinite(lambda x: x * float(fad.pdf(x)), 0.0, scale=fad.mean)
    assert mean == pytest.approx(fad.mean, rel=1e-7)


@pytest.mark.parametrize("fad", FADINGS, ids=repr)
def test_logcdf_matches_log_of_cdf(fad):
    a = fad.mean * np.logspace(-6, 1.2, 60)
    np.testing.assert_allclose(fad.logcdf(a), np.log(fad.cdf(a)), rtol=1e-10, atol=1e-15)
    assert np.isfinite(fad.logcdf(np.array([1e-200]))).all()
    np.testing.assert_allclose(fad.pdf_over_cdf(a), fad.pdf(a) / fad.cdf(a), rtol=1e-9)


@pytest.mark.parametrize("fad", FADINGS, ids=repr)
def test_fading_samples(fad):
    x = fad.sample(np.random.default_rng(11), 1_000_000)
    assert x.mean() == pytest.approx(fad.mean, rel=0.01)
    grid = np.linspace(0.0, 40 * fad.mean, 20001)
    vals = fad.pdf(grid)
    vals[0] = vals[1] if not np.isfinite(vals[0]) else vals[0]
    tab = TabulatedPdf(grid, vals)
    # compare against the exact cdf rather than the tabulated one near a pole at 0
    xs = np.sort(x)
    n = xs.size
    F = fad.cdf(xs)
    i = np.arange(1, n + 1)
    ks = max(np.max(i / n - F), np.max(F - (i - 1) / n))
    assert ks < 0.002
    if getattr(fad, "m", 1.0) >= 1.0:  # tabulated cdf only where the pdf is bounded at 0
        assert ks_distance(tab, xs) < 0.002


def test_mgf_rayleigh_and_pole():
    f = RayleighPowerFading(2.0)
    assert f.mgf(0.0) == 1.0
    assert f.mgf(0.2) == pytest.approx(1 / (1 - 0.4))
    with pytest.raises(PoleCrossing):
        f.mgf(0.5)


def test_mgf_nakagami_against_quadrature():
    f = NakagamiPowerFading(2.0, 1.5)
    s = 0.3
    q = integrate_semiinfinite(lambda a: math.exp(min(s * a, 700.0)) * float(f.pdf(a)), 0.0, scale=f.mean)
    assert f.mgf(s) == pytest.approx(q, rel=1e-8)


def test_uniform_area_density():
    rho = 1000.0
    assert uniform_area_density(rho, rho) == pytest.approx(2 / rho)
    assert uniform_area_density(0.0, rho) == 0.0
    assert uniform_area_density(1.5 * rho, rho) == 0.0
    assert integrate(lambda d: float(uniform_area_density(d, rho)), 0, rho) == pytest.approx(1.0)


def test_interferer_distance_examples():
    rho = 1000.0
    for j in range(1, 7):
        assert interferer_distance(UserLocation(0, 0), j, rho) == pytest.approx(2 * rho)
    assert interferer_distance(UserLocation(rho, 0), 1, rho) == pytest.approx(rho)
    assert interferer_distance(UserLocation(rho, 0), 4, rho) == pytest.approx(3 * rho)
    with pytest.raises(ValueError):
        interferer_distance(UserLocation(0, 0), 7, rho)


@settings(max_examples=60)
@given(st.floats(1.0, 999.0), st.floats(0, 2 * math.pi), st.integers(1, 6))
def test_interferer_distance_rotation_symmetry(delta, theta, j):
    rho = 1000.0
    loc = UserLocation.polar(delta, theta)
    rot = UserLocation.polar(delta, theta + math.pi / 3)
    jj = j % 6 + 1
    assert interferer_distance(rot, jj, rho) == pytest.approx(interferer_distance(loc, j, rho), rel=1e-12)


def test_mean_rx_power_examples():
    p = PathlossParams()
    assert p.xi == pytest.approx(1e-8)
    assert mean_rx_power(p, 1000.0) == pytest.approx(1e-14)
    assert mean_rx_power(p, 2000.0) == pytest.approx(2.5e-15)
    assert mean_rx_power(p, p.reference_m) == pytest.approx(p.xi / p.reference_m**p.exponent)
    with pytest.raises(BelowReferenceDistance):
        mean_rx_power(p, 0.5)


@settings(max_examples=40)
@given(st.floats(0.5, 6.0), st.floats(1.0, 1e4), st.floats(1e-6, 1e3))
def test_mean_rx_power_strictly_decreasing(alpha, d, step):
    p = PathlossParams(exponent=alpha)
    assert mean_rx_power(p, d + step) < mean_rx_power(p, d)


@pytest.mark.parametrize("kw, msg", [
    ({"exponent": 0.0}, "exponent must be positive"),
    ({"reference_m": 0.0}, "reference distance"),
    ({"power_w": -1.0}, "power"),
])
def test_pathloss_validation(kw, msg):
    with pytest.raises(ScenarioError, match=msg):
        PathlossParams(**kw)


def test_scenario_defaults_and_validation():
    sc = CellScenario.case_study()
    assert sc.snr_composite == pytest.approx(1e6)
    assert len(sc.interferers) == 6 and sc.user_min_distance == 1.0
    pos = sc.interferer_positions()
    np.testing.assert_allclose(np.hypot(pos[:, 0], pos[:, 1]), 2 * sc.radius)
    np.testing.assert_allclose(np.arctan2(pos[:, 1], pos[:, 0]) % (2 * math.pi),
                               np.arange(6) * math.pi / 3, atol=1e-12)
    with pytest.raises(ScenarioError, match=r"\[interferers\]"):
        CellScenario(interferers=(PathlossParams(),) * 5)
    with pytest.raises(ScenarioError):
        CellScenario(num_users=0)
    with pytest.raises(ScenarioError):
        CellScenario(radius=0.5)
