import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlgrad.analysis import (RateReport, TestFunction, fit_slope, fractionalization_error,
                             hessian_lipschitz, holder_bump, localization_rate,
                             multiplier_uniformity, poincare_scan, random_samples, smooth_bump,
                             sobolev_norm, thread_count)
from nlgrad.errors import UnresolvedHorizon, ValidationError
from nlgrad.grid import Field, Grid


@settings(max_examples=40, deadline=None)
@given(slope=st.floats(-3.0, 3.0), c=st.floats(1e-3, 1e3))
def test_fit_slope_recovers_power_law(slope, c):
    d = np.array([0.4, 0.2, 0.1, 0.05])
    assert fit_slope(d, c * d**slope) == pytest.approx(slope, abs=1e-9)


def test_fit_slope_mask_and_degenerate():
    d = [0.4, 0.2, 0.1]
    assert fit_slope(d, [4.0, 1.0, 1e-30], keep=[True, True, False]) == pytest.approx(2.0)
    assert math.isnan(fit_slope([1.0], [1.0]))


def test_bumps():
    g = Grid(1, 64, 8.0)
    u = smooth_bump(g, radius=2.0)
    x = g.axis_points
    assert u.values[32] == 1.0  # centre L/2
    assert np.all(u.values[np.abs(x - 4.0) >= 2.0] == 0.0)
    h = holder_bump(g, 0.5, radius=2.0)
    assert h.values[32] == 0.0
    assert h.values[33] == pytest.approx(u.values[33] * (g.h) ** 1.5)


def test_test_function_kinds():
    g = Grid(1, 64, 8.0)
    assert TestFunction("SmoothBump").field(g).values.max() == 1.0
    tent = TestFunction("W1pSample").field(g).values
    assert tent[32] == 0.0 and tent.max() > 0
    with pytest.raises(ValidationError):
        TestFunction("HolderBump", alpha=1.5).field(g)
    with pytest.raises(ValidationError):
        TestFunction("Wavelet").field(g)


def test_hessian_lipschitz_of_a_mode():
    g = Grid(1, 256, 2.0)
    u = Field(g, np.sin(math.pi * g.axis_points))
    # u''' = -pi^3 cos: the difference quotient of u'' tends to pi^3
    assert hessian_lipschitz(u) == pytest.approx(math.pi**3, rel=1e-3)


def test_localization_rate_small(kernel_a):
    g = Grid(1, 512, 8.0)
    rep = localization_rate(kernel_a, TestFunction(), [0.4, 0.2, 0.1], g)
    assert 1.7 < rep.fitted_slope < 2.3
    assert rep.norm == "Linf" and len(rep.csv_rows()) == 4
    assert all(r < 1.05 for r in rep.extras["bound_ratio"])
    with pytest.raises(UnresolvedHorizon):
        localization_rate(kernel_a, TestFunction(), [0.05], g)


def test_strictly_decreasing_above_floor():
    rep = RateReport([1, 2, 3, 4], [1.0, 0.5, 1e-11, 2e-11], 0.0, "L2", "x", floor=1e-11)
    assert rep.strictly_decreasing_above_floor()
    rep.error_list = [1.0, 0.5, 0.6, 1e-12]
    assert not rep.strictly_decreasing_above_floor()


def test_fractionalization_riesz_control(kernel_riesz):
    g = Grid(1, 64, 16.0)
    u = smooth_bump(g)
    rep = fractionalization_error(kernel_riesz, u, [2.0, 10.0], s_inf=0.5)
    assert max(rep.error_list) <= rep.floor
    with pytest.raises(ValidationError):
        fractionalization_error(kernel_riesz, u, [10.0, 2.0], s_inf=0.5)


def test_fractionalization_records_l1_constant(kernel_a):
    g = Grid(1, 64, 16.0)
    rep = fractionalization_error(kernel_a, smooth_bump(g), [2.0, 10.0], s_inf=0.5)
    assert rep.error_list[1] < rep.error_list[0]
    assert len(rep.extras["l1_distance"]) == 2 and rep.extras["empirical_constant"] > 0


def test_random_samples_supported_and_seeded():
    g = Grid(2, 32, 4.0)
    omega = ((1.0, 3.0), (1.0, 3.0))
    a = random_samples(g, omega, 3, seed=7)
    b = random_samples(g, omega, 3, seed=7)
    assert all(np.array_equal(x.values, y.values) for x, y in zip(a, b))
    assert all(np.all(x.values[~g.box_mask(omega)] == 0.0) for x in a)


def test_sobolev_norm_single_mode():
    g = Grid(1, 64, 2.0)
    u = Field(g, np.sin(2 * math.pi * 3 * g.axis_points / 2.0))
    xi = 1.5
    for sigma in (0.0, 0.5, 1.0):
        assert sobolev_norm(u, sigma) == pytest.approx((1 + xi**2) ** (sigma / 2) * 1.0, rel=1e-12)


def test_poincare_scan_small(kernel_a):
    g = Grid(1, 64, 8.0)
    rep = poincare_scan(kernel_a, "Vanishing", [0.5, 1.0], g, ((2.0, 6.0),), samples=16)
    assert all(0 < r < np.inf for r in rep.worst_ratio)
    assert rep.sup_ratio == max(rep.worst_ratio) and rep.variation() >= 1.0
    with pytest.raises(ValidationError):
        poincare_scan(kernel_a, "Vanishing", [0.5], g, ((2.0, 6.0),), samples=8)


def test_multiplier_uniformity_bounds(kernel_a):
    pairs = [(0.5, 1.0), (0.5, 0.5)]
    ok = multiplier_uniformity(kernel_a, pairs, 100.0, {(0.5, 1.0): 2.0}, points=200)
    assert ok.passed and ok.scans[1].max_ratio == 1.0
    bad = multiplier_uniformity(kernel_a, pairs, 100.0, {(0.5, 1.0): 1.0}, points=200)
    assert not bad.passed
    assert bad.to_dict()["bounds"] == {"0.5,1": 1.0}


def test_thread_count(monkeypatch):
    monkeypatch.setenv("NLGRAD_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("NLGRAD_THREADS", "lots")
    with pytest.raises(ValidationError):
        thread_count()
