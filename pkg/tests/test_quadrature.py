import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlgrad import quadrature


def test_gauss_legendre_exact_for_polynomials():
    x, w = quadrature.gauss_legendre(8)
    assert w.sum() == pytest.approx(2.0)
    assert np.sum(w * x**14) == pytest.approx(2 / 15)


def test_panel_rule():
    t, w = quadrature.panel_rule(np.array([0.0, 1.0, 3.0]), 12)
    assert np.sum(w * np.exp(t)) == pytest.approx(math.e**3 - 1, rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(s0=st.floats(0.0, 0.99), a=st.one_of(st.just(0.0), st.floats(1e-3, 5.0)))
def test_graded_rule_integrates_singular_power(s0, a):
    # int_0^1 t^-s0 e^{-a t} dt = a^(s0-1) * lower_gamma(1-s0, a)
    from scipy.special import gamma, gammainc
    t, w = quadrature.graded_power_rule(1.0, s0)
    got = float(np.sum(w * t**-s0 * np.exp(-a * t)))
    exact = 1 / (1 - s0) if a == 0 else a ** (s0 - 1) * gamma(1 - s0) * gammainc(1 - s0, a)
    assert got == pytest.approx(exact, rel=1e-10)


def test_graded_rule_rejects_bad_exponent():
    with pytest.raises(ValueError):
        quadrature.graded_power_rule(1.0, 1.0)


def test_radial_rule_oscillatory_moment():
    # int_0^1 t^-1/2 cos(2 pi f t) dt against a fine QUADPACK value
    from scipy import integrate
    f = 40.0
    t, w = quadrature.radial_rule(lambda t: t**-0.5, 0.5, freq=f)
    got = float(np.sum(w * np.cos(2 * math.pi * f * t)))
    ref, _ = integrate.quad(lambda t: np.cos(2 * math.pi * f * t), 0, 1, weight="alg",
                            wvar=(-0.5, 0.0), epsabs=1e-14, limit=500)
    assert got == pytest.approx(ref, rel=1e-10)


def test_wynn_accelerates_alternating_series():
    partial = np.cumsum([(-1) ** k / (k + 1) for k in range(20)])
    assert quadrature.wynn_epsilon(partial) == pytest.approx(math.log(2), rel=1e-12)


def test_oscillatory_sum_sine_integral():
    # int_pi^inf sin(t)/t dt = pi/2 - Si(pi)
    from scipy.special import sici
    got = quadrature.oscillatory_sum(lambda t: np.sin(t) / t, lambda k: math.pi * np.arange(1, k + 1))
    assert got == pytest.approx(math.pi / 2 - sici(math.pi)[0], rel=1e-10)
