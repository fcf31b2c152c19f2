import cmath
import math

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dytwist.errors import PoleProximity, QuadratureFailure, ZeroOrPole
from dytwist.specfun import (
    Periods,
    QuadratureSettings,
    SpectralPoint,
    double_sine,
    gamma1_ratio,
    log_double_sine,
    log_gamma,
    log_gamma1,
    log_gamma2,
    log_rho_dy,
    log_rho_F,
    log_rho_r,
    rho_dy,
    rho_F,
    rho_r,
)

# Reference values frozen from mpmath (30-40 digits working precision).
LOGGAMMA_4_3_2_1I = 1.6297065993521058 + 2.9064243247015558j
# log S2 from the sinh integral representation with error estimates <= 1e-17
S2_REFERENCE = [
    (0.7 + 0.3j, 1.0, 1.7, 0.4988874285041356 - 0.06470141779490408j),
    (1.1 - 0.4j, 2.0, 5.0, 0.4711623968505981 - 0.1421331534276208j),
    (0.3 + 0.2j, 2.0, 0.5, 0.724499129731723 + 0.3444891455617516j),
]


def _log_barnes_g(z):
    return mp.log(mp.barnesg(z))


# --- Gamma / Gamma_1 ---------------------------------------------------------


def test_log_gamma_frozen_reference():
    assert abs(log_gamma(4.3 + 2.1j) - LOGGAMMA_4_3_2_1I) < 1e-14


def test_log_gamma_small_integers():
    for n in range(1, 8):
        assert abs(log_gamma(n) - math.log(math.factorial(n - 1))) < 1e-14


def test_log_gamma_pole_guard():
    for z in (0, -1, -3 + 1e-9j):
        with pytest.raises(PoleProximity):
            log_gamma(z)


@settings(max_examples=60, deadline=None)
@given(
    st.floats(min_value=-6, max_value=8),
    st.floats(min_value=-5, max_value=5),
)
def test_log_gamma_recurrence(a, b):
    z = complex(a, b)
    if min(abs(z - k) for k in range(-8, 1)) < 1e-3:
        return
    lhs = cmath.exp(log_gamma(z + 1) - log_gamma(z))
    assert abs(lhs - z) <= 1e-12 * max(1.0, abs(z))


def test_log_gamma_matches_mpmath_on_left_half_plane():
    for z in (-2.5 + 0.1j, -0.3 - 1.7j, 0.2 + 5j):
        ref = complex(mp.loggamma(z))
        assert abs(cmath.exp(log_gamma(z) - ref) - 1) < 1e-13


def test_gamma1_reduces_to_gamma_at_unit_period():
    z = 2.4 - 0.6j
    ref = log_gamma(z) - 0.5 * math.log(2 * math.pi)
    assert abs(log_gamma1(z, 1.0) - ref) < 1e-14


@pytest.mark.parametrize("omega", [0.7, 2.0, 10.0])
def test_gamma1_ladder(omega):
    x = 1.3 + 0.4j
    lhs = cmath.exp(log_gamma1(x + omega, omega) - log_gamma1(x, omega))
    assert abs(lhs - x) < 1e-12 * abs(x)


def test_gamma1_ratio_is_one_on_equal_arguments():
    assert gamma1_ratio(3.3 + 1j, 3.3 + 1j, 7.0) == pytest.approx(1.0)


# --- Gamma_2 and S_2 ---------------------------------------------------------


def test_periods_validation():
    with pytest.raises(ValueError):
        Periods(0.0, 1.0)
    with pytest.raises(ValueError):
        Periods(1.0, -2.0)
    assert Periods(2.0, 3.0).total == 5.0


def test_quadrature_settings_validation():
    with pytest.raises(ValueError):
        QuadratureSettings(abs_tol=0)
    with pytest.raises(ValueError):
        QuadratureSettings(series_cutoff=-1)


@pytest.mark.parametrize("x,w1,w2,ref", S2_REFERENCE)
def test_double_sine_against_integral_reference(x, w1, w2, ref):
    assert abs(log_double_sine(x, Periods(w1, w2)) - ref) < 1e-12


def test_double_sine_against_barnes_g_unit_periods():
    # S2(z|1,1) = (2 pi)^(1-z) G(z) / G(2-z)
    for z in (0.6 + 0.25j, 1.4 - 0.3j, 0.2 + 0.9j):
        ref = complex((1 - z) * mp.log(2 * mp.pi) + _log_barnes_g(z) - _log_barnes_g(2 - z))
        assert abs(cmath.exp(log_double_sine(z, Periods(1, 1)) - ref) - 1) < 1e-12


def test_gamma2_differences_against_barnes_g():
    # Gamma2(z|1,1) = (2 pi)^(z/2) / G(z) up to a z-independent constant
    a, b = 0.6 + 0.25j, 1.3 - 0.2j
    ref = complex((a - b) / 2 * mp.log(2 * mp.pi) + _log_barnes_g(b) - _log_barnes_g(a))
    got = log_gamma2(a, Periods(1, 1)) - log_gamma2(b, Periods(1, 1))
    assert abs(got - ref) < 1e-12


def test_gamma2_ladder_far_from_strip():
    # shifted far outside the quadrature window: exercises the shift plan
    p = Periods(2.0, 3.0)
    x = 9.7 + 0.4j
    lhs = log_gamma2(x + 2.0, p) - log_gamma2(x, p)
    assert abs(cmath.exp(lhs + log_gamma1(x, 3.0)) - 1) < 1e-11


def test_double_sine_special_values():
    p = Periods(1.3, 2.1)
    # S2 is 1 at the centre of its reflection symmetry
    assert abs(double_sine(p.total / 2, p) - 1) < 1e-13
    with pytest.raises(ZeroOrPole):
        log_double_sine(0.0, p)


@settings(max_examples=30, deadline=None)
@given(
    st.floats(min_value=0.5, max_value=4.0),
    st.floats(min_value=0.5, max_value=4.0),
    st.floats(min_value=0.1, max_value=0.9),
    st.floats(min_value=-0.5, max_value=0.5),
)
def test_double_sine_reflection_and_shift(w1, w2, frac, im):
    p = Periods(w1, w2)
    x = complex(frac * min(w1, w2), im)
    refl = log_double_sine(x, p) + log_double_sine(p.total - x, p)
    assert abs(refl) < 1e-9
    shift = cmath.exp(log_double_sine(x + w1, p) - log_double_sine(x, p))
    assert abs(shift * 2 * cmath.sin(math.pi * x / w2) - 1) < 1e-8


def test_double_sine_period_symmetry():
    x = 0.8 - 0.2j
    a = log_double_sine(x, Periods(1.5, 3.5))
    b = log_double_sine(x, Periods(3.5, 1.5))
    assert abs(a - b) < 1e-12


def test_quadrature_tolerance_is_honoured():
    # a coarse tolerance must visibly change the answer, a tight one must not
    x, p = 0.7 + 0.3j, Periods(1.0, 1.7)
    tight = log_double_sine(x, p, QuadratureSettings(abs_tol=1e-14))
    loose = log_double_sine(x, p, QuadratureSettings(abs_tol=1e-3, series_cutoff=0.05))
    assert abs(tight - S2_REFERENCE[0][3]) < 1e-13
    assert abs(loose - S2_REFERENCE[0][3]) < 1e-3


def test_quadrature_budget_exhaustion_raises():
    q = QuadratureSettings(abs_tol=1e-15, max_panels=4)
    with pytest.raises(QuadratureFailure):
        log_double_sine(0.05 + 0.01j, Periods(0.1, 40.0), q)


def test_env_overrides(monkeypatch):
    monkeypatch.setenv("DYTWIST_QUAD_TOL", "1e-10")
    assert QuadratureSettings.from_env().abs_tol == 1e-10
    monkeypatch.setenv("DYTWIST_GUARD", "0.5")
    with pytest.raises(PoleProximity):
        log_gamma(0.3)


# --- normalisation factors ---------------------------------------------------


def test_spectral_point_exact_special_point():
    assert SpectralPoint(-1j * math.pi).x == 1
    assert (-SpectralPoint(0.5)).beta == -0.5


def test_rho_dy_against_mpmath():
    beta = 1.3 + 0.2j
    x = 1j * beta / mp.pi
    ref = mp.gamma(x / 2) * mp.gamma(1 + x / 2) / mp.gamma((1 + x) / 2) ** 2
    assert abs(rho_dy(beta) / complex(ref) - 1) < 1e-13


@pytest.mark.parametrize("beta", [0.7 + 0.4j, -1.2 + 0.1j, 2.5 - 0.6j])
def test_rho_F_against_barnes_g_at_r2(beta):
    # periods (2,2) rescale to (1,1); the quadratic rescaling anomaly leaves ln2/4
    x = 1j * beta / mp.pi
    z = [(x + 2 + k) / 2 for k in range(3)]
    ref = -2 * _log_barnes_g(z[1]) + _log_barnes_g(z[0]) + _log_barnes_g(z[2]) + mp.log(2) / 4
    assert abs(log_rho_F(beta, 2.0) - complex(ref)) < 1e-12


@pytest.mark.parametrize("beta", [0.7 + 0.4j, -1.2 + 0.1j])
def test_rho_r_against_barnes_g_at_r2(beta):
    # S2(y|2,2) = S2(y/2|1,1)
    x = 1j * beta / mp.pi

    def log_s2(z):
        return (1 - z) * mp.log(2 * mp.pi) + _log_barnes_g(z) - _log_barnes_g(2 - z)

    ref = 2 * log_s2((1 + x) / 2) - log_s2(x / 2) - log_s2((2 + x) / 2)
    assert abs(cmath.exp(log_rho_r(beta, 2.0) - complex(ref)) - 1) < 1e-12


def test_rho_dy_reflection_scalar():
    for beta in (0.4 + 0.3j, 1.7 - 0.2j, -2.2 + 0.8j):
        prod = rho_dy(beta) * rho_dy(-beta)
        assert abs(prod - 1 / cmath.tanh(beta / 2) ** 2) < 1e-12 * abs(prod)


def test_rho_r_tends_to_rho_dy():
    beta = 1.0 + 0.5j
    d1 = abs(rho_r(beta, 32.0) - rho_dy(beta))
    d2 = abs(rho_r(beta, 64.0) - rho_dy(beta))
    assert d2 < d1
    assert 3.2 < d1 / d2 < 4.8  # second order in 1/r


def test_rho_F_tends_to_one():
    beta = 1.0
    devs = [abs(rho_F(beta, r) - 1) for r in (16.0, 32.0, 64.0, 128.0)]
    assert all(b < a for a, b in zip(devs, devs[1:]))


@pytest.mark.xfail(strict=True, reason="deviation decays like ln(r)/(2r): 3.2e-3 at r = 1000")
def test_rho_F_at_r_1000_within_1e3():
    # measured |rho_F - 1| is 3.2e-3; the decay is (ln r)/(2r), see the notes
    assert abs(rho_F(1.0, 1000.0) - 1) < 1e-3


def test_rho_F_at_r_1000_measured():
    dev = abs(rho_F(1.0, 1000.0) - 1)
    assert 2.5e-3 < dev < 4e-3
    assert abs(dev - math.log(1000.0) / 2000.0) < 5e-4


def test_log_rho_poles():
    with pytest.raises(PoleProximity):
        log_rho_dy(0.0)

