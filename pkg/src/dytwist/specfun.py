"""Complex special functions: log-Gamma, Barnes Gamma_1 ratios, log Gamma_2,
the double sine S_2 and the three scalar normalisations rho, rho_r, rho_F.

Conventions
-----------
* ``Gamma_1(x|w) = w**(x/w - 1/2) * Gamma(x/w) / sqrt(2 pi)``.  Only ratios are
  exposed, so the constant never leaks out.
* ``log_gamma2`` is defined up to an additive constant that depends on the
  periods only.  Every exposed quantity built on it (S_2, rho_F) is a ratio in
  which that constant cancels.
* Logarithms and complex powers use the principal branch.
"""

import cmath
import math
import os
from dataclasses import dataclass

import numpy as np
from scipy.special import bernoulli, exp1, loggamma

from ._quad import integrate_dt_over_t
from .errors import PoleProximity, QuadratureFailure, ZeroOrPole

DEFAULT_GUARD = 1e-6
_LOG_2PI = math.log(2.0 * math.pi)
_N_SERIES = 32

# t/(1 - exp(-t)) = sum b_n t^n / n!, i.e. Bernoulli numbers with b_1 = +1/2.
_BPLUS = bernoulli(_N_SERIES).astype(float)
_BPLUS[1] = 0.5
_FACT = np.array([math.factorial(n) for n in range(_N_SERIES + 1)], dtype=float)


def default_guard():
    """Pole-guard radius, overridable through ``DYTWIST_GUARD``."""
    return float(os.environ.get("DYTWIST_GUARD", DEFAULT_GUARD))


@dataclass(frozen=True)
class Periods:
    omega1: complex
    omega2: complex

    def __post_init__(self):
        w1, w2 = complex(self.omega1), complex(self.omega2)
        if not (w1.real > 0 and w2.real > 0):
            raise ValueError(f"periods need positive real parts, got {w1}, {w2}")
        object.__setattr__(self, "omega1", w1)
        object.__setattr__(self, "omega2", w2)

    @property
    def total(self):
        return self.omega1 + self.omega2

    def swapped(self):
        return Periods(self.omega2, self.omega1)


@dataclass(frozen=True)
class QuadratureSettings:
    """Numerical controls for the Gamma_2 / S_2 integrals.

    ``series_cutoff`` and ``tail_cutoff`` are dimensionless: the small-t series
    is used for ``t < series_cutoff / scale`` (``scale`` the largest of the
    periods and arguments) and the integral is truncated where the kernel has
    decayed by ``exp(-tail_cutoff)``.
    """

    abs_tol: float = 1e-12
    series_cutoff: float = 0.5
    tail_cutoff: float = 40.0
    max_panels: int = 4000
    max_shifts: int = 64

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")
        if not 0 < self.series_cutoff < self.tail_cutoff:
            raise ValueError("need 0 < series_cutoff < tail_cutoff")
        if self.max_panels < 1:
            raise ValueError("max_panels must be >= 1")

    @classmethod
    def from_env(cls, **overrides):
        """Defaults with ``DYTWIST_QUAD_TOL`` applied, then ``overrides``."""
        tol = os.environ.get("DYTWIST_QUAD_TOL")
        if tol is not None and "abs_tol" not in overrides:
            overrides["abs_tol"] = float(tol)
        return cls(**overrides)


@dataclass(frozen=True)
class SpectralPoint:
    """A rapidity ``beta`` together with ``x = i beta / pi``."""

    beta: complex

    def __post_init__(self):
        object.__setattr__(self, "beta", complex(self.beta))

    @property
    def x(self):
        if self.beta == -1j * math.pi:
            return 1 + 0j
        return 1j * self.beta / math.pi

    def __neg__(self):
        return SpectralPoint(-self.beta)


def as_point(beta):
    return beta if isinstance(beta, SpectralPoint) else SpectralPoint(beta)


def _settings(q):
    return QuadratureSettings.from_env() if q is None else q


# ---------------------------------------------------------------------------
# Gamma and Gamma_1


def log_gamma(z, guard=None):
    """Principal-branch ``log Gamma(z)`` (analytic continuation off the real axis).

    Raises PoleProximity when ``z`` is within ``guard`` of a non-positive integer.
    """
    z = complex(z)
    guard = default_guard() if guard is None else guard
    if z.real < 0.5:
        n = round(z.real)
        if n <= 0 and abs(z - n) < guard:
            raise PoleProximity(f"Gamma pole at {n}: argument {z}")
    elif abs(z) < guard:
        raise PoleProximity(f"Gamma pole at 0: argument {z}")
    return complex(loggamma(z))


def log_gamma1(x, omega, guard=None):
    """``log Gamma_1(x|omega)`` in the convention of the module docstring."""
    x, omega = complex(x), complex(omega)
    z = x / omega
    return (z - 0.5) * cmath.log(omega) + log_gamma(z, guard) - 0.5 * _LOG_2PI


def gamma1_ratio(a, b, omega, guard=None):
    """``Gamma_1(a|omega) / Gamma_1(b|omega) = omega**((a-b)/omega) Gamma(a/omega)/Gamma(b/omega)``."""
    a, b, omega = complex(a), complex(b), complex(omega)
    log_r = (a - b) / omega * cmath.log(omega) + log_gamma(a / omega, guard) - log_gamma(b / omega, guard)
    return cmath.exp(log_r)


# ---------------------------------------------------------------------------
# Barnes double Gamma and double sine


def _laurent(y, w1, w2):
    """Coefficients ``C_k`` with ``exp(-y t)/((1-e^{-w1 t})(1-e^{-w2 t})) = sum C_k t^(k-2) / (w1 w2)``."""
    k = np.arange(_N_SERIES + 1)
    b1 = _BPLUS * w1**k / _FACT
    b2 = _BPLUS * w2**k / _FACT
    ex = (-y) ** k / _FACT
    prod = np.convolve(np.convolve(b1, b2)[: _N_SERIES + 1], ex)[: _N_SERIES + 1]
    return prod


def _kernel(y, w1, w2, t):
    return np.exp(-y * t) / (np.expm1(-w1 * t) * np.expm1(-w2 * t))


def _shift_plan(x, periods, lo, hi, max_shifts):
    """Greedy sequence of +/- period shifts taking ``Re x`` into ``[lo, hi]``.

    Yields ``(sign, k)`` pairs: ``sign = -1`` means ``x -> x - omega_k``.
    """
    ws = (periods.omega1, periods.omega2)
    order = sorted(range(2), key=lambda i: -ws[i].real)
    plan = []
    y = x
    while y.real > hi or y.real < lo:
        if len(plan) >= max_shifts:
            raise QuadratureFailure(f"argument {x} needs more than {max_shifts} shifts to reach the strip")
        if y.real > hi:
            k = next(i for i in order if (y - ws[i]).real >= lo)
            y = y - ws[k]
            plan.append((-1, k))
        else:
            k = next(i for i in order if (y + ws[i]).real <= hi)
            y = y + ws[k]
            plan.append((+1, k))
    return y, plan


def _log_gamma2_strip(x, w1, w2, q):
    prefactor = 1.0 / (w1 * w2)
    scale = max(abs(w1), abs(w2), abs(x), 1.0)
    t_c = q.series_cutoff / scale
    t_max = max(q.tail_cutoff / x.real, 2.0 * t_c)

    coeffs = _laurent(x, w1, w2)
    c1 = coeffs[1] * prefactor
    c0 = coeffs[2] * prefactor

    k = np.arange(3, _N_SERIES + 1)
    head = prefactor * np.sum(coeffs[3:] * t_c ** (k - 2) / (k - 2))
    j = np.arange(1, _N_SERIES + 1)
    head -= c0 * np.sum((-t_c) ** j / (j * _FACT[1:]))

    def bracket(t):
        return _kernel(x, w1, w2, t) - prefactor / t**2 - c1 / t - c0 * np.exp(-t)

    body = integrate_dt_over_t(bracket, t_c, t_max, q.abs_tol, q.max_panels)
    tail = -prefactor / (2.0 * t_max**2) - c1 / t_max - c0 * exp1(t_max)
    return complex(head + body + tail)


def log_gamma2(x, periods, q=None, guard=None):
    """``log Gamma_2(x|omega1, omega2)`` up to a periods-only additive constant.

    Arguments outside ``omega_s/4 <= Re x <= Re(omega1 + omega2) - omega_s/4``
    (``omega_s`` the period with the smaller real part) are first shifted in through
    ``Gamma_2(x + omega_1) = Gamma_2(x) / Gamma_1(x|omega_2)`` and its mirror.
    """
    q = _settings(q)
    x = complex(x)
    w1, w2 = periods.omega1, periods.omega2
    lo = 0.25 * min(w1.real, w2.real)
    y, plan = _shift_plan(x, periods, lo, (w1 + w2).real - lo, q.max_shifts)

    correction = 0j
    z = x
    others = (w2, w1)
    ws_pair = (w1, w2)
    for sign, k in plan:
        if sign < 0:
            z = z - ws_pair[k]
            correction -= log_gamma1(z, others[k], guard)
        else:
            correction += log_gamma1(z, others[k], guard)
            z = z + ws_pair[k]
    return _log_gamma2_strip(y, w1, w2, q) + correction


def _log_double_sine_strip(x, w1, w2, q):
    prefactor = 1.0 / (w1 * w2)
    xr = w1 + w2 - x
    scale = max(abs(w1), abs(w2), abs(x), abs(xr), 1.0)
    t_c = q.series_cutoff / scale
    decay = min(x.real, xr.real)
    t_max = max(q.tail_cutoff / decay, 2.0 * t_c)

    c1 = _laurent(x, w1, w2)
    c1r = _laurent(xr, w1, w2)
    lin = 2.0 * c1[1] * prefactor

    k = np.arange(3, _N_SERIES + 1)
    head = prefactor * np.sum((c1r[3:] - c1[3:]) * t_c ** (k - 2) / (k - 2))

    def bracket(t):
        return _kernel(xr, w1, w2, t) - _kernel(x, w1, w2, t) + lin / t

    body = integrate_dt_over_t(bracket, t_c, t_max, q.abs_tol, q.max_panels)
    tail = lin / t_max
    return complex(head + body + tail)


def _log_two_sine(z, omega, guard):
    ratio = z / omega
    n = round(ratio.real)
    if abs(ratio - n) < guard:
        raise ZeroOrPole(f"double sine lattice point: {z} / {omega} ~ {n}")
    return cmath.log(2.0 * cmath.sin(math.pi * ratio))


def log_double_sine(x, periods, q=None, guard=None):
    """``log S_2(x|omega1, omega2)`` with ``S_2 = Gamma_2(omega1 + omega2 - x) / Gamma_2(x)``."""
    q = _settings(q)
    guard = default_guard() if guard is None else guard
    x = complex(x)
    w1, w2 = periods.omega1, periods.omega2
    lo = 0.25 * min(w1.real, w2.real)
    y, plan = _shift_plan(x, periods, lo, (w1 + w2).real - lo, q.max_shifts)

    # S_2(z + w_k) = S_2(z) / (2 sin(pi z / w_other))
    correction = 0j
    z = x
    ws_pair = (w1, w2)
    others = (w2, w1)
    for sign, k in plan:
        if sign < 0:
            z = z - ws_pair[k]
            correction -= _log_two_sine(z, others[k], guard)
        else:
            correction += _log_two_sine(z, others[k], guard)
            z = z + ws_pair[k]
    return _log_double_sine_strip(y, w1, w2, q) + correction


def double_sine(x, periods, q=None, guard=None):
    """Barnes double sine ``S_2(x|omega1, omega2)``."""
    return cmath.exp(log_double_sine(x, periods, q, guard))


# ---------------------------------------------------------------------------
# Normalisation factors


def log_rho_dy(beta, guard=None):
    x = as_point(beta).x
    return (
        log_gamma(x / 2, guard)
        + log_gamma(1 + x / 2, guard)
        - 2.0 * log_gamma((1 + x) / 2, guard)
    )


def rho_dy(beta, guard=None):
    """Double Yangian normalisation ``Gamma(x/2) Gamma(1+x/2) / Gamma((1+x)/2)^2``."""
    return cmath.exp(log_rho_dy(beta, guard))


def log_rho_r(beta, r, q=None, guard=None):
    x = as_point(beta).x
    p = Periods(r, 2.0)
    return (
        2.0 * log_double_sine(1 + x, p, q, guard)
        - log_double_sine(x, p, q, guard)
        - log_double_sine(2 + x, p, q, guard)
    )


def rho_r(beta, r, q=None, guard=None):
    """Deformed normalisation ``S_2(1+x)^2 / (S_2(x) S_2(2+x))`` with periods ``(r, 2)``."""
    return cmath.exp(log_rho_r(beta, r, q, guard))


def log_rho_F(beta, r, q=None, guard=None):
    x = as_point(beta).x
    p = Periods(2.0, r)
    return (
        2.0 * log_gamma2(x + 1 + r, p, q, guard)
        - log_gamma2(x + r, p, q, guard)
        - log_gamma2(x + 2 + r, p, q, guard)
    )


def rho_F(beta, r, q=None, guard=None):
    """Twist normalisation ``Gamma_2(x+1+r)^2 / (Gamma_2(x+r) Gamma_2(x+2+r))``, periods ``(2, r)``."""
    return cmath.exp(log_rho_F(beta, r, q, guard))
