"""Adaptive Gauss-Legendre panel quadrature for smooth complex integrands.

Integrals over ``t`` in ``[t_lo, t_hi]`` with measure ``dt/t`` are carried out in
``u = log t``, where the multi-scale Barnes kernels become uniformly smooth.
"""

import math

import numpy as np

from .errors import QuadratureFailure

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(20)
_NOISE = 100 * np.finfo(float).eps


def _panel_sums(f, a, b):
    """20-point Gauss-Legendre sums (and sums of ``|f|``) for every panel ``[a_i, b_i]``."""
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    u = mid[:, None] + half[:, None] * _NODES[None, :]
    vals = f(u.ravel()).reshape(u.shape)
    return half * (vals @ _WEIGHTS), np.abs(half) * (np.abs(vals) @ _WEIGHTS)


def integrate_dt_over_t(bracket, t_lo, t_hi, abs_tol, max_panels=4000):
    """Integrate ``bracket(t) dt / t`` over ``[t_lo, t_hi]``.

    ``bracket`` must accept a 1-d float array of ``t`` and return complex values.
    Panels start one unit wide in ``log t`` and are bisected until the difference
    between a panel's rule and its two halves is within that panel's share of
    ``abs_tol``.
    """
    u_lo, u_hi = math.log(t_lo), math.log(t_hi)
    width = u_hi - u_lo
    if width <= 0:
        return 0j

    def f(u):
        return bracket(np.exp(u))

    n0 = max(4, int(math.ceil(width)))
    edges = np.linspace(u_lo, u_hi, n0 + 1)
    a, b = edges[:-1], edges[1:]
    whole, _ = _panel_sums(f, a, b)
    prev_err = np.full(a.shape, np.inf)
    total = 0j
    used = n0
    tol_density = abs_tol / width
    while a.size:
        m = 0.5 * (a + b)
        left, left_mag = _panel_sums(f, a, m)
        right, right_mag = _panel_sums(f, m, b)
        refined = left + right
        err = np.abs(refined - whole)
        # rounding in the integrand sets a floor no bisection can beat: accept
        # panels whose error is at that floor or stopped shrinking on bisection
        noise = _NOISE * (left_mag + right_mag)
        stalled = err > 0.25 * prev_err
        ok = (err <= tol_density * (b - a)) | (err <= noise) | stalled
        total += refined[ok].sum()
        bad = ~ok
        if not bad.any():
            break
        used += int(bad.sum())
        if used > max_panels:
            raise QuadratureFailure(
                f"panel budget {max_panels} exhausted; worst panel error {err[bad].max():.3e}"
            )
        a = np.concatenate([a[bad], m[bad]])
        b = np.concatenate([m[bad], b[bad]])
        whole = np.concatenate([left[bad], right[bad]])
        prev_err = np.concatenate([err[bad], err[bad]]) * 0.5
    return complex(total)
