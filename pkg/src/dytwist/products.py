"""Truncated infinite products for rho_F and the twist F, with ln-divergence removal.

The partial products grow like ``(N r)**a``.  Given the partial logs at ``N``
and ``2N`` the slope ``a`` is fitted by two-point differencing and removed
against ``ln(N r)``, the log of the argument scale reached by the last factor.
Subtracting ``a ln N`` alone would leave a spurious ``a ln r`` offset.

The 4x4 product is carried in M-descriptor space: every factor is
``rho(y)^{-1} M(1, (y+1)/(y-1))`` with ``y = x + n r``, conjugated by
``D1**n``, which swaps ``b+ <-> b-`` at odd ``n``.  All factors commute.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import loggamma

from .errors import PoleProximity
from .rmat import (
    D1,
    D1_INV,
    ID4,
    DeformationParams,
    MDescriptor,
    build_M,
    r_matrix,
    twist_F_closed,
    twist_M,
)
from .specfun import as_point, default_guard, log_rho_F

LABELS_SCALAR = ("rho_F",)
LABELS_TWIST = ("rho_F", "b_plus", "b_minus")


@dataclass
class ProductRun:
    """Partial logs at ``N`` and ``2N`` plus the ln-extrapolated estimate.

    Arrays are indexed by ``labels``: the scalar prefactor alone for rho_F, or
    (scalar, log b+, log b-) for the twist.
    """

    N: int
    r: float
    labels: tuple
    partial_log: np.ndarray
    partial_log_2N: np.ndarray
    extrapolated: np.ndarray
    divergence_slope: np.ndarray

    @property
    def is_matrix(self):
        return len(self.labels) == 3

    def _as_value(self, logs):
        if not self.is_matrix:
            return complex(np.exp(logs[0]))
        return np.exp(logs[0]) * build_M(MDescriptor(np.exp(logs[1]), np.exp(logs[2])))

    @property
    def partial_value(self):
        return self._as_value(self.partial_log)

    @property
    def extrapolated_value(self):
        return self._as_value(self.extrapolated)

    def extrapolated_descriptor(self):
        return MDescriptor(complex(np.exp(self.extrapolated[1])), complex(np.exp(self.extrapolated[2])))


def factor_logs(beta, r, n_start, n_stop, guard=None):
    """Per-factor logs for ``n`` in ``[n_start, n_stop)``: rows (scalar, b+, b-)."""
    guard = default_guard() if guard is None else guard
    x = as_point(beta).x
    n = np.arange(n_start, n_stop)
    y = x + n * r
    for z in (y / 2, 1 + y / 2):
        dist = np.abs(z - np.round(z.real))
        if np.any((np.round(z.real) <= 0) & (dist < guard)):
            raise PoleProximity(f"rho pole among factors {n_start}..{n_stop - 1}")
    if np.any(np.abs(y - 1) < guard) or np.any(np.abs(y + 1) < guard):
        raise PoleProximity(f"matrix factor pole among factors {n_start}..{n_stop - 1}")
    scalar = -(loggamma(y / 2) + loggamma(1 + y / 2) - 2 * loggamma((1 + y) / 2))
    m_log = np.log((y + 1) / (y - 1))
    odd = (n % 2) == 1
    out = np.zeros((3, n.size), dtype=complex)
    out[0] = scalar
    out[1] = np.where(odd, m_log, 0)
    out[2] = np.where(odd, 0, m_log)
    return out


def partial_logs(beta, r, n_start, n_stop, guard=None):
    """Summed factor logs over ``[n_start, n_stop)``.

    Disjoint ranges combine by addition, so ranges can be evaluated separately.
    """
    return factor_logs(beta, r, n_start, n_stop, guard).sum(axis=1)


def _run(beta, p, N, labels):
    if N < 2:
        raise ValueError("truncation order N must be >= 2")
    p = DeformationParams() if p is None else p
    logs = factor_logs(beta, p.r, 1, 2 * N + 1, p.guard)
    cums = np.cumsum(logs, axis=1)
    at_n = cums[:, N - 1]
    at_2n = cums[:, 2 * N - 1]
    slope = (at_2n - at_n) / math.log(2.0)
    extrap = at_n - slope * math.log(N * p.r)
    k = len(labels)
    return ProductRun(N, p.r, labels, at_n[:k], at_2n[:k], extrap[:k], slope[:k])


def rho_F_product(beta, p=None, N=4096):
    """``rho_F(beta) = prod_{n>=1} rho(beta - i n pi r)^{-1}``, truncated and extrapolated."""
    return _run(beta, p, N, LABELS_SCALAR)


def twist_F_product(beta, p=None, N=4096):
    """``F_12(beta) = prod_{n>=1} Ad(D1**n) R(beta - i n pi r)^{-1}``, truncated and extrapolated."""
    return _run(beta, p, N, LABELS_TWIST)


def twist_factor(beta, n, p=None):
    """The ``n``-th 4x4 factor ``D1^n R_DY(beta - i n pi r)^{-1} D1^{-n}``."""
    p = DeformationParams() if p is None else p
    beta = as_point(beta).beta
    inv = np.linalg.inv(r_matrix("dy", beta - 1j * n * math.pi * p.r, p))
    d = np.linalg.matrix_power(D1, n % 4)
    d_inv = np.linalg.matrix_power(D1_INV, n % 4)
    return d @ inv @ d_inv


def twist_partial_matrix(beta, N, p=None, reverse=False):
    """Ordered product of the first ``N`` 4x4 factors (left to right in ``n``)."""
    out = ID4.copy()
    order = range(N, 0, -1) if reverse else range(1, N + 1)
    for n in order:
        out = out @ twist_factor(beta, n, p)
    return out


def telescoped_twist(beta, N, p=None, q=None):
    """``tau^N F(beta - i N pi r)`` times the first ``N`` factors.

    Iterating the difference equation ``N`` times makes this equal to
    ``F(beta)`` exactly; no divergent tail is involved.
    """
    p = DeformationParams() if p is None else p
    beta = as_point(beta).beta
    shifted = twist_F_closed(beta - 1j * N * math.pi * p.r, p, q)
    d = np.linalg.matrix_power(D1, N % 4)
    d_inv = np.linalg.matrix_power(D1_INV, N % 4)
    return d @ shifted @ d_inv @ twist_partial_matrix(beta, N, p)


def closed_logs(beta, p=None, q=None):
    """Closed-form counterparts of the twist run: (log rho_F, log A, log B)."""
    p = DeformationParams() if p is None else p
    m = twist_M(beta, p.r, p.guard)
    return np.array([log_rho_F(beta, p.r, q, p.guard), np.log(m.b_plus), np.log(m.b_minus)])
