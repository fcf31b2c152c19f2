"""R-matrices of the double Yangian family, their gauge matrices and the twist F.

All 4x4 matrices act on C^2 (x) C^2 with basis order |00>, |01>, |10>, |11>.
"""

import cmath
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotRepresentable, PoleProximity
from .specfun import as_point, default_guard, gamma1_ratio, rho_dy, rho_F, rho_r

ID2 = np.eye(2, dtype=complex)
ID4 = np.eye(4, dtype=complex)
FLIP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)
# (-1)^{h_0/2} on the first leg
D1 = np.kron(np.diag([1j, -1j]), ID2)
D1_INV = np.kron(np.diag([-1j, 1j]), ID2)


class RKind(enum.Enum):
    DY = "dy"
    V6 = "v6"
    V8 = "v8"
    F = "f"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


@dataclass(frozen=True)
class DeformationParams:
    r: float = 5.0
    c: float = 0.0
    guard: float = field(default_factory=default_guard)

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"deformation scale must be positive, got {self.r}")

    def require_level_zero(self):
        if self.c != 0:
            raise NotRepresentable(f"central charge c = {self.c}: evaluation representations carry c = 0")


@dataclass(frozen=True)
class MDescriptor:
    """Flip-invariant 4x4 matrix ``M(b+, b-)``: corners 1, middle block
    ``[[s, d], [d, s]]`` with ``s = (b+ + b-)/2``, ``d = (b+ - b-)/2``."""

    b_plus: complex
    b_minus: complex

    def matrix(self):
        return build_M(self)

    def __matmul__(self, other):
        return MDescriptor(self.b_plus * other.b_plus, self.b_minus * other.b_minus)

    def inverse(self):
        return MDescriptor(1 / self.b_plus, 1 / self.b_minus)

    def swapped(self):
        return MDescriptor(self.b_minus, self.b_plus)


def build_M(d):
    s = 0.5 * (d.b_plus + d.b_minus)
    t = 0.5 * (d.b_plus - d.b_minus)
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = m[3, 3] = 1
    m[1, 1] = m[2, 2] = s
    m[1, 2] = m[2, 1] = t
    return m


def m_descriptor(m, atol=1e-12):
    """Recover ``(b+, b-)`` from a matrix of M shape; ValueError otherwise."""
    m = np.asarray(m)
    probe = build_M(MDescriptor(m[1, 1] + m[1, 2], m[1, 1] - m[1, 2]))
    if sup_norm(m - probe) > atol * max(1.0, sup_norm(m)):
        raise ValueError("matrix is not of the M(b+, b-) form")
    return MDescriptor(m[1, 1] + m[1, 2], m[1, 1] - m[1, 2])


def sup_norm(a):
    return float(np.max(np.abs(a)))


def tau(m):
    """Conjugation by ``diag(i, -i) (x) Id``; swaps ``b+ <-> b-`` on M-matrices."""
    return D1 @ m @ D1_INV


def flip_conj(m):
    """``P m P``: exchange of the two tensor legs."""
    return FLIP @ m @ FLIP


# ---------------------------------------------------------------------------
# R-matrices


def _check(value, what, guard):
    if abs(value) < guard:
        raise PoleProximity(f"{what} vanishes (|{value:.3e}| < {guard})")


def b_dy(beta, guard=None):
    """``(i beta - pi)/(i beta + pi) = (x - 1)/(x + 1)``."""
    guard = default_guard() if guard is None else guard
    x = as_point(beta).x
    _check(x + 1, "i beta + pi", guard)
    return (x - 1) / (x + 1)


def b_r_trig(beta, r, guard=None):
    """``(b_r^+, b_r^-)`` from the cosine/sine quotients."""
    guard = default_guard() if guard is None else guard
    beta = as_point(beta).beta
    num = (1j * beta - math.pi) / (2 * r)
    den = (1j * beta + math.pi) / (2 * r)
    cden, sden = cmath.cos(den), cmath.sin(den)
    _check(cden, "cos((pi + i beta)/2r)", guard)
    _check(sden, "sin((pi + i beta)/2r)", guard)
    return cmath.cos(num) / cden, cmath.sin(num) / sden


def b_r_gamma1(beta, r, guard=None):
    """``(b_r^+, b_r^-)`` from the Gamma_1 quotients of period ``2r``."""
    x = as_point(beta).x
    w = 2 * r
    bp = gamma1_ratio(r + x + 1, r + x - 1, w, guard) * gamma1_ratio(r - x - 1, r - x + 1, w, guard)
    bm = gamma1_ratio(x + 1, x - 1, w, guard) * gamma1_ratio(w - x - 1, w - x + 1, w, guard)
    return bp, bm


def _v6_entries(beta, r, guard):
    beta = as_point(beta).beta
    den = cmath.sin((math.pi + 1j * beta) / r)
    _check(den, "sin((pi + i beta)/r)", guard)
    return cmath.sin(1j * beta / r) / den, math.sin(math.pi / r) / den


def _unnormalized(kind, beta, p):
    beta = as_point(beta)
    if kind is RKind.DY:
        return build_M(MDescriptor(1, b_dy(beta, p.guard)))
    if kind is RKind.V6:
        return build_M(MDescriptor(*b_r_trig(beta, p.r, p.guard)))
    if kind is RKind.F:
        diag, off = _v6_entries(beta, p.r, p.guard)
        e = cmath.exp(beta.beta / p.r)
        m = np.zeros((4, 4), dtype=complex)
        m[0, 0] = m[3, 3] = 1
        m[1, 1] = m[2, 2] = diag
        m[1, 2] = e * off
        m[2, 1] = off / e
        return m
    if kind is RKind.V8:
        r = p.r
        ib = 1j * beta.beta
        c_half, s_half = math.cos(math.pi / (2 * r)), math.sin(math.pi / (2 * r))
        cb, sb = cmath.cos(ib / (2 * r)), cmath.sin(ib / (2 * r))
        cd, sd = cmath.cos((math.pi + ib) / (2 * r)), cmath.sin((math.pi + ib) / (2 * r))
        _check(cd, "cos((pi + i beta)/2r)", p.guard)
        _check(sd, "sin((pi + i beta)/2r)", p.guard)
        corner = cb * c_half / cd
        anti = -sb * s_half / cd
        m = np.zeros((4, 4), dtype=complex)
        m[0, 0] = m[3, 3] = corner
        m[0, 3] = m[3, 0] = anti
        m[1, 1] = m[2, 2] = sb * c_half / sd
        m[1, 2] = m[2, 1] = cb * s_half / sd
        return m
    raise ValueError(kind)


def normalization(kind, beta, p, q=None):
    """Scalar prefactor of ``r_matrix``: rho for DY, rho_r for the deformed kinds."""
    if kind is RKind.DY:
        return rho_dy(beta, p.guard)
    return rho_r(beta, p.r, q, p.guard)


def r_matrix(kind, beta, p=None, normalized=True, q=None):
    """The 4x4 R-matrix of ``kind`` at rapidity ``beta``."""
    kind = RKind.parse(kind)
    p = DeformationParams() if p is None else p
    p.require_level_zero()
    m = _unnormalized(kind, beta, p)
    if normalized:
        m = normalization(kind, beta, p, q) * m
    return m


# ---------------------------------------------------------------------------
# Gauge matrices


def gauge_V():
    return np.array([[1, 1], [-1, 1]], dtype=complex) / math.sqrt(2)


def gauge_K():
    v = gauge_V()
    return np.kron(v, v)


def gauge_Vprime(beta, p):
    beta = as_point(beta).beta
    e = cmath.exp(beta / (2 * p.r))
    return np.diag([e, 1 / e])


def gauge_K6(beta1, beta2, p):
    """``K^(6)_12(beta1, beta2) = V'(beta1) (x) V'(beta2)``."""
    return np.kron(gauge_Vprime(beta1, p), gauge_Vprime(beta2, p))


# ---------------------------------------------------------------------------
# Twist


def twist_M(beta, r, guard=None):
    """M-descriptor of the twist: Gamma_1 quotients of period ``2r``."""
    x = as_point(beta).x
    w = 2 * r
    return MDescriptor(
        gamma1_ratio(x + r - 1, x + r + 1, w, guard),
        gamma1_ratio(x + 2 * r - 1, x + 2 * r + 1, w, guard),
    )


def twist_F_closed(beta, p=None, q=None):
    """``F_12(beta) = rho_F(beta) M(Gamma_1 quotients)``."""
    p = DeformationParams() if p is None else p
    return rho_F(beta, p.r, q, p.guard) * build_M(twist_M(beta, p.r, p.guard))


def twist_F21(beta, p=None, q=None):
    return flip_conj(twist_F_closed(beta, p, q))
