"""Identity checkers returning CheckResult records, and a seeded suite runner."""

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DytwistError, PoleProximity, QuadratureFailure
from .rmat import (
    D1,
    D1_INV,
    FLIP,
    ID2,
    ID4,
    DeformationParams,
    RKind,
    flip_conj,
    gauge_K,
    gauge_K6,
    r_matrix,
    sup_norm,
    twist_F_closed,
)
from .specfun import (
    Periods,
    as_point,
    double_sine,
    gamma1_ratio,
    log_gamma1,
    log_gamma2,
    rho_dy,
    rho_F,
    rho_r,
)

DEFAULT_TOLERANCES = {
    "ybe": 1e-9,
    "twist": 1e-7,
    "difference": 1e-7,
    "difference2": 1e-6,
    "gauge_v8": 1e-12,
    "gauge_f": 1e-12,
    "rho_factorization": 1e-7,
    "unitarity:dy": 1e-11,
    "unitarity": 1e-7,
    "unitarity_m": 1e-14,
    "sf:gamma1_ladder": 1e-12,
    "sf": 1e-8,
}

KINDS = (RKind.DY, RKind.V6, RKind.V8, RKind.F)

SUITE_ALL = (
    "ybe:dy",
    "ybe:v6",
    "ybe:v8",
    "ybe:f",
    "twist",
    "difference",
    "gauge_v8",
    "gauge_f",
    "rho_factorization",
)

SF_IDENTITIES = (
    "sf:gamma1_ladder",
    "sf:gamma2_ladder",
    "sf:s2_reflection",
    "sf:s2_shift1",
    "sf:s2_shift2",
    "sf:s2_period_symmetry",
)

KNOWN_IDENTITIES = (
    SUITE_ALL
    + ("difference2",)
    + tuple(f"unitarity:{k.value}" for k in KINDS)
    + tuple(f"unitarity_m:{k.value}" for k in KINDS)
    + SF_IDENTITIES
)


def default_tolerance(identity_id):
    if identity_id in DEFAULT_TOLERANCES:
        return DEFAULT_TOLERANCES[identity_id]
    head = identity_id.split(":")[0]
    if identity_id.startswith("sf:"):
        return DEFAULT_TOLERANCES["sf"]
    return DEFAULT_TOLERANCES[head]


@dataclass
class CheckResult:
    identity_id: str
    params: dict
    residual: float | None
    tolerance: float
    passed: bool
    skipped: bool = False
    diagnostics: list = field(default_factory=list)

    def __post_init__(self):
        if self.residual is not None and not self.residual >= 0:
            if not math.isnan(self.residual):
                raise ValueError("residual must be non-negative")

    @property
    def status(self):
        if self.skipped:
            return "skip"
        return "pass" if self.passed else "fail"

    def to_dict(self):
        d = asdict(self)
        d["status"] = self.status
        return d


def _result(identity_id, params, residual, tolerance, diagnostics=()):
    residual = float(residual)
    passed = bool(residual <= tolerance)
    return CheckResult(identity_id, params, residual, tolerance, passed, False, list(diagnostics))


def _cplx(z):
    z = complex(z)
    return [z.real, z.imag]


def _rel(a, b):
    """Relative sup-norm residual ``|a - b| / |a|`` for scalars or matrices."""
    return sup_norm(np.asarray(a) - np.asarray(b)) / sup_norm(np.asarray(a))


def _params(p, **betas):
    out = {k: _cplx(as_point(v).beta) for k, v in betas.items()}
    out["r"] = p.r
    return out


def _p(p):
    p = DeformationParams() if p is None else p
    p.require_level_zero()
    return p


# ---------------------------------------------------------------------------
# Matrix identities


def embed_12(m):
    return np.kron(m, ID2)


def embed_23(m):
    return np.kron(ID2, m)


def embed_13(m):
    p23 = np.kron(ID2, FLIP)
    return p23 @ embed_12(m) @ p23


def check_ybe(kind, beta1, beta2, beta3, p=None, q=None, tolerance=None, perturbation=None):
    """R12 R13 R23 = R23 R13 R12 on (C^2)^{(x)3}.

    ``perturbation = (i, j, eps)`` multiplies entry ``(i, j)`` of the R12 factor
    by ``1 + eps`` on both sides; used to show the residual is sensitive.
    """
    kind = RKind.parse(kind)
    p = _p(p)
    b1, b2, b3 = (as_point(b).beta for b in (beta1, beta2, beta3))
    r12 = r_matrix(kind, b1 - b2, p, q=q)
    r13 = r_matrix(kind, b1 - b3, p, q=q)
    r23 = r_matrix(kind, b2 - b3, p, q=q)
    if perturbation is not None:
        i, j, eps = perturbation
        r12 = r12.copy()
        r12[i, j] *= 1 + eps
    lhs = embed_12(r12) @ embed_13(r13) @ embed_23(r23)
    rhs = embed_23(r23) @ embed_13(r13) @ embed_12(r12)
    tol = default_tolerance("ybe") if tolerance is None else tolerance
    return _result(f"ybe:{kind.value}", _params(p, beta1=b1, beta2=b2, beta3=b3), _rel(lhs, rhs), tol)


def check_twist_relation(beta1, beta2, p=None, q=None, tolerance=None):
    """R_V6(beta) = F21(-beta) R_DY(beta) F12(beta)^{-1} at beta = beta1 - beta2."""
    p = _p(p)
    b1, b2 = as_point(beta1).beta, as_point(beta2).beta
    beta = b1 - b2
    f12 = twist_F_closed(beta, p, q)
    f12_minus = twist_F_closed(-beta, p, q)
    f21_minus = flip_conj(f12_minus)
    r_dy = r_matrix(RKind.DY, beta, p)
    lhs = r_matrix(RKind.V6, beta, p, q=q)
    core = r_dy @ np.linalg.inv(f12)
    rhs = f21_minus @ core
    swapped = f12_minus @ core
    diag = [
        f"cond(F12) = {np.linalg.cond(f12):.3e}",
        f"flip-free variant residual = {_rel(lhs, swapped):.3e}",
    ]
    tol = default_tolerance("twist") if tolerance is None else tolerance
    return _result("twist", _params(p, beta1=b1, beta2=b2), _rel(lhs, rhs), tol, diag)


def check_difference_equation(beta, p=None, q=None, tolerance=None, iterations=1):
    """F(beta - i pi r) = D1^{-1} F(beta) D1 R_DY(beta - i pi r), optionally iterated twice."""
    p = _p(p)
    beta = as_point(beta).beta
    step = 1j * math.pi * p.r
    f0 = twist_F_closed(beta, p, q)
    if iterations == 1:
        lhs = twist_F_closed(beta - step, p, q)
        rhs = D1_INV @ f0 @ D1 @ r_matrix(RKind.DY, beta - step, p)
        identity_id = "difference"
    elif iterations == 2:
        lhs = twist_F_closed(beta - 2 * step, p, q)
        d2, d2_inv = D1 @ D1, D1_INV @ D1_INV
        rhs = (
            d2_inv @ f0 @ d2
            @ D1_INV @ r_matrix(RKind.DY, beta - step, p) @ D1
            @ r_matrix(RKind.DY, beta - 2 * step, p)
        )
        identity_id = "difference2"
    else:
        raise ValueError("iterations must be 1 or 2")
    tol = default_tolerance(identity_id) if tolerance is None else tolerance
    return _result(identity_id, _params(p, beta=beta), _rel(lhs, rhs), tol)


def check_gauge_v8(beta, p=None, q=None, tolerance=None, normalized=True):
    """R_V8 = K21 R_V6 K12^{-1} with K = V (x) V and K21 = P K P."""
    p = _p(p)
    beta = as_point(beta).beta
    k12 = gauge_K()
    k21 = flip_conj(k12)
    r6 = r_matrix(RKind.V6, beta, p, normalized=normalized, q=q)
    r8 = r_matrix(RKind.V8, beta, p, normalized=normalized, q=q)
    rhs = k21 @ r6 @ np.linalg.inv(k12)
    tol = default_tolerance("gauge_v8") if tolerance is None else tolerance
    return _result("gauge_v8", _params(p, beta=beta), _rel(r8, rhs), tol)


def check_gauge_f(beta1, beta2, p=None, q=None, tolerance=None, normalized=True):
    """R_F(b1 - b2) = K21(b2, b1) R_V6(b1 - b2) K12(b1, b2)^{-1}, K = V'(.) (x) V'(.).

    ``K21(b2, b1)`` is ``K12(b2, b1)`` with its tensor legs exchanged, i.e.
    ``P (V'(b2) (x) V'(b1)) P``.
    """
    p = _p(p)
    b1, b2 = as_point(beta1).beta, as_point(beta2).beta
    k12 = gauge_K6(b1, b2, p)
    k21 = flip_conj(gauge_K6(b2, b1, p))
    r6 = r_matrix(RKind.V6, b1 - b2, p, normalized=normalized, q=q)
    rf = r_matrix(RKind.F, b1 - b2, p, normalized=normalized, q=q)
    rhs = k21 @ r6 @ np.linalg.inv(k12)
    tol = default_tolerance("gauge_f") if tolerance is None else tolerance
    return _result("gauge_f", _params(p, beta1=b1, beta2=b2), _rel(rf, rhs), tol)


def unitarity_scalar(beta):
    """``rho(beta) rho(-beta) = coth(beta/2)^2`` (from Gamma(z)Gamma(1-z) = pi/sin(pi z))."""
    return 1 / cmath.tanh(as_point(beta).beta / 2) ** 2


def check_unitarity(kind, beta, p=None, q=None, tolerance=None, normalized=True):
    """R(beta) P R(-beta) P = s Id with s = coth^2(beta/2), or s = 1 unnormalized."""
    kind = RKind.parse(kind)
    p = _p(p)
    beta = as_point(beta).beta
    if beta == 0:
        raise PoleProximity("unitarity needs beta != 0")
    plus = r_matrix(kind, beta, p, normalized=normalized, q=q)
    minus = r_matrix(kind, -beta, p, normalized=normalized, q=q)
    prod = plus @ flip_conj(minus)
    scalar = unitarity_scalar(beta) if normalized else 1.0
    residual = sup_norm(prod - scalar * ID4) / abs(scalar)
    identity_id = f"unitarity:{kind.value}" if normalized else f"unitarity_m:{kind.value}"
    if tolerance is None:
        tolerance = default_tolerance(identity_id) if normalized else DEFAULT_TOLERANCES["unitarity_m"]
    return _result(identity_id, _params(p, beta=beta), residual, tolerance)


def check_rho_factorization(beta, p=None, q=None, tolerance=None):
    """rho_r(beta) = rho_F(-beta) rho(beta) / rho_F(beta)."""
    p = _p(p)
    beta = as_point(beta).beta
    lhs = rho_r(beta, p.r, q, p.guard)
    rhs = rho_F(-beta, p.r, q, p.guard) * rho_dy(beta, p.guard) / rho_F(beta, p.r, q, p.guard)
    tol = default_tolerance("rho_factorization") if tolerance is None else tolerance
    return _result("rho_factorization", _params(p, beta=beta), abs(lhs - rhs) / abs(lhs), tol)


# ---------------------------------------------------------------------------
# Special-function functional equations


def check_special_function(identity_id, x, periods, y=None, q=None, tolerance=None):
    """Functional equations of Gamma_1, Gamma_2 and S_2 at ``x`` (and ``y`` for the Gamma_2 ladder)."""
    w1, w2 = periods.omega1, periods.omega2
    x = complex(x)
    if identity_id == "sf:gamma1_ladder":
        residual = abs(gamma1_ratio(x + w1, x, w1) - x) / abs(x)
    elif identity_id == "sf:gamma2_ladder":
        y = complex(y)
        lhs = (log_gamma2(x + w1, periods, q) - log_gamma2(x, periods, q)) - (
            log_gamma2(y + w1, periods, q) - log_gamma2(y, periods, q)
        )
        rhs = log_gamma1(y, w2) - log_gamma1(x, w2)
        residual = abs(cmath.exp(lhs - rhs) - 1)
    elif identity_id == "sf:s2_reflection":
        residual = abs(double_sine(x, periods, q) * double_sine(w1 + w2 - x, periods, q) - 1)
    elif identity_id == "sf:s2_shift1":
        lhs = double_sine(x + w1, periods, q)
        rhs = double_sine(x, periods, q) / (2 * cmath.sin(math.pi * x / w2))
        residual = abs(lhs - rhs) / abs(lhs)
    elif identity_id == "sf:s2_shift2":
        lhs = double_sine(x + w2, periods, q)
        rhs = double_sine(x, periods, q) / (2 * cmath.sin(math.pi * x / w1))
        residual = abs(lhs - rhs) / abs(lhs)
    elif identity_id == "sf:s2_period_symmetry":
        lhs = double_sine(x, periods, q)
        residual = abs(lhs - double_sine(x, periods.swapped(), q)) / abs(lhs)
    else:
        raise ValueError(f"unknown special-function identity {identity_id!r}")
    params = {"x": _cplx(x), "omega1": _cplx(w1), "omega2": _cplx(w2)}
    if y is not None:
        params["y"] = _cplx(y)
    tol = default_tolerance(identity_id) if tolerance is None else tolerance
    return _result(identity_id, params, residual, tol)


# ---------------------------------------------------------------------------
# Sampling and suites


@dataclass(frozen=True)
class SampleSpec:
    count: int
    seed: int = 1
    beta_re_range: tuple = (-4.0, 4.0)
    beta_im_range: tuple = (-1.0, 1.0)
    r_range: tuple = (3.0, 50.0)
    exclusion: float = 0.05

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("sample count must be >= 1")
        for lo, hi in (self.beta_re_range, self.beta_im_range, self.r_range):
            if not lo <= hi:
                raise ValueError("empty sampling interval")
        if self.r_range[0] <= 0:
            raise ValueError("r range must be positive")


def _near_pole(beta, eps):
    """Rapidity within the exclusion strip of the coincident-point pole beta = 0."""
    return abs(beta.real) < eps and abs(beta.imag) < eps


def draw_sample(spec, index):
    """Deterministic sample ``index`` of ``spec``: three rapidities and an r.

    Each index owns its own generator, so samples do not depend on evaluation
    order.  Rapidities whose pairwise differences fall in the exclusion strip
    around ``beta = 0`` are redrawn.
    """
    rng = np.random.default_rng([spec.seed, index])
    while True:
        re = rng.uniform(*spec.beta_re_range, size=3)
        im = rng.uniform(*spec.beta_im_range, size=3)
        r = float(rng.uniform(*spec.r_range))
        b = re + 1j * im
        diffs = (b[0], b[0] - b[1], b[0] - b[2], b[1] - b[2])
        if not any(_near_pole(complex(d), spec.exclusion) for d in diffs):
            return tuple(complex(v) for v in b), r


def draw_sf_sample(spec, index):
    """Periods and arguments for the special-function identities.

    ``x`` and ``y`` are drawn so that ``x``, ``x + omega_k`` and ``y + omega_1``
    all lie in the quadrature strip, i.e. both sides of every ladder are
    computed by quadrature rather than by the shift relations.
    """
    rng = np.random.default_rng([spec.seed, index, 7])
    w1 = float(rng.uniform(1.5, 3.0))
    w2 = float(rng.uniform(3.0, 6.0))
    lo = 0.25 * w1 + 0.05
    x = complex(rng.uniform(lo, w1 - lo), rng.uniform(-1.0, 1.0))
    y = complex(rng.uniform(lo, w1 - lo), rng.uniform(-1.0, 1.0))
    return Periods(w1, w2), x, y


def _one(identity_id, spec, index, tolerances, q):
    b, r = draw_sample(spec, index)
    p = DeformationParams(r=r)
    tol = tolerances.get(identity_id)
    if identity_id.startswith("ybe:"):
        return check_ybe(identity_id[4:], b[0], b[1], b[2], p, q, tol)
    if identity_id == "twist":
        return check_twist_relation(b[0], b[1], p, q, tol)
    if identity_id == "difference":
        return check_difference_equation(b[0], p, q, tol)
    if identity_id == "difference2":
        return check_difference_equation(b[0], p, q, tol, iterations=2)
    if identity_id == "gauge_v8":
        return check_gauge_v8(b[0], p, q, tol)
    if identity_id == "gauge_f":
        return check_gauge_f(b[0], b[1], p, q, tol)
    if identity_id == "rho_factorization":
        return check_rho_factorization(b[0], p, q, tol)
    if identity_id.startswith("unitarity:"):
        return check_unitarity(identity_id[10:], b[0], p, q, tol)
    if identity_id.startswith("unitarity_m:"):
        return check_unitarity(identity_id[12:], b[0], p, q, tol, normalized=False)
    if identity_id.startswith("sf:"):
        periods, x, y = draw_sf_sample(spec, index)
        return check_special_function(identity_id, x, periods, y, q, tol)
    raise ValueError(f"unknown identity {identity_id!r}")


def expand_identities(identities):
    out = []
    for ident in identities:
        if ident == "all":
            out.extend(SUITE_ALL)
        elif ident == "sf":
            out.extend(SF_IDENTITIES)
        elif ident == "ybe":
            out.extend(f"ybe:{k.value}" for k in KINDS)
        elif ident in ("unitarity", "unitarity_m"):
            out.extend(f"{ident}:{k.value}" for k in KINDS)
        elif ident in KNOWN_IDENTITIES:
            out.append(ident)
        else:
            raise ValueError(f"unknown identity {ident!r}")
    return out


def run_suite(spec, identities, tolerances=None, q=None, workers=1):
    """Run every identity on ``spec.count`` samples.

    Results come back ordered by identity then sample index whatever
    ``workers`` is.  A sample that lands on a pole or fails its quadrature is
    recorded as a skip rather than aborting the sweep.
    """
    tolerances = dict(tolerances or {})
    jobs = [(ident, i) for ident in expand_identities(identities) for i in range(spec.count)]

    def work(job):
        ident, i = job
        try:
            res = _one(ident, spec, i, tolerances, q)
        except (PoleProximity, QuadratureFailure) as exc:
            res = CheckResult(
                ident, {}, None, tolerances.get(ident, default_tolerance(ident)), False, True,
                [f"{type(exc).__name__}: {exc}"],
            )
        except DytwistError:
            raise
        res.params["sample"] = i
        res.params["seed"] = spec.seed
        return res

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(work, jobs))
    return [work(job) for job in jobs]


def summarize(results):
    counts = {"pass": 0, "fail": 0, "skip": 0}
    for res in results:
        counts[res.status] += 1
    return counts


# ---------------------------------------------------------------------------
# Degeneration study


def fit_order(rs, values):
    """Least-squares decay order ``k`` in ``values ~ C r^-k``."""
    slope = np.polyfit(np.log(np.asarray(rs, float)), np.log(np.asarray(values, float)), 1)[0]
    return float(-slope)


def degeneration_study(beta, rs, q=None):
    """Rows of ``||F(beta, r) - Id||`` and ``||R_V6 - R_DY||`` over the ``rs`` ladder."""
    beta = as_point(beta).beta
    r_dy = r_matrix(RKind.DY, beta, DeformationParams())
    rows = []
    for r in rs:
        p = DeformationParams(r=float(r))
        f_dev = sup_norm(twist_F_closed(beta, p, q) - ID4)
        r_dev = sup_norm(r_matrix(RKind.V6, beta, p, q=q) - r_dy)
        rows.append({"r": float(r), "F_minus_id": f_dev, "RV6_minus_RDY": r_dev})
    return rows
