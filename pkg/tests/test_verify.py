import json
import math

import numpy as np
import pytest

from dytwist.errors import NotRepresentable, PoleProximity
from dytwist.rmat import D1, D1_INV, DeformationParams, gauge_K, gauge_K6, r_matrix, sup_norm, twist_F_closed
from dytwist.specfun import rho_dy, rho_F, rho_r
from dytwist.verify import (
    SUITE_ALL,
    CheckResult,
    SampleSpec,
    check_difference_equation,
    check_gauge_f,
    check_gauge_v8,
    check_rho_factorization,
    check_special_function,
    check_twist_relation,
    check_unitarity,
    check_ybe,
    degeneration_study,
    draw_sample,
    expand_identities,
    fit_order,
    run_suite,
    summarize,
    unitarity_scalar,
)


def P(r):
    return DeformationParams(r=r)


# --- YBE ---------------------------------------------------------------------


def test_ybe_dy_example():
    assert check_ybe("dy", 1.2, 0.4, -0.7).residual < 1e-10


def test_ybe_v8_example():
    assert check_ybe("v8", 1.0, 0.2, -0.5, P(7.0)).residual < 1e-9


@pytest.mark.parametrize("kind", ["dy", "v6", "v8", "f"])
def test_ybe_coinciding_rapidities_is_a_pole(kind):
    with pytest.raises(PoleProximity):
        check_ybe(kind, 0.5, 0.5, -0.3, P(5.0))


def test_ybe_central_charge_not_representable():
    with pytest.raises(NotRepresentable):
        check_ybe("v6", 1.0, 0.2, -0.5, DeformationParams(r=5.0, c=0.5))


@pytest.mark.parametrize("eps", [1e-6, 1e-4])
def test_ybe_residual_tracks_perturbation(eps):
    res = check_ybe("v6", 1.2, 0.4, -0.7, P(5.0), perturbation=(1, 2, eps)).residual
    assert res >= eps / 10
    assert res <= 10 * eps


def test_ybe_wrong_ordering_is_detected():
    # the relation fails if R13 and R23 rapidities are swapped
    from dytwist.verify import embed_12, embed_13, embed_23

    r = lambda b: r_matrix("dy", b)  # noqa: E731
    lhs = embed_12(r(0.8)) @ embed_13(r(1.9)) @ embed_23(r(1.1))
    rhs = embed_23(r(1.1)) @ embed_13(r(0.3)) @ embed_12(r(0.8))
    assert sup_norm(lhs - rhs) / sup_norm(lhs) > 1e-3


# --- twist / difference ------------------------------------------------------


def test_twist_relation_example():
    res = check_twist_relation(1.1, 0.3, P(6.0))
    assert res.passed and res.residual < 1e-7
    # flip-free variant recorded as a diagnostic
    swap = [d for d in res.diagnostics if d.startswith("flip-free")]
    assert swap and float(swap[0].split("=")[1]) < 1e-7


def test_twist_relation_fails_for_wrong_twist():
    p = P(6.0)
    beta = 0.8
    lhs = r_matrix("v6", beta, p)
    wrong = twist_F_closed(beta, p) @ r_matrix("dy", beta) @ np.linalg.inv(twist_F_closed(beta, p))
    assert sup_norm(lhs - wrong) / sup_norm(lhs) > 1e-3


def test_large_r_v6_close_to_dy():
    p = P(1e4)
    for beta in (0.5, 1.0 + 0.3j, -2.0):
        dy = r_matrix("dy", beta)
        assert sup_norm(r_matrix("v6", beta, p) - dy) / sup_norm(dy) < 1e-3


def test_difference_equation_example():
    assert check_difference_equation(1.4 + 0.2j, P(5.0)).residual < 1e-7


def test_difference_equation_iterated():
    assert check_difference_equation(1.4 + 0.2j, P(5.0), iterations=2).residual < 1e-6
    with pytest.raises(ValueError):
        check_difference_equation(1.0, P(5.0), iterations=3)


def test_difference_equation_detects_missing_tau():
    p = P(5.0)
    beta = 1.4 + 0.2j
    sh = beta - 1j * math.pi * p.r
    lhs = twist_F_closed(sh, p)
    untwisted = twist_F_closed(beta, p) @ r_matrix("dy", sh)
    assert sup_norm(lhs - untwisted) / sup_norm(lhs) > 1e-3
    assert sup_norm(D1 @ D1_INV - np.eye(4)) == 0


def _large_r_difference_devs():
    p = P(1e3)
    beta = 1.0 + 0.2j
    sh = beta - 1j * math.pi * p.r
    ref = r_matrix("dy", sh)
    lhs = twist_F_closed(sh, p)
    rhs = D1_INV @ twist_F_closed(beta, p) @ D1 @ ref
    return [sup_norm(m - ref) / sup_norm(ref) for m in (lhs, rhs)]


@pytest.mark.xfail(strict=True, reason="F - Id decays like ln(r)/(2r): 3.2e-3 at r = 1000")
def test_difference_equation_sides_near_dy_at_r1000():
    assert max(_large_r_difference_devs()) < 1e-3


def test_difference_equation_sides_near_dy_at_r1000_measured():
    devs = _large_r_difference_devs()
    assert all(2.5e-3 < d < 4e-3 for d in devs)


# --- gauges ------------------------------------------------------------------


def test_gauge_v8_example():
    assert check_gauge_v8(0.9, P(4.0)).residual < 1e-12


def test_gauge_v8_unnormalized_at_zero():
    assert check_gauge_v8(0.0, P(5.0), normalized=False).residual < 1e-14


def test_gauge_K_orthogonal():
    k = gauge_K()
    assert sup_norm(k @ k.T - np.eye(4)) < 1e-15


def test_gauge_f_example():
    assert check_gauge_f(1.3, 0.4, P(6.0)).residual < 1e-12


def test_gauge_f_coincident_point():
    with pytest.raises(PoleProximity):
        check_gauge_f(0.7, 0.7, P(6.0))
    assert check_gauge_f(0.7, 0.7, P(6.0), normalized=False).residual < 1e-14


def test_gauge_f_literal_leg_order_does_not_hold():
    # (V'(b2) (x) V'(b1)) acting without the leg exchange misses R_F
    p = P(6.0)
    b1, b2 = 1.3, 0.4
    literal = gauge_K6(b2, b1, p) @ r_matrix("v6", b1 - b2, p) @ np.linalg.inv(gauge_K6(b1, b2, p))
    rf = r_matrix("f", b1 - b2, p)
    assert sup_norm(rf - literal) / sup_norm(rf) > 0.1


def test_gauge_f_large_r():
    p = P(1e3)
    v6 = r_matrix("v6", 1.0, p)
    assert sup_norm(r_matrix("f", 1.0, p) - v6) / sup_norm(v6) < 1e-3


# --- unitarity ---------------------------------------------------------------


def test_unitarity_scalar_is_reflection_formula():
    for beta in (1.3 + 0.2j, 0.6, -2.1 + 0.4j):
        assert abs(unitarity_scalar(beta) - rho_dy(beta) * rho_dy(-beta)) < 1e-12 * abs(unitarity_scalar(beta))


def test_unitarity_examples():
    assert check_unitarity("dy", 1.3 + 0.2j).residual < 1e-11
    assert check_unitarity("v6", 0.6, P(5.0)).residual < 1e-7
    for kind in ("dy", "v6", "v8", "f"):
        assert check_unitarity(kind, 0.9 - 0.3j, P(5.0), normalized=False).residual < 1e-14


def test_unitarity_at_zero_raises():
    with pytest.raises(PoleProximity):
        check_unitarity("dy", 0.0)


# --- scalar factorisation ----------------------------------------------------


def test_rho_factorization_example():
    assert check_rho_factorization(0.8 + 0.1j, P(7.0)).residual < 1e-7
    assert check_rho_factorization(-(0.8 + 0.1j), P(7.0)).residual < 1e-7


def test_rho_factorization_large_r_magnitudes():
    beta = 0.8 + 0.1j
    assert abs(rho_r(beta, 1e3) - rho_dy(beta)) < 1e-3
    # rho_F approaches 1 only like (ln r)/(2r), about 3.5e-3 here
    for b in (beta, -beta):
        dev = abs(rho_F(b, 1e3) - 1)
        assert abs(dev - math.log(1e3) / 2e3) < 5e-4
    assert check_rho_factorization(beta, P(1e3)).residual < 1e-7


@pytest.mark.xfail(strict=True, reason="rho_F - 1 decays like ln(r)/(2r): 3.5e-3 at r = 1000")
def test_rho_F_factors_within_1e3_at_r1000():
    beta = 0.8 + 0.1j
    assert max(abs(rho_F(b, 1e3) - 1) for b in (beta, -beta)) < 1e-3


# --- special functions -------------------------------------------------------


@pytest.mark.parametrize(
    "ident", ["gamma1_ladder", "gamma2_ladder", "s2_reflection", "s2_shift1", "s2_shift2", "s2_period_symmetry"]
)
def test_special_function_checks(ident):
    from dytwist.specfun import Periods

    res = check_special_function(f"sf:{ident}", 0.6 + 0.2j, Periods(1.3, 2.2), y=0.9 - 0.1j)
    assert res.passed, res


# --- suites ------------------------------------------------------------------


def test_sample_spec_rejects_zero_count():
    with pytest.raises(ValueError):
        SampleSpec(count=0)


def test_samples_avoid_pole_strips():
    spec = SampleSpec(count=30, seed=4)
    for i in range(spec.count):
        (b1, b2, b3), r = draw_sample(spec, i)
        assert spec.r_range[0] <= r <= spec.r_range[1]
        for d in (b1, b1 - b2, b1 - b3, b2 - b3):
            assert max(abs(d.real), abs(d.imag)) >= spec.exclusion


def test_run_suite_example():
    res = run_suite(SampleSpec(count=50, seed=1), ["ybe:dy"])
    assert len(res) == 50
    assert all(r.passed for r in res)


def test_run_suite_deterministic():
    spec = SampleSpec(count=6, seed=11)
    a = [json.dumps(r.to_dict(), sort_keys=True) for r in run_suite(spec, ["all"])]
    b = [json.dumps(r.to_dict(), sort_keys=True) for r in run_suite(spec, ["all"])]
    assert a == b


def test_run_suite_parallel_matches_serial():
    spec = SampleSpec(count=4, seed=2)
    serial = [r.residual for r in run_suite(spec, ["twist", "difference"])]
    parallel = [r.residual for r in run_suite(spec, ["twist", "difference"], workers=3)]
    assert serial == parallel


def test_run_suite_records_poles_as_skips():
    spec = SampleSpec(count=2, seed=1)
    res = run_suite(spec, ["unitarity:dy"])
    assert all(not r.skipped for r in res)
    # a forced pole surfaces as a skip rather than an exception
    from dytwist import verify

    orig = verify.draw_sample
    try:
        verify.draw_sample = lambda s, i: ((0j, 0j, 1 + 0j), orig(s, i)[1])
        res = run_suite(spec, ["unitarity:dy", "twist"])
    finally:
        verify.draw_sample = orig
    assert all(r.skipped and r.status == "skip" for r in res)
    assert summarize(res)["skip"] == len(res)


def test_expand_identities():
    assert expand_identities(["all"]) == list(SUITE_ALL)
    assert len(expand_identities(["sf"])) == 6
    with pytest.raises(ValueError):
        expand_identities(["nonsense"])


def test_check_result_invariant():
    r = CheckResult("x", {}, 1e-9, 1e-8, True)
    assert r.status == "pass"
    assert CheckResult("x", {}, 1e-7, 1e-8, False).status == "fail"


def test_fit_order_recovers_power_law():
    rs = [16, 32, 64, 128]
    assert abs(fit_order(rs, [3.0 / r for r in rs]) - 1) < 1e-12
    assert abs(fit_order(rs, [3.0 / r**2 for r in rs]) - 2) < 1e-12


def test_degeneration_study_columns():
    rows = degeneration_study(1.0, [16, 32, 64])
    assert [row["r"] for row in rows] == [16.0, 32.0, 64.0]
    fd = [row["F_minus_id"] for row in rows]
    rd = [row["RV6_minus_RDY"] for row in rows]
    assert fd[0] > fd[1] > fd[2]
    assert rd[0] > rd[1] > rd[2]
