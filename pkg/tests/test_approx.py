"""Degree certificates, regime predictions, and certified polynomial export."""

import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from expcheb.approx import (
    ConstantName,
    LowerWitness,
    Regime,
    build_series,
    classify_regime,
    coefficient_bit_budget,
    degree_lower_bound,
    domain_to_unit,
    eval_cheb_series,
    eval_exported,
    eval_monomial,
    export_polynomial,
    find_degree,
    log_inv_delta,
    measure_sup_error,
    predict_degree,
    problem,
)
from expcheb.coeffs import Target, tail_bounds
from expcheb.errors import CapacityError, DomainError
from expcheb.hp import hpf
from expcheb.remez import minimax_error
from expcheb.special import saturation_constant


def _spec(target, B, delta):
    return problem(target, B, delta)


def test_problem_validation():
    with pytest.raises(DomainError):
        problem("exp-neg", 4, "1e-3")  # type: ignore[arg-type]
    with pytest.raises(DomainError):
        problem(Target.EXP_NEG, "0.5", "1e-3")
    with pytest.raises(DomainError):
        problem(Target.EXP_NEG, 4, "0")
    with pytest.raises(DomainError):
        problem(Target.EXP_NEG, 4, 1)
    with pytest.raises(DomainError):
        problem(Target.EXP_NEG, 4, "1.5")
    spec = problem(Target.EXP_NEG, "4", "1e-6")
    assert spec.B_text == "4" and spec.delta_text == "1e-6"
    assert spec.lam.to_fraction() == 2
    assert spec.bits >= 128


def test_tiny_tolerance_survives_parsing():
    spec = problem(Target.EXP_NEG, 2, "1e-300", bits=1100)
    assert 0 < spec.delta_frac < Fraction(1, 10 ** 299)
    L = log_inv_delta(spec, 128).to_float()
    assert abs(L - 300 * math.log(10)) < 1e-9


def test_classify_regime_grid():
    delta = "1e-6"
    L = 6 * math.log(10)
    for B, expect in ((1, Regime.SMALL_B), (5, Regime.CRITICAL),
                      (600, Regime.LARGE_B), (3000, Regime.HUGE_B)):
        spec = _spec(Target.EXP_NEG, B, delta)
        regime, rho = classify_regime(spec)
        assert regime is expect
        assert abs(rho.to_float() - B / (2 * L)) < 1e-12 * (1 + B)
    # the growing target saturates: never a separate huge-B regime
    regime, _ = classify_regime(_spec(Target.EXP_POS, 3000, delta))
    assert regime is Regime.LARGE_B


def test_prediction_small_B():
    spec = _spec(Target.EXP_NEG, 1, "1e-6")
    pred = predict_degree(spec)
    L = 6 * math.log(10)
    assert pred.regime is Regime.SMALL_B
    assert pred.constant_name is ConstantName.NONE
    assert abs(pred.predicted_degree.to_float() - L / math.log(L)) < 1e-9


def test_prediction_critical_matches_rate_constants():
    # at rho = 1 the decay-rate level equation pins the frozen constants
    L = 12 * math.log(10)
    spec_n = _spec(Target.EXP_NEG, 2 * L, "1e-12")
    pred_n = predict_degree(spec_n)
    assert pred_n.regime is Regime.CRITICAL
    assert pred_n.constant_name is ConstantName.NU
    nu1 = float(mpmath.mpf(oracles.GOLDEN["nu_1"]))
    assert abs(pred_n.leading_constant.to_float() - nu1) < 1e-9
    assert abs(pred_n.predicted_degree.to_float() - nu1 * L) < 1e-6

    spec_p = _spec(Target.EXP_POS, 2 * L, "1e-12")
    pred_p = predict_degree(spec_p)
    assert pred_p.constant_name is ConstantName.MU
    mu1 = float(mpmath.mpf(oracles.GOLDEN["mu_1"]))
    assert abs(pred_p.leading_constant.to_float() - mu1) < 1e-9


def test_prediction_large_B():
    spec_n = _spec(Target.EXP_NEG, 600, "1e-6")
    pred_n = predict_degree(spec_n)
    L = 6 * math.log(10)
    assert pred_n.regime is Regime.LARGE_B
    assert pred_n.constant_name is ConstantName.SQRT
    assert abs(pred_n.predicted_degree.to_float() - math.sqrt(600 * L)) < 1e-9

    spec_p = _spec(Target.EXP_POS, 600, "1e-6")
    pred_p = predict_degree(spec_p)
    zs = float(mpmath.mpf(oracles.GOLDEN["z_star"]))
    assert pred_p.constant_name is ConstantName.Z_STAR
    assert abs(pred_p.predicted_degree.to_float() - zs * 300) < 1e-9
    assert abs(pred_p.leading_constant.to_float()
               - saturation_constant(128).to_float()) < 1e-30


def test_prediction_huge_B():
    spec = _spec(Target.EXP_NEG, 3000, "1e-6")
    pred = predict_degree(spec)
    L = 6 * math.log(10)
    assert pred.regime is Regime.HUGE_B
    assert pred.constant_name is ConstantName.SQRT
    assert abs(pred.predicted_degree.to_float() - math.sqrt(3000 * L)) < 1e-9


def test_trivial_problem_certificate():
    cert = find_degree(_spec(Target.EXP_NEG, 1, "0.9"))
    assert cert.D_upper == 1
    assert cert.D_lower == 1
    assert cert.lower_witness is LowerWitness.DEFINITION


def test_critical_certificate_regression():
    # rho = 1, delta = 1e-12: the certified degree sits within 20% of the
    # rate-constant estimate nu(1) * ln(1/delta)
    L = 12 * math.log(10)
    cert = find_degree(_spec(Target.EXP_NEG, 2 * L, "1e-12"))
    assert cert.D_upper == 41
    nu1 = float(mpmath.mpf(oracles.GOLDEN["nu_1"]))
    ratio = cert.D_upper / (nu1 * L)
    assert 0.8 <= ratio <= 1.2
    assert cert.D_lower <= cert.D_upper


def test_degree_monotone_in_domain_width():
    prev = 0
    for B in (1, 2, 4, 8, 16, 32):
        cert = find_degree(_spec(Target.EXP_NEG, B, "1e-3"))
        assert cert.D_upper >= prev
        prev = cert.D_upper


def test_certificate_sandwich_against_minimax():
    cases = (
        (Target.EXP_NEG, 2, "1e-4"),
        (Target.EXP_NEG, 9, "1e-6"),
        (Target.EXP_POS, 3, "1e-5"),
    )
    for target, B, delta in cases:
        spec = _spec(target, B, delta)
        cert = find_degree(spec)
        assert 1 <= cert.D_lower <= cert.D_upper <= 40
        # the certified degree truly reaches the tolerance
        mm_up = minimax_error(spec, cert.D_upper)
        assert mm_up.to_fraction() < spec.delta_frac * Fraction(10 ** 7 + 1,
                                                                10 ** 7)
        # and the witnessed floor truly blocks smaller degrees
        mm_low = minimax_error(spec, cert.D_lower - 1)
        assert mm_low.to_fraction() > spec.delta_frac * Fraction(10 ** 7 - 1,
                                                                 10 ** 7)


def test_minimax_sits_inside_tail_bracket():
    for target, lam_f, d in ((Target.EXP_NEG, 1, 3),
                             (Target.EXP_NEG, 1, 6),
                             (Target.EXP_POS, 1.5, 5)):
        spec = _spec(target, 2 * lam_f, "1e-9")
        tb = tail_bounds(d + 1, spec.lam, target, 128)
        mm = minimax_error(spec, d).to_fraction()
        slack = Fraction(1, 10 ** 7)
        assert mm >= tb.lower.to_fraction() * (1 - slack)
        assert mm <= tb.upper.to_fraction() * (1 + slack)


def test_growth_witness_values():
    spec = _spec(Target.EXP_NEG, 60, "1e-6")
    D = degree_lower_bound(spec)
    # independent check: scaled Chebyshev growth cosh(d*acosh(x0))
    with mpmath.workdps(50):
        L = -mpmath.log(mpmath.mpf("1e-6"))
        x0 = 1 + 2 * L / (60 - L)
        thr = (1 - mpmath.mpf("1e-6")) / (2 * mpmath.mpf("1e-6"))
        assert mpmath.cosh(D * mpmath.acosh(x0)) >= thr
        assert mpmath.cosh((D - 1) * mpmath.acosh(x0)) < thr


def test_growth_witness_preconditions():
    with pytest.raises(DomainError):
        degree_lower_bound(_spec(Target.EXP_POS, 60, "1e-6"))
    with pytest.raises(DomainError):
        degree_lower_bound(_spec(Target.EXP_NEG, 60, "0.3"))
    with pytest.raises(DomainError):
        degree_lower_bound(_spec(Target.EXP_NEG, 10, "1e-6"))


def test_find_degree_uses_growth_witness():
    # shallow tolerance on a wide domain: the L2 floor dies at D = 1 but
    # Chebyshev growth still forces a nontrivial degree
    spec = _spec(Target.EXP_NEG, 100, "0.2")
    cert = find_degree(spec)
    assert cert.lower_witness is LowerWitness.CHEB_GROWTH
    assert cert.D_lower == min(degree_lower_bound(spec), cert.D_upper)
    assert cert.D_lower > 1


def test_find_degree_l2_witness():
    spec = _spec(Target.EXP_NEG, 8, "1e-3")
    cert = find_degree(spec)
    assert cert.lower_witness is LowerWitness.TAIL_L2
    assert cert.lower_value.to_fraction() >= spec.delta_frac
    # the next tail down fails, so D_lower is maximal
    nxt = tail_bounds(cert.D_lower + 1, spec.lam, spec.target, 128)
    assert nxt.lower.to_fraction() < spec.delta_frac


def test_find_degree_capacity_refusal():
    spec = _spec(Target.EXP_NEG, "1000000000", "0.5")
    with pytest.raises(CapacityError) as exc:
        find_degree(spec)
    assert "coefficients" in str(exc.value)


def test_find_degree_deterministic():
    spec = _spec(Target.EXP_POS, 7, "1e-5")
    a = find_degree(spec)
    b = find_degree(spec)
    assert (a.D_upper, a.D_lower, a.lower_witness) == \
        (b.D_upper, b.D_lower, b.lower_witness)
    assert a.tail_upper_at_D.to_fraction() == b.tail_upper_at_D.to_fraction()


def test_domain_map_endpoints():
    spec = _spec(Target.EXP_NEG, 4, "1e-3")
    z0 = hpf(0, 128)
    zB = hpf(4, 128)
    zm = hpf(2, 128)
    assert domain_to_unit(spec, z0).to_fraction() == -1
    assert domain_to_unit(spec, zB).to_fraction() == 1
    assert domain_to_unit(spec, zm).to_fraction() == 0


def test_clenshaw_matches_cosine_form():
    bits = 256
    spec = _spec(Target.EXP_NEG, 4, "1e-10")
    series = build_series(spec, 20, bits)
    import random
    rng = random.Random(11)
    for _ in range(8):
        theta = hpf(rng.uniform(0.0, math.pi), bits)
        x = theta.cos()
        direct = series.coeffs[0].value.shifted(-1)
        for v in range(1, 20):
            direct = direct + series.coeffs[v].value * (theta * v).cos()
        clen = eval_cheb_series(series, x, bits)
        assert abs((clen - direct).to_float()) < 1e-60


EXPORT_CASES = (
    (Target.EXP_NEG, 1, "1e-2"),
    (Target.EXP_NEG, 4, "1e-6"),
    (Target.EXP_NEG, 40, "1e-2"),
    (Target.EXP_NEG, 120, "0.3"),     # order-of-magnitude regime, desk scale
    (Target.EXP_POS, 2, "1e-5"),
    (Target.EXP_POS, 12, "1e-3"),
    (Target.EXP_POS, 60, "0.5"),      # saturated growth, degree ~ z* B / 2
)


@pytest.mark.parametrize("target,B,delta", EXPORT_CASES)
def test_export_soundness(target, B, delta):
    spec = _spec(target, B, delta)
    cert = find_degree(spec)
    poly = export_polynomial(spec, cert)
    assert poly.degree == cert.D_upper
    assert len(poly.monomial_form) == poly.degree + 1
    assert len(poly.cheb_form.coeffs) == poly.degree + 1
    certified = poly.certified_sup_bound.to_fraction()
    assert certified < spec.delta_frac
    assert poly.rounding_bound.to_fraction() <= spec.delta_frac / 4
    cap = coefficient_bit_budget(poly.degree)
    for c in poly.monomial_form:
        assert abs(c.numerator).bit_length() <= cap
        assert c.denominator.bit_length() <= cap
    assert any(c != 0 for c in poly.monomial_form[1:])
    # observed error never exceeds the certificate (tiny slack covers the
    # evaluation rounding of the measurement itself)
    measured = measure_sup_error(poly, spec, grid_factor=8).to_fraction()
    assert measured <= certified * (1 + Fraction(1, 10 ** 25)) \
        + Fraction(1, 10 ** 25)
    # both forms hit f(0) = 1 within the certificate
    one_err = abs(eval_exported(poly, hpf(0, 192)).to_fraction() - 1)
    assert one_err <= certified + Fraction(1, 10 ** 25)
    mono_at_0 = poly.monomial_form[0]
    assert abs(mono_at_0 - 1) <= certified + Fraction(1, 10 ** 25)


def test_exported_monomial_form_tracks_target():
    spec = _spec(Target.EXP_NEG, 4, "1e-8")
    poly = export_polynomial(spec, find_degree(spec))
    wb = 256
    for k in range(9):
        z = spec.B.with_bits(wb) * hpf(Fraction(k, 8), wb)
        mv = eval_monomial(poly.monomial_form, z, wb)
        fv = (-z).exp()
        assert abs((mv - fv).to_fraction()) \
            <= poly.certified_sup_bound.to_fraction() + Fraction(1, 10 ** 25)


def test_export_rejects_foreign_certificate():
    spec_a = _spec(Target.EXP_NEG, 4, "1e-4")
    spec_b = _spec(Target.EXP_NEG, 5, "1e-4")
    cert_a = find_degree(spec_a)
    with pytest.raises(DomainError):
        export_polynomial(spec_b, cert_a)


@settings(max_examples=25, deadline=None)
@given(B=st.floats(min_value=1.0, max_value=1e6,
                   allow_nan=False, allow_infinity=False),
       log10_delta=st.floats(min_value=-30.0, max_value=-0.5))
def test_regime_rho_property(B, log10_delta):
    delta = 10.0 ** log10_delta
    spec = _spec(Target.EXP_NEG, B, delta)
    regime, rho = classify_regime(spec)
    expected = B / (2 * (-math.log(delta)))
    assert abs(rho.to_float() - expected) <= 1e-9 * max(1.0, expected)
    if expected < 0.05 - 1e-12:
        assert regime is Regime.SMALL_B
    elif 0.05 + 1e-12 < expected < 20 - 1e-9:
        assert regime is Regime.CRITICAL
