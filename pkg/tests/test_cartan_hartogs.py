"""Hartogs-type extensions: series paths, reduction verdict, Einstein probe."""

import math
from fractions import Fraction

import numpy as np
import pytest

import wallachkit as wk
from wallachkit.cartan_hartogs import (
    CHDomain,
    StencilError,
    ch_assembled_series,
    thm1_threshold,
)
from wallachkit.series import max_abs_diff


def binomial_oracle(c: Fraction, m: int) -> Fraction:
    out = Fraction(1)
    for i in range(1, m + 1):
        out *= (c + i - 1)
        out /= i
    return out


# --- construction and membership ----------------------------------------------


def test_mu_einstein_values():
    assert wk.mu_einstein(wk.catalog("CH", 1)) == pytest.approx(1.0)
    assert wk.mu_einstein(wk.catalog("CH", 7)) == pytest.approx(1.0)
    assert wk.mu_einstein(wk.catalog("I", 2, 2)) == pytest.approx(0.8)
    assert wk.mu_einstein(wk.catalog("IV", 5)) == pytest.approx(5.0 / 6.0)


def test_parse_ch_spec():
    ch = wk.parse_ch_spec("CHD(I:2,2;mu=einstein)")
    assert ch.base.spec_string == "I:2,2"
    assert ch.mu == pytest.approx(0.8)
    ch = wk.parse_ch_spec("CHD(CH:1;mu=1.5)")
    assert ch.mu == 1.5
    with pytest.raises(ValueError):
        wk.parse_ch_spec("CHD(I:2,2)")
    with pytest.raises(ValueError):
        wk.parse_ch_spec("CHD(I:2,2;mu=-1)")


def test_mu_must_be_positive():
    with pytest.raises(ValueError):
        CHDomain(wk.catalog("CH", 1), 0.0)


def test_fiber_membership():
    ch = CHDomain(wk.catalog("CH", 1), 2.0)
    # N(z,z) = 0.75 at z=0.5, fiber bound is 0.75^2 = 0.5625
    inside = np.array([0.5, 0.74], dtype=complex)
    outside = np.array([0.5, 0.76], dtype=complex)
    assert wk.ch_contains(ch, inside)
    assert not wk.ch_contains(ch, outside)


def test_sample_inside():
    ch = wk.parse_ch_spec("CHD(I:2,2;mu=einstein)")
    rng = np.random.default_rng(0)
    for _ in range(100):
        zw = wk.ch_sample(ch, rng)
        assert wk.ch_contains(ch, zw)


# --- potential -------------------------------------------------------------------


def test_potential_zero_at_origin():
    ch = wk.parse_ch_spec("CHD(III:2;mu=0.7)")
    assert wk.ch_potential_eval(ch, np.zeros(4, dtype=complex)) == pytest.approx(0.0)


def test_potential_hand_value():
    ch = CHDomain(wk.catalog("CH", 1), 1.0)
    zw = np.array([0.5, 0.5], dtype=complex)
    assert wk.ch_potential_eval(ch, zw) == pytest.approx(math.log(2.0))


def test_potential_radial_in_fiber():
    ch = CHDomain(wk.catalog("I", 2, 2), 0.8)
    rng = np.random.default_rng(1)
    zw = wk.ch_sample(ch, rng)
    base = wk.ch_potential_eval(ch, zw)
    for theta in (0.7, 2.1):
        rotated = zw.copy()
        rotated[-1] *= np.exp(1j * theta)
        assert wk.ch_potential_eval(ch, rotated) == pytest.approx(base, rel=1e-13)


def test_potential_rejects_outside():
    ch = CHDomain(wk.catalog("CH", 1), 1.0)
    with pytest.raises(ValueError):
        wk.ch_potential_eval(ch, np.array([0.9, 0.9], dtype=complex))


# --- series paths -----------------------------------------------------------------


def test_direct_series_is_multinomial_kernel():
    # base CH(1), mu=1, c=1: the two-variable ball kernel 1/(1-|z|^2-|w|^2)
    ch = CHDomain(wk.catalog("CH", 1), 1.0)
    s = wk.ch_direct_series(ch, 1.0, 4)
    for j in range(5):
        for k in range(5):
            if 0 < j + k <= 4:
                expected = math.comb(j + k, k)
                assert s.coefficient((j, k), (j, k)) == pytest.approx(
                    float(expected), rel=1e-12
                ), (j, k)
    v = wk.psd_verdict(wk.graded_blocks(s))
    assert v.psd


def test_pure_fiber_diagonal_is_binomial():
    ch = CHDomain(wk.catalog("CH", 1), 1.0)
    c = Fraction(3, 2)
    s = wk.ch_direct_series(ch, float(c), 5)
    for m in range(1, 6):
        expected = float(binomial_oracle(c, m))
        assert s.coefficient((0, m), (0, m)) == pytest.approx(expected, rel=1e-12)


def test_first_order_fiber_coefficient_is_c():
    ch = CHDomain(wk.catalog("I", 2, 2), 0.8)
    s = wk.ch_direct_series(ch, 1.3, 2)
    assert s.coefficient((0, 0, 0, 0, 1), (0, 0, 0, 0, 1)) == pytest.approx(1.3)


def test_cross_path_equality_cases():
    cases = [
        ("CH:1", 1.0, 1.5),
        ("CH:1", 1.0, 0.5),
        ("I:2,2", 0.8, 1.25),
    ]
    for base_spec, mu, c in cases:
        ch = CHDomain(wk.parse_domain(base_spec), mu)
        direct = wk.ch_direct_series(ch, c, 3)
        assembled = ch_assembled_series(ch, c, 3)
        scale = max(direct.max_abs(), 1.0)
        assert max_abs_diff(direct, assembled) <= 1e-10 * scale, (base_spec, mu, c)


def test_fiber_degree_zero_structure():
    # coefficients pairing different w-degrees must vanish identically
    ch = CHDomain(wk.catalog("I", 2, 2), 0.8)
    s = wk.ch_direct_series(ch, 1.25, 3)
    b = s.basis
    bad = 0.0
    for j, k, v in s.items_full():
        if b[j].exponents[-1] != b[k].exponents[-1]:
            bad = max(bad, abs(v))
    assert bad <= 1e-13 * max(s.max_abs(), 1.0)


def test_normalization_of_extension_series():
    ch = CHDomain(wk.catalog("III", 2), 0.75)
    s = wk.ch_direct_series(ch, 1.1, 3)
    assert wk.normalization_check(s)


# --- reduction verdict and threshold ---------------------------------------------


def test_threshold_values():
    assert thm1_threshold(wk.catalog("I", 2, 2)) == pytest.approx(1.25)
    assert thm1_threshold(wk.catalog("IV", 5)) == pytest.approx(1.8)
    assert thm1_threshold(wk.catalog("CH", 3)) == 0.0
    assert thm1_threshold(wk.catalog("CH", 1)) == 0.0


def test_reduction_verdict_at_threshold():
    ch = wk.parse_ch_spec("CHD(I:2,2;mu=einstein)")
    v = wk.ch_projectively_induced(ch, 1.25)
    assert v.induced
    # c*mu = 1.0 lands exactly on the discrete endpoint at m=0
    assert v.first_failure is None
    for c in (1.0, 1.1, 1.2):
        v = wk.ch_projectively_induced(ch, c)
        assert not v.induced
        m, value = v.first_failure
        assert m == 0
        assert value == pytest.approx(0.8 * c)


def test_reduction_failure_at_positive_m():
    # c*mu already in W but (c+1)*mu falling in the gap must be caught
    ch = CHDomain(wk.catalog("I", 2, 2), 0.5)
    v = wk.ch_projectively_induced(ch, 2.0)  # m=0: 1.0 ok; m=1: 1.5 > 1 ok
    assert v.induced
    v = wk.ch_projectively_induced(ch, 1.0)  # m=0: 0.5 in the gap
    assert not v.induced
    ch2 = CHDomain(wk.catalog("III", 3), 0.25)  # W discrete {0, 0.5, 1.0}
    v = wk.ch_projectively_induced(ch2, 2.0)  # 0.5, 0.75, ...
    assert not v.induced
    assert v.first_failure == (1, pytest.approx(0.75))


def test_rank_one_always_induced():
    ch = CHDomain(wk.catalog("CH", 2), 1.0)
    for c in (0.1, 0.5, 1.0, 3.7):
        assert wk.ch_projectively_induced(ch, c).induced


def test_above_threshold_always_induced():
    for base_spec in ("I:2,2", "IV:3", "III:2"):
        base = wk.parse_domain(base_spec)
        ch = CHDomain(base, wk.mu_einstein(base))
        t = thm1_threshold(base)
        for bump in (0.0, 0.35, 1.0):
            assert wk.ch_projectively_induced(ch, t + bump).induced, (base_spec, bump)


def test_truncated_verdict_matches_closed_form():
    ch = wk.parse_ch_spec("CHD(I:2,2;mu=einstein)")
    v_true = wk.ch_truncated_verdict(ch, 1.25, 4)
    assert v_true.psd
    v_false = wk.ch_truncated_verdict(ch, 1.0, 4)
    assert not v_false.psd
    neg = [b for b in v_false.per_block if b.min_eigenvalue < -b.tol]
    assert neg, "expected an explicit negative block"


# --- Einstein probe ---------------------------------------------------------------


def test_einstein_residual_hyperbolic_plane():
    # base CH(1) with mu=1 is the two-dimensional complex hyperbolic ball;
    # for the potential -log(1 - |z|^2 - |w|^2) the Ricci matrix equals
    # -(n+1) g with n = 2 complex coordinates
    ch = CHDomain(wk.catalog("CH", 1), 1.0)
    rng = np.random.default_rng(3)
    zw = wk.ch_sample(ch, rng, z_radius_cap=0.3, w_fiber_cap=0.4)
    k, residual = wk.einstein_residual(ch, zw, step=1e-3)
    assert residual <= 1e-5
    assert k == pytest.approx(-3.0, rel=1e-4)


def test_einstein_scaling_law():
    ch = CHDomain(wk.catalog("CH", 1), 1.0)
    zw = np.array([0.2 + 0.1j, 0.25 - 0.05j])
    k1, r1 = wk.einstein_residual(ch, zw, step=1e-3)
    k2, r2 = wk.einstein_residual(ch, zw, step=1e-3, potential_scale=2.0)
    assert k2 == pytest.approx(k1 / 2.0, rel=1e-6)
    assert r2 <= 1e-5


def test_einstein_stencil_margin_enforced():
    ch = CHDomain(wk.catalog("CH", 1), 1.0)
    # fiber bound at z=0.703 is sqrt(1-0.703^2) ~ 0.71119; slack < 4*step
    near_edge = np.array([0.703, 0.709], dtype=complex)
    with pytest.raises(StencilError, match="margin"):
        wk.einstein_residual(ch, near_edge, step=1e-3)


def test_einstein_rejects_outside_point():
    ch = CHDomain(wk.catalog("CH", 1), 1.0)
    with pytest.raises(StencilError, match="outside"):
        wk.einstein_residual(ch, np.array([0.9, 0.9], dtype=complex))
