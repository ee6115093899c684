import math
from fractions import Fraction

import numpy as np
import pytest

from subgroup_expsums.errors import EmptySegment, InvalidInput, ZeroArgument
from subgroup_expsums.expsum import (
    all_exp_sums,
    build_H1,
    check_incomplete_smear,
    check_translate_inequality,
    complete_sum_bound_check,
    exp_sum,
    h1_length,
    max_nontrivial_fourier,
    translate_margins,
)
from subgroup_expsums.field_core import all_subgroups, make_field_context, segment, subgroup
from subgroup_expsums.spectrum import check_statistical_mult

F7 = make_field_context(7)
F101 = make_field_context(101)


def direct_sum(p, elements, xi):
    return sum(complex(math.cos(2 * math.pi * x * xi / p), math.sin(2 * math.pi * x * xi / p)) for x in elements)


def test_exp_sum_examples():
    assert abs(exp_sum(F7, subgroup(F7, 1), 1).value + 1) < 1e-12
    r = exp_sum(F7, subgroup(F7, 2), 1)
    assert abs(r.value - complex(-0.5, math.sqrt(7) / 2)) < 1e-12
    assert r.magnitude == pytest.approx(math.sqrt(2), abs=1e-12)
    for H in all_subgroups(F7):
        assert exp_sum(F7, H, 0).value == H.order


def test_all_exp_sums_match_direct_summation():
    ctx = make_field_context(43)
    for H in all_subgroups(ctx):
        sums = all_exp_sums(ctx, H)
        for xi in range(43):
            assert abs(sums[xi] - direct_sum(43, H.elements, xi)) < 1e-9


@pytest.mark.parametrize("p", [7, 11, 19, 23])
def test_quadratic_subgroup_magnitudes(p):
    ctx = make_field_context(p)
    mags = np.abs(all_exp_sums(ctx, subgroup(ctx, 2)))[1:]
    assert np.max(np.abs(mags - math.sqrt(p + 1) / 2)) < 1e-9


def test_coset_invariance():
    ctx = make_field_context(61)
    for H in all_subgroups(ctx):
        mags = np.abs(all_exp_sums(ctx, H))
        for h in H.elements:
            assert np.allclose(mags[(h * np.arange(61)) % 61], mags, atol=1e-9)


def test_max_nontrivial_examples():
    b = max_nontrivial_fourier(F101, subgroup(F101, 1))
    assert b.max_nontrivial == pytest.approx(0.01, abs=1e-12)
    assert b.beta_emp == pytest.approx(math.log(100) / math.log(101), abs=1e-10)
    b = max_nontrivial_fourier(F7, subgroup(F7, 2))
    assert b.max_nontrivial == pytest.approx(math.sqrt(2) / 3, abs=1e-12) and b.argmax_xi == 1
    b = max_nontrivial_fourier(F7, subgroup(F7, 6))
    assert b.max_nontrivial == 1.0 and b.beta_emp == 0.0
    js = b.to_json()
    assert js["max_coeff"] == 1.0 and js["subgroup_order"] == 1


def test_complete_sum_bound():
    assert complete_sum_bound_check(F7, subgroup(F7, 2))
    assert complete_sum_bound_check(F7, subgroup(F7, 3))
    assert complete_sum_bound_check(F101, subgroup(F101, 2))
    assert np.max(np.abs(all_exp_sums(F101, subgroup(F101, 2)))[1:]) == pytest.approx(
        (1 + math.sqrt(101)) / 2, abs=1e-9)
    with pytest.raises(InvalidInput):
        complete_sum_bound_check(F101, segment(F101, 2, 20))


def test_h1_length_rule():
    # 20 * 101^-0.2 / 4 = 1.988..., so t in {0, 1}
    assert h1_length(101, 20, Fraction(1, 5)) == 2
    assert h1_length(101, 20, 0) == 5
    assert h1_length(101, 20, Fraction(1, 10**6)) == 5
    assert h1_length(101, 1, Fraction(1, 5)) == 1  # t = 0 is always admissible
    assert h1_length(101, 8, 0) == 2  # strict: t < 2
    H1 = build_H1(F101, 2, 20, Fraction(1, 5))
    assert H1.elements == (1, 2)


def test_build_H1_rejects_empty_segment():
    with pytest.raises(EmptySegment):
        build_H1(F101, 2, 0, Fraction(1, 5))


def test_translate_inequality():
    r = check_translate_inequality(F101, 2, 20, Fraction(1, 5), 1, 1)
    assert r.margin == pytest.approx(0.17948321909261125, rel=1e-9)
    r0 = check_translate_inequality(F101, 2, 20, Fraction(1, 5), 5, 0)
    assert r0.lhs - r0.rhs == pytest.approx(101 ** -0.2 / 2)
    with pytest.raises(InvalidInput):
        check_translate_inequality(F101, 2, 20, Fraction(1, 5), 1, 2)
    with pytest.raises(ZeroArgument):
        check_translate_inequality(F101, 2, 20, Fraction(1, 5), 0, 0)


def test_translate_all_segments_small_primes():
    for p in (5, 7, 11, 13, 17, 19, 23, 29, 31):
        ctx = make_field_context(p)
        for T in range(1, p):
            assert translate_margins(ctx, ctx.g, T, Fraction(1, 5)).margin > 0


def test_incomplete_regression_p101():
    r = check_incomplete_smear(F101, 2, 20, Fraction(1, 4))
    assert (r.k, r.delta, r.h1_size, r.lambda_size) == (4, Fraction(1, 65), 5, 1)
    assert r.status == "hypothesis_absent"
    assert r.chain_pass == [True, True, True, True, False]
    assert r.final_pass
    assert r.final_lhs == pytest.approx(3.0769210428232347e-06, rel=1e-9)
    assert r.final_rhs == pytest.approx(1.0000000029661158, rel=1e-9)
    assert all(m >= 0 for m in r.step_margins.values())


def test_incomplete_small_segment():
    r = check_incomplete_smear(F7, 3, 3, Fraction(1, 4))
    assert r.T == 3 and r.final_pass


def test_incomplete_full_segment_matches_subgroup_chain():
    eta = Fraction(1, 4)
    r = check_incomplete_smear(F101, 2, 100, eta)
    s = check_statistical_mult(F101, subgroup(F101, 1), eta)
    assert r.k == s.k and r.delta == s.delta
    assert r.final_rhs == pytest.approx(s.rhs, rel=1e-12)
