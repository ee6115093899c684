import numpy as np
import pytest
from sympy import n_order

from subgroup_expsums.errors import (
    EmptySegment,
    IndexNotDividing,
    InvalidInput,
    NotPrime,
    TooLarge,
    ZeroArgument,
)
from subgroup_expsums.field_core import (
    all_subgroups,
    discrete_log,
    least_primitive_root,
    make_field_context,
    psi_table,
    segment,
    segment_powers,
    subgroup,
)


@pytest.mark.parametrize("p,g", [(3, 2), (5, 2), (7, 3), (11, 2), (23, 5), (41, 6), (101, 2), (191, 19)])
def test_least_primitive_root(p, g):
    assert least_primitive_root(p) == g
    assert make_field_context(p).g == g


def test_log_exp_tables_are_inverse():
    ctx = make_field_context(101)
    for s in range(1, 101):
        assert ctx.power(discrete_log(ctx, s)) == s
    assert sorted(ctx.exp_table) == list(range(1, 101))


def test_inverse_and_orders():
    ctx = make_field_context(31)
    for x in range(1, 31):
        assert x * ctx.inverse(x) % 31 == 1
        assert ctx.element_order(x) == n_order(x, 31)


@pytest.mark.parametrize("bad,exc", [(9, NotPrime), (1, InvalidInput), (2, InvalidInput), (0, InvalidInput)])
def test_rejects_non_odd_primes(bad, exc):
    with pytest.raises(exc):
        make_field_context(bad)


def test_cap(monkeypatch):
    with pytest.raises(TooLarge):
        make_field_context(103, cap=101)
    monkeypatch.setenv("EXPSUM_P_CAP", "50")
    with pytest.raises(TooLarge):
        make_field_context(53)
    assert make_field_context(47).p == 47


def test_discrete_log_of_zero():
    with pytest.raises(ZeroArgument):
        discrete_log(make_field_context(7), 14)


def test_subgroup_of_index_two_is_quadratic_residues():
    ctx = make_field_context(11)
    H = subgroup(ctx, 2)
    assert H.elements == (1, 3, 4, 5, 9)
    assert H.order == 5
    assert 3 in H and 2 not in H and 14 in H


def test_subgroup_closure_and_orders():
    ctx = make_field_context(61)
    orders = []
    for H in all_subgroups(ctx):
        members = set(H.elements)
        assert all(a * b % 61 in members for a in members for b in members)
        assert H.order * H.index == 60
        orders.append(H.order)
    assert sorted(orders) == [1, 2, 3, 4, 5, 6, 10, 12, 15, 20, 30, 60]


def test_index_must_divide():
    with pytest.raises(IndexNotDividing):
        subgroup(make_field_context(7), 4)


def test_segment():
    ctx = make_field_context(101)
    S = segment(ctx, 2, 5)
    assert S.elements == (1, 2, 4, 8, 16)
    assert segment_powers(ctx, 3, 4) == [1, 3, 9, 27]
    assert segment(ctx, 2, 100).elements == tuple(range(1, 101))
    with pytest.raises(EmptySegment):
        segment(ctx, 2, 0)
    with pytest.raises(InvalidInput):
        segment(ctx, 100, 3)  # ord(-1) = 2
    with pytest.raises(ZeroArgument):
        segment(ctx, 0, 3)


def test_psi_table():
    t = psi_table(13)
    assert abs(t[0] - 1) < 1e-15
    assert np.allclose(np.abs(t), 1, atol=1e-12)
    assert abs(t.sum()) < 1e-12
    with pytest.raises(ValueError):
        t[0] = 0
