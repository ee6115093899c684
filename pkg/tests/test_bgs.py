from fractions import Fraction
from itertools import combinations

import pytest

from subgroup_expsums.bgs import (
    BgsInstance,
    bgs_extract,
    find_small_doubling_subset,
    max_doubling,
    productset,
    sum_product_score,
    sumset,
)
from subgroup_expsums.errors import ExtractionFailed, InvalidInput, ZeroElement
from subgroup_expsums.field_core import all_subgroups, make_field_context


def naive_sums(A, B, n):
    out = set()
    for a in A:
        for b in B:
            out.add((a + b) % n)
    return out


def naive_small_doubling_exists(A, n, bound, size):
    return any(len(naive_sums(X, X, n)) <= bound for X in combinations(sorted(A), size))


def random_instance(rng, n=101):
    N = int(rng.integers(2, 13))
    A = frozenset(int(x) for x in rng.choice(n, size=N, replace=False))
    B = frozenset(int(x) for x in rng.choice(n, size=N, replace=False))
    pairs = [(a, b) for a in sorted(A) for b in sorted(B)]
    need = -(-N * N // 4)
    idx = rng.choice(len(pairs), size=int(rng.integers(need, len(pairs) + 1)), replace=False)
    G = frozenset(pairs[i] for i in idx)
    S = {(a + b) % n for a, b in G}
    N_eff = max(N, len(S))
    return BgsInstance(n, A, B, G, N_eff, Fraction(len(G), N_eff * N_eff))


def test_sumset_examples():
    assert sumset({0}, {0}, 101) == {0}
    assert sumset({0, 1, 2}, {0, 1, 2}, 101) == {0, 1, 2, 3, 4}
    assert sumset({1, 2, 4}, {1, 2, 4}, 7) == {1, 2, 3, 4, 5, 6}


def test_productset_examples():
    assert productset({1}, {1}, 7) == {1}
    assert productset({1, 2, 4}, {1, 2, 4}, 7) == {1, 2, 4}
    assert productset({1, 2, 3}, {1, 2, 3}, 7) == {1, 2, 3, 4, 6}
    with pytest.raises(ZeroElement):
        productset({0, 1}, {1}, 7)


def test_against_naive_oracle(rng):
    for _ in range(100):
        p = int(rng.choice([7, 11, 31, 53, 101]))
        A = set(int(x) for x in rng.integers(1, p, size=int(rng.integers(1, 8))))
        B = set(int(x) for x in rng.integers(1, p, size=int(rng.integers(1, 8))))
        assert sumset(A, B, p) == naive_sums(A, B, p) == sumset(B, A, p)
        assert productset(A, B, p) == {a * b % p for a in A for b in B}


def test_subgroups_closed_under_products():
    for p in (13, 31, 61):
        for H in all_subgroups(make_field_context(p)):
            assert productset(H.elements, H.elements, p) == set(H.elements)


def test_sum_product_score():
    s = sum_product_score({1, 2, 4}, 7)
    assert (s.sumset_size, s.productset_size, s.score) == (6, 3, 9)
    single = sum_product_score({1}, 7)
    assert single.score == 2 and single.exponent is None
    gp = sum_product_score({1, 2, 4, 8, 16}, 101)
    assert gp.productset_size == 9
    assert gp.sumset_size == len(naive_sums({1, 2, 4, 8, 16}, {1, 2, 4, 8, 16}, 101))


def test_instance_validation():
    with pytest.raises(InvalidInput):
        BgsInstance(101, {1, 2}, {3}, {(1, 4)}, 2, 1)
    with pytest.raises(InvalidInput):
        BgsInstance(101, {1, 2}, {3}, {(1, 3)}, 2, 1)  # |G| < alpha N^2
    with pytest.raises(InvalidInput):
        BgsInstance(101, {1, 2, 3}, {3}, {(1, 3)}, 2, Fraction(1, 4))  # |A| > N


def test_extract_full_graph_is_vacuous():
    A = frozenset(range(10))
    G = frozenset((a, b) for a in A for b in A)
    # S = {0..18}, so N = 10 violates |S| <= N; the smallest admissible N is 19
    with pytest.raises(InvalidInput):
        BgsInstance(101, A, A, G, 10, 1)
    inst = BgsInstance(101, A, A, G, 19, Fraction(100, 361))
    res = bgs_extract(inst)
    assert set(res.A_prime) == set(A) and res.strategy == "vacuous" and res.ok


def test_extract_tiny_instance():
    A = frozenset({0, 1, 2, 3})
    G = frozenset((a, b) for a in A for b in A if 2 <= a + b <= 5)
    inst = BgsInstance(101, A, A, G, 4, Fraction(1, 2))
    assert len(inst.sums) == 4 and len(G) == 12
    res = bgs_extract(inst)
    assert res.ok and len(res.A_prime) >= 1 and res.doubling <= res.doubling_bound


def test_random_extractions_recertified(rng):
    for _ in range(50):
        inst = random_instance(rng)
        res = bgs_extract(inst)
        Ap = set(res.A_prime)
        assert Ap <= set(inst.A)
        assert len(naive_sums(Ap, Ap, inst.n)) <= Fraction(2**37) / inst.alpha**8 * inst.N
        assert len(Ap) >= inst.alpha**4 / 2**15 * inst.N


def test_tight_bounds_greedy_and_exhaustive_agree_with_oracle(rng):
    n = 101
    strategies = set()
    for _ in range(60):
        A = set(int(x) for x in rng.choice(n, size=int(rng.integers(4, 11)), replace=False))
        size = int(rng.integers(2, 5))
        bound = int(rng.integers(size, 2 * size + 2))
        found, how = find_small_doubling_subset(A, n, bound, size)
        exists = naive_small_doubling_exists(A, n, bound, size)
        if found is None:
            assert not exists, (A, bound, size, how)
        else:
            strategies.add(how)
            assert set(found) <= A and len(found) >= size
            assert len(naive_sums(found, found, n)) <= bound
    assert {"greedy", "exhaustive"} <= strategies


def test_extraction_failure_is_reported():
    # three elements mod 101 with pairwise-distinct sums, asked for doubling <= 2 on 2 elements
    found, how = find_small_doubling_subset({1, 10, 40}, 101, 2, 2)
    assert found is None and how == "exhaustive-none"
    assert max_doubling(3, 101) == 6
