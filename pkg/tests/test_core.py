import math
import random
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semigrouplab import core
from semigrouplab.errors import InvalidGenerators, NotCofinite

from oracles import brute_apery, brute_invariants, brute_members


@st.composite
def cofinite_gens(draw, max_gen=60, max_len=6):
    gens = draw(st.lists(st.integers(1, max_gen), min_size=1, max_size=max_len))
    if reduce(math.gcd, gens) != 1:
        gens.append(draw(st.sampled_from([g for g in range(2, max_gen + 2)
                                          if math.gcd(g, reduce(math.gcd, gens)) == 1])))
    return gens


@pytest.mark.parametrize("raw, elements, g", [
    ([3, 3, 5], (3, 5), 1),
    ([6, 9, 20], (6, 9, 20), 1),
    ([4, 6], (4, 6), 2),
    ([20, 9, 6, 9], (6, 9, 20), 1),
])
def test_normalize_generators(raw, elements, g):
    gs = core.normalize_generators(raw)
    assert gs.elements == elements
    assert gs.gcd == g


@pytest.mark.parametrize("raw", [[], [0, 3], [3, -5], [2**31 + 1]])
def test_normalize_rejects(raw):
    with pytest.raises(InvalidGenerators):
        core.normalize_generators(raw)


@pytest.mark.parametrize("gens, q, w", [([2, 3], 2, [0, 3]), ([3, 5], 3, [0, 10, 5]), ([1], 1, [0])])
def test_apery_examples(gens, q, w):
    assert brute_apery(gens) == w
    ap = core.apery_set(gens)
    assert ap.q == q
    assert ap.w.tolist() == w


def test_apery_rejects_gcd():
    with pytest.raises(NotCofinite):
        core.apery_set([4, 6])
    with pytest.raises(NotCofinite):
        core.invariants([4, 6])


@pytest.mark.parametrize("gens, F", [([2, 3], 1), ([1], -1), ([6, 9, 20], 43)])
def test_frobenius(gens, F):
    S = brute_members(gens, 100)
    gaps = [n for n in range(1, 101) if n not in S]
    assert (max(gaps) if gaps else -1) == F
    assert core.frobenius(core.apery_set(gens)) == F


@pytest.mark.parametrize("gens, g", [([2, 3], 1), ([1], 0), ([3, 5], 4)])
def test_genus(gens, g):
    ap = core.apery_set(gens)
    assert core.genus(ap) == g
    assert len(core.gaps(ap)) == g


def test_genus_of_3_5_gaps():
    assert core.gaps(core.apery_set([3, 5])) == [1, 2, 4, 7]


def test_membership():
    ap = core.apery_set([3, 5])
    assert not core.membership(ap, 7)
    assert core.membership(ap, 8)
    assert core.membership(ap, 0)
    assert not core.membership(ap, -3)


@pytest.mark.parametrize("gens, minimal", [([2, 3], {2, 3}), ([3, 5, 8], {3, 5}), ([4, 6, 9], {4, 6, 9})])
def test_minimal_generators(gens, minimal):
    ap = core.apery_set(gens)
    assert core.minimal_generators(ap) == minimal
    assert core.minimal_generators(ap, gens) == minimal


def test_invariants_examples():
    assert core.invariants([6, 9, 20]) == core.InvariantsRecord(43, 22, 3, 6)
    assert core.invariants([1]) == core.InvariantsRecord(-1, 0, 1, 1)
    assert brute_invariants([6, 9, 20]) == (43, 22, 3, 6)
    assert str(core.invariants([6, 9, 20])) == "F=43 g=22 e=3 q=6"


def test_sylvester_two_generators():
    for a in range(2, 41):
        for b in range(a + 1, 41):
            if math.gcd(a, b) != 1:
                continue
            inv = core.invariants([a, b])
            F, g = core.sylvester(a, b)
            assert (inv.frobenius, inv.genus, inv.embedding_dim) == (F, g, 2)
            assert brute_invariants([a, b])[:2] == (F, g)


@pytest.mark.parametrize("gens, N, members", [
    ([3, 5], 10, [0, 3, 5, 6, 8, 9, 10]),
    ([1], 5, [0, 1, 2, 3, 4, 5]),
    ([2], 6, [0, 2, 4, 6]),
    ([4, 6], 13, [0, 4, 6, 8, 10, 12]),
])
def test_semigroup_prefix(gens, N, members):
    assert sorted(brute_members(gens, N)) == members
    assert core.semigroup_prefix(gens, N).elements() == members


def test_count_upto_matches_prefix():
    gens = [7, 11, 19]
    ap = core.apery_set(gens)
    table = core.semigroup_prefix(gens, 200)
    for N in range(0, 201):
        assert core.count_upto(ap, N) == int(table.member[1:N + 1].sum())


@settings(max_examples=300, deadline=None)
@given(cofinite_gens())
def test_apery_path_matches_brute_force(gens):
    inv = core.invariants(gens)
    assert (inv.frobenius, inv.genus, inv.embedding_dim, inv.multiplicity) == brute_invariants(gens)
    assert core.invariants_bruteforce(gens) == inv
    assert core.apery_set(gens).w.tolist() == brute_apery(gens)


@settings(max_examples=200, deadline=None)
@given(cofinite_gens(max_gen=40))
def test_table_invariants(gens):
    ap = core.apery_set(gens)
    q, w = ap.q, ap.w.tolist()
    assert w[0] == 0
    assert all(w[r] % q == r for r in range(q))
    F = core.frobenius(ap)
    N = F + 2 * q + max(gens)
    S = brute_members(gens, N)
    assert all(w[r] in S for r in range(q))
    assert all((w[r] - q) not in S for r in range(1, q))
    assert all(core.membership(ap, n) == (n in S) for n in range(N + 1))
    # the Apéry-sum genus formula
    assert core.genus(ap) == (sum(w) - q * (q - 1) // 2) // q


@settings(max_examples=200, deadline=None)
@given(cofinite_gens())
def test_elementary_inequalities(gens):
    inv = core.invariants(gens)
    assert inv.frobenius + 1 <= 2 * inv.genus <= 2 * (inv.frobenius + 1)
    assert inv.embedding_dim <= inv.frobenius + 2
    assert inv.embedding_dim <= inv.multiplicity
    assert inv.satisfies_inequalities()


@settings(max_examples=150, deadline=None)
@given(cofinite_gens())
def test_minimal_generators_regenerate(gens):
    ap = core.apery_set(gens)
    mins = core.minimal_generators(ap)
    assert mins <= {ap.q} | set(ap.w.tolist()[1:])
    N = core.frobenius(ap) + 2 * ap.q
    np.testing.assert_array_equal(core.semigroup_prefix(sorted(mins), N).member,
                                  core.semigroup_prefix(gens, N).member)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 30), min_size=1, max_size=5), st.integers(0, 120))
def test_prefix_is_closed(gens, N):
    table = core.semigroup_prefix(gens, N)
    m = table.member
    assert m[0]
    assert sorted(brute_members(gens, N)) == table.elements()
    idx = np.flatnonzero(m)
    for i in idx:
        for j in idx:
            if i + j <= N:
                assert m[i + j]


def test_dual_path_on_random_sets():
    rng = random.Random(7)
    for _ in range(300):
        k = rng.randint(2, 7)
        gens = rng.sample(range(2, 400), k)
        if reduce(math.gcd, gens) != 1:
            continue
        assert core.invariants(gens) == core.invariants_bruteforce(gens)


def test_apery_table_is_immutable():
    ap = core.apery_set([3, 5])
    with pytest.raises(ValueError):
        ap.w[1] = 0
    assert ap == core.apery_set([5, 3, 8])
