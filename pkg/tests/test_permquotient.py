import numpy as np
import pytest
from sympy.combinatorics import Permutation, PermutationGroup

from conftest import naive_level_perm, perm_closure
from grigcalc.core import parse_word
from grigcalc.permquotient import (
    BudgetExceeded,
    LevelQuotient,
    StabChain,
    enumerate_subgroups_small,
    exhaustive_elements,
    index_at_level,
    level_permutation,
    normal_closure,
    orbits_on_level,
    perm_order,
    pointwise_stabilizer,
    quotient_group,
    rigid_stabilizer_at_level,
    setwise_stabilizer_brute,
)


def gens(G, *words):
    return [parse_word(w, G) for w in words]


def test_level_permutation_examples(G):
    assert tuple(level_permutation(G.gen("a"), 1, G)) == (1, 0)
    assert tuple(level_permutation(G.gen("b"), 1, G)) == (0, 1)
    assert tuple(level_permutation(G.gen("b"), 2, G)) == (1, 0, 2, 3)


def test_level_permutation_against_naive(G):
    for w in ["a", "b", "c", "d", "a b", "b a c a d", "(a c)^4", "d^(a c) d^(a c a)"]:
        word = parse_word(w, G)
        letters = [G.names[g] for g, e in word.tokens for _ in range(abs(e))]
        for n in range(1, 7):
            assert tuple(level_permutation(word, n, G)) == naive_level_perm(letters, n)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_quotient_order_against_sympy(G, n):
    # [DERIVED] an independent Schreier-Sims implementation
    Q = quotient_group(gens(G, "a", "b", "c", "d"), n, G)
    oracle = PermutationGroup([Permutation(list(p)) for p in Q.perms])
    assert Q.order() == oracle.order()


def test_quotient_small_orders(G):
    all4 = gens(G, "a", "b", "c", "d")
    assert quotient_group(all4, 1, G).order() == 2
    Q2 = quotient_group(all4, 2, G)
    assert Q2.order() == 8 == len(exhaustive_elements(Q2.perms, Q2.degree))
    assert quotient_group(gens(G, "b"), 1, G).order() == 1


def test_chain_membership(G):
    Q = quotient_group(gens(G, "a", "b", "c", "d"), 4, G)
    elems = perm_closure([tuple(int(x) for x in p) for p in Q.perms], 16)
    assert len(elems) == Q.order()
    rng = np.random.default_rng(0)
    for _ in range(200):
        g = rng.permutation(16)
        assert Q.contains(g) == (tuple(int(x) for x in g) in elems)


def test_orbits(G):
    assert len(orbits_on_level(gens(G, "a", "b", "c", "d"), 8, G)) == 1
    orbs = orbits_on_level(gens(G, "b"), 2, G)
    assert sorted(map(sorted, orbs)) == [[(0, 0), (0, 1)], [(1, 0)], [(1, 1)]]
    assert len(orbits_on_level([], 2, G)) == 4


def test_index_at_level(G):
    all4 = gens(G, "a", "b", "c", "d")
    assert index_at_level(all4, gens(G, "b", "b^a", "b^(a d)", "b^(a d a)"), 4, G) == 8
    assert index_at_level(all4, gens(G, "(a b)^2", "(b d^a)^2", "(b^a d)^2"), 4, G) == 16
    assert index_at_level(all4, all4, 5, G) == 1


def test_literal_three_generator_B_is_too_small(G):
    # the set {b, b^a, b^(a d a)} does not normally close; see the decisions ledger
    all4 = gens(G, "a", "b", "c", "d")
    assert index_at_level(all4, gens(G, "b", "b^a", "b^(a d a)"), 4, G) == 64


def test_normal_closure_of_b(G):
    QG = quotient_group(gens(G, "a", "b", "c", "d"), 5, G)
    QB = normal_closure(QG, [level_permutation(G.gen("b"), 5, G)])
    assert QB.same_group(quotient_group(gens(G, "b", "b^a", "b^(a d)", "b^(a d a)"), 5, G))


def test_pointwise_stabilizer(G):
    Q1 = quotient_group(gens(G, "a", "b", "c", "d"), 1, G)
    assert Q1.order() // pointwise_stabilizer(Q1, ["1"]).order() == 2
    Q3 = quotient_group(gens(G, "a", "b", "c", "d"), 3, G)
    assert pointwise_stabilizer(Q3, range(8)).order() == 1
    assert pointwise_stabilizer(Q3, []).same_group(Q3)


def test_rigid_stabilizer(G):
    Q = quotient_group(gens(G, "a", "b", "c", "d"), 4, G)
    assert rigid_stabilizer_at_level(Q, "root").same_group(Q)
    leaf = rigid_stabilizer_at_level(Q, "0110")
    assert 2 % leaf.order() == 0
    # [DERIVED] brute force over all elements
    R0 = rigid_stabilizer_at_level(Q, "0")
    brute = [g for g in Q.elements() if all(g[i] == i for i in range(8, 16))]
    assert R0.order() == len(brute)


def test_setwise_stabilizer(G):
    Q2 = quotient_group(gens(G, "a", "b", "c", "d"), 2, G)
    assert setwise_stabilizer_brute(Q2, range(4)).same_group(Q2)
    assert setwise_stabilizer_brute(Q2, ["01"]).same_group(pointwise_stabilizer(Q2, ["01"]))
    S = setwise_stabilizer_brute(Q2, ["00", "11"])
    brute = [g for g in Q2.elements() if {int(g[0]), int(g[3])} == {0, 3}]
    assert S.order() == len(brute)
    with pytest.raises(BudgetExceeded):
        setwise_stabilizer_brute(quotient_group(gens(G, "a", "b", "c", "d"), 4, G), ["0000"], budget=100)


def test_enumerate_subgroups_small():
    c4 = LevelQuotient.from_perms([np.array([1, 2, 3, 0])], 4)
    assert len(enumerate_subgroups_small(c4)) == 3
    d8 = LevelQuotient.from_perms([np.array([1, 2, 3, 0]), np.array([0, 3, 2, 1])], 4)
    assert len(enumerate_subgroups_small(d8)) == 10
    assert len(enumerate_subgroups_small(LevelQuotient.from_perms([], 3))) == 1


def test_budget_env_override(G, monkeypatch):
    monkeypatch.setenv("GRIGCALC_BUDGET", "4")
    d8 = LevelQuotient.from_perms([np.array([1, 2, 3, 0]), np.array([0, 3, 2, 1])], 4)
    with pytest.raises(BudgetExceeded):
        enumerate_subgroups_small(d8)


def test_perm_order_and_stabchain():
    p = np.array([1, 2, 0, 4, 3])
    assert perm_order(p) == 6
    chain = StabChain([p], 5)
    assert chain.order() == 6
