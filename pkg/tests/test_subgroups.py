import pytest

from grigcalc.core import IDENTITY, act_vertex, conjugate, parse_word, section
from grigcalc.permquotient import LevelQuotient, quotient_group, rigid_stabilizer_at_level
from grigcalc.subgroups import (
    INCONCLUSIVE,
    INFINITE_EVIDENCE,
    RIST_CERTIFIED,
    SpecFileError,
    SubgroupSpec,
    block_subgroup,
    canonical_tree_code,
    certify_rist,
    classify,
    diagonal_subgroup,
    dumps_subgroups,
    find_word_by_sections,
    lift_at_level,
    loads_subgroups,
    nr_tree_estimate,
    registry_for,
    rist_embed,
    rist_subgroup,
    section_subgroup,
    spec_from_strings,
    stabilizer_schreier_generators,
    tree_equivalent_truncation,
    whole_group,
)
from grigcalc.wordproblem import equal, is_trivial


def W(G, text):
    return parse_word(text, G)


def same_images(H1, H2, levels):
    return all(H1.quotient(n).same_group(H2.quotient(n)) for n in levels)


@pytest.fixture(scope="module")
def R(G):
    return registry_for(G)


# ------------------------------------------------------------ spec files

def test_spec_round_trip(G):
    text = "# two subgroups\nsubgroup WL\na\nb a b\nc a d a b\n\nsubgroup J05\nb\na c\n"
    specs = loads_subgroups(text, G)
    assert [s.name for s in specs] == ["WL", "J05"]
    again = loads_subgroups(dumps_subgroups(specs), G)
    assert [s.generators for s in again] == [s.generators for s in specs]


@pytest.mark.parametrize("text", ["a\nb\n", "subgroup X\na q\n", "subgroup\na\n"])
def test_spec_errors(G, text):
    with pytest.raises(SpecFileError):
        loads_subgroups(text, G)


# ------------------------------------------------------- Schreier calculus

def test_level1_stabilizer(G):
    S = stabilizer_schreier_generators(whole_group(G), "1")
    target = spec_from_strings("H", ["b", "c", "d", "a b a", "a c a", "a d a"], G)
    assert same_images(S, target, range(1, 7))
    for g in S.generators:
        assert act_vertex(g, "1", G) == (1,)


def test_schreier_trivial_cases(G):
    assert stabilizer_schreier_generators(whole_group(G), "root").generators == whole_group(G).generators
    Hb = spec_from_strings("b", ["b"], G)
    assert same_images(stabilizer_schreier_generators(Hb, "0"), Hb, range(1, 6))


def test_self_replicating_section(G):
    stab1 = spec_from_strings("H", ["b", "c", "d", "a b a", "a c a", "a d a"], G)
    assert same_images(section_subgroup(stab1, "0"), whole_group(G), range(1, 7))
    trivial = SubgroupSpec("1", (IDENTITY,), G)
    assert section_subgroup(trivial, "01").quotient(3).order() == 1


# ----------------------------------------------------------- word search

def test_find_word_by_sections(G):
    H = whole_group(G)
    ident = (0, 1)
    assert equal(find_word_by_sections([IDENTITY, W(G, "b")], ident, H, 2), W(G, "d"), G)
    assert equal(find_word_by_sections([W(G, "a"), W(G, "c")], ident, H, 2), W(G, "b"), G)
    # the element with sections (ca, ac) is abab, not baba
    w = find_word_by_sections([W(G, "c a"), W(G, "a c")], ident, H, 4)
    assert equal(w, W(G, "a b a b"), G) and not equal(w, W(G, "b a b a"), G)


# ------------------------------------------------------- rist embeddings

def test_rist_embed_examples(G, R):
    assert equal(rist_embed("1", "b", R), W(G, "d"), G)
    both = W(G, "d d^a")
    assert equal(section(both, "0", G), W(G, "b"), G) and equal(section(both, "1", G), W(G, "b"), G)
    e = rist_embed("1", "k1", R)
    found = find_word_by_sections([IDENTITY, W(G, "(a b)^2")], (0, 1), whole_group(G), 8)
    assert equal(e, found, G)
    assert certify_rist(e, (1,), W(G, "(a b)^2"), G).ok


@pytest.mark.parametrize("v", ["0", "1", "00", "01", "10", "11", "010", "111"])
def test_embedded_K_generators_are_certified(G, R, v):
    for name in ("k1", "k2", "k3"):
        w = R.entry(v, name)
        target = W(G, {"k1": "(a b)^2", "k2": "(b a d a)^2", "k3": "(a b a d)^2"}[name])
        assert certify_rist(w, tuple(int(x) for x in v), target, G).ok


def test_rist_subgroup_images(G, R):
    # K at 01 sits inside the finite-level rigid stabilizer of 01
    Q = quotient_group([G.gen(x) for x in G.names], 6, G)
    rist = rigid_stabilizer_at_level(Q, "01")
    assert rist.contains_group(rist_subgroup("01", R).quotient(6))


# ---------------------------------------------------- diagonal and block

def test_example_grig_diagonal(G, R):
    K = [W(G, "(a b)^2"), W(G, "(b d^a)^2"), W(G, "(b^a d)^2")]
    U = ["000", "01", "10"]
    D = diagonal_subgroup(U, K, [W(G, "a"), W(G, "b"), W(G, "c")], R)
    for l, g in zip(K, D.generators):
        for u, psi in zip(U, "abc"):
            assert equal(section(g, u, G), conjugate(l, W(G, psi)), G)
        assert is_trivial(section(g, "001", G), G) and is_trivial(section(g, "11", G), G)


def test_singleton_diagonal(G, R):
    D = diagonal_subgroup(["10"], [W(G, "(a b)^2")], [IDENTITY], R)
    Q = quotient_group([G.gen(x) for x in G.names], 6, G)
    assert rigid_stabilizer_at_level(Q, "10").contains_group(D.quotient(6))


def test_diagonal_overlap_rejected(G, R):
    with pytest.raises(ValueError):
        diagonal_subgroup(["0", "01"], [W(G, "(a b)^2")], [IDENTITY, IDENTITY], R)


def test_block_subgroup(G, R):
    D1 = rist_subgroup("1", R)
    D2 = diagonal_subgroup(["000", "001"], [W(G, "(a b)^2")], [IDENTITY, W(G, "a")], R)
    A = block_subgroup([D1, D2])
    assert len(A.generators) == len(D1.generators) + len(D2.generators)
    assert block_subgroup([D1]) is D1
    with pytest.raises(ValueError):
        block_subgroup([D1, rist_subgroup("10", R)])


# ----------------------------------------------------------- NR and lifts

def test_nr_vertex_stabilizer(G):
    S0 = stabilizer_schreier_generators(whole_group(G), "0")
    rep = nr_tree_estimate(S0, 1, 6)
    assert rep.status("root") != INFINITE_EVIDENCE
    assert rep.downward_closed()


def test_nr_parabolic_ray(G):
    P = stabilizer_schreier_generators(whole_group(G), (1,) * 6)
    rep = nr_tree_estimate(P, 2, 6)
    for v in ["root", "1", "11"]:
        assert rep.status(v) == INFINITE_EVIDENCE
    assert rep.status("0") == RIST_CERTIFIED
    assert rep.downward_closed()
    assert rep.nr_orbit_counts == {1: 1, 2: 1} and rep.minimal_action_evidence()


def test_classify_full_group(G):
    assert classify(whole_group(G), 6).verdict == INCONCLUSIVE


def test_lift_at_level(G):
    all4 = [G.gen(x) for x in G.names]
    full = quotient_group(all4, 2, G)
    stab = quotient_group(stabilizer_schreier_generators(whole_group(G), "1").generators, 3, G)
    assert lift_at_level(full, "1", 3, G).same_group(stab)
    trivial = LevelQuotient.from_perms([], 4, 2)
    lifted = lift_at_level(trivial, "1", 3, G)
    Q3 = quotient_group(all4, 3, G)
    assert lifted.same_group(rigid_stabilizer_at_level(Q3, "0"))
    # index of the lift is at least the index of the section subgroup
    H = spec_from_strings("J05", ["b", "a c"], G).quotient(2)
    assert stab.order() // lift_at_level(H, "1", 3, G).order() >= full.order() // H.order()


# ------------------------------------------------------------------ trees

def test_tree_equivalence():
    ray1, ray2 = ["0", "01", "010"], ["1", "11", "111"]
    assert tree_equivalent_truncation(ray1, ray2)
    full = ["0", "1", "00", "01", "10", "11", "000", "001", "010", "011", "100", "101", "110", "111"]
    assert not tree_equivalent_truncation(ray1, full)
    nr = ["0", "1", "00", "10"]
    mirror = ["0", "1", "01", "11"]
    assert tree_equivalent_truncation(nr, mirror)
    assert canonical_tree_code([]) == "()"
    with pytest.raises(ValueError):
        canonical_tree_code(["01"])
