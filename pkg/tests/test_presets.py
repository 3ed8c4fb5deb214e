import itertools

import pytest

from grigcalc.core import parse_word, root_permutation, section
from grigcalc.presets import (
    GGSVector,
    GroupFileError,
    dumps_group,
    ggs,
    grigorchuk,
    group_from_spec,
    gupta_sidki,
    is_torsion_ggs,
    load_group,
    loads_group,
    save_group,
)
from grigcalc.wordproblem import equal, verify_relations


def test_grigorchuk_rules(G):
    for g, (s0, s1) in {"b": ("a", "c"), "c": ("a", "d"), "d": ("1", "b")}.items():
        assert equal(section(G.gen(g), "0", G), parse_word(s0, G), G)
        assert equal(section(G.gen(g), "1", G), parse_word(s1, G), G)
    assert root_permutation(G.gen("a"), G) == (1, 0)
    assert verify_relations(G).ok


def test_ggs_sections(GS):
    b = GS.gen("b")
    for x, t in enumerate(["a", "a^-1", "b"]):
        assert equal(section(b, (x,), GS), parse_word(t, GS), GS)
    G5 = ggs(GGSVector(5, (1, 1, 1, 1)))
    assert equal(section(G5.gen("b"), "4", G5), G5.gen("b"), G5)


@pytest.mark.parametrize("p,e", [(2, (1,)), (4, (1, 1, 1)), (3, (0, 0)), (3, (1,))])
def test_ggs_vector_validation(p, e):
    with pytest.raises(ValueError):
        GGSVector(p, e)


def test_torsion_examples():
    assert is_torsion_ggs(GGSVector(3, (1, -1)))
    assert not is_torsion_ggs(GGSVector(3, (1, 1)))
    assert is_torsion_ggs(GGSVector(5, (1, 2, 3, 4)))


def test_torsion_exhaustive():
    for p in (3, 5):
        for e in itertools.product(range(p), repeat=p - 1):
            if any(e):
                assert is_torsion_ggs(GGSVector(p, e)) == (sum(e) % p == 0)


def test_group_file_round_trip(G, tmp_path):
    path = tmp_path / "g.grp"
    save_group(G, path)
    H = load_group(path)
    assert H.names == G.names and H.degree == G.degree
    assert [r.root_perm for r in H.rules] == [r.root_perm for r in G.rules]
    assert [r.sections for r in H.rules] == [r.sections for r in G.rules]
    assert dumps_group(H) == dumps_group(G)


def test_group_file_errors():
    with pytest.raises(GroupFileError):
        loads_group("degree: 2\na = [1, 0] ( | )\nb = [0, 1] ( a | z )\n")
    with pytest.raises(GroupFileError):
        loads_group("degree: 2\na = [0, 0] ( | )\n")


def test_group_from_spec():
    assert group_from_spec("grigorchuk").names == grigorchuk().names
    G = group_from_spec("ggs:3:1,2")
    assert G.degree == 3
    assert group_from_spec("gs3").degree == gupta_sidki(3).degree
