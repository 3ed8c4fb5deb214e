import itertools

import pytest

from conftest import naive_act
from grigcalc.core import (
    IDENTITY,
    RaySpec,
    Word,
    WordParseError,
    act_vertex,
    compose_words,
    inverse,
    multiply,
    orthogonal,
    parse_vertex,
    parse_word,
    portrait_of,
    root_permutation,
    section,
    vertex_str,
)
from grigcalc.wordproblem import equal


def test_parse_word_tokens(G, GS):
    assert parse_word("a b a", G).tokens == ((0, 1), (1, 1), (0, 1))
    assert parse_word("b^-1", GS).tokens == ((1, -1),)
    assert parse_word("a a", G).tokens == ((0, 2),)


def test_parse_word_grammar(G):
    assert parse_word("b^a", G) == parse_word("a' b a", G)
    assert equal(parse_word("(a b)^2", G), parse_word("a b a b", G), G)
    assert parse_word("", G) == IDENTITY
    assert parse_word("1", G) == IDENTITY


@pytest.mark.parametrize("bad", ["a x", "a^", "(a b", "a b)", "a ^ ^ b"])
def test_parse_word_errors(G, bad):
    with pytest.raises(WordParseError):
        parse_word(bad, G)


def test_multiply_and_inverse(G):
    a, b = G.gen("a"), G.gen("b")
    assert multiply(IDENTITY, b) == b
    assert multiply(a, a).tokens == ((0, 2),)
    assert multiply(b, Word(((1, -1),))) == IDENTITY
    assert inverse(parse_word("a b", G)).tokens == ((1, -1), (0, -1))
    assert inverse(IDENTITY) == IDENTITY
    assert inverse(Word(((1, 2),))).tokens == ((1, -2),)


def test_root_permutation(G, GS):
    assert root_permutation(G.gen("a"), G) == (1, 0)
    assert root_permutation(G.gen("b"), G) == (0, 1)
    assert root_permutation(GS.gen("a"), GS) == (1, 2, 0)


def test_sections_match_rules(G, GS):
    assert equal(section(G.gen("b"), "0", G), G.gen("a"), G)
    assert equal(section(G.gen("b"), "1", G), G.gen("c"), G)
    assert equal(section(G.gen("d"), "0", G), IDENTITY, G)
    assert equal(section(GS.gen("b"), "2", GS), GS.gen("b"), GS)


def test_act_vertex_examples(G):
    assert act_vertex(G.gen("a"), "00", G) == (1, 0)
    assert act_vertex(G.gen("d"), "0", G) == (0,)
    assert act_vertex(G.gen("d"), "1", G) == (1,)
    assert act_vertex(G.gen("b"), "00", G) == (0, 1)


def test_act_vertex_against_naive_oracle(G):
    # [DERIVED] every word of length <= 4 on every level-5 vertex
    for k in range(5):
        for letters in itertools.product("abcd", repeat=k):
            w = parse_word(" ".join(letters), G)
            for v in itertools.product((0, 1), repeat=5):
                assert act_vertex(w, v, G) == naive_act(letters, v)


def test_compose_words_convention(G):
    # g o h applies h first
    g, h = G.gen("a"), G.gen("b")
    for v in itertools.product((0, 1), repeat=3):
        assert act_vertex(compose_words(g, h), v, G) == act_vertex(g, act_vertex(h, v, G), G)


def test_portraits(G):
    p = portrait_of(IDENTITY, 3, G)
    assert all(lab == (0, 1) for lab in p.labels.values())
    p = portrait_of(G.gen("a"), 2, G)
    assert p.label("root") == (1, 0) and p.label("0") == (0, 1) and p.label("1") == (0, 1)
    p = portrait_of(G.gen("d"), 4, G)
    swapped = {vertex_str(v) for v, lab in p.labels.items() if lab != (0, 1)}
    assert swapped == {"10", "110"}   # d=(1,b), b=(a,c), c=(a,d)
    assert p.subportrait((1,)).label("0") == (1, 0)


def test_vertices():
    assert parse_vertex("root") == ()
    assert parse_vertex("0110") == (0, 1, 1, 0)
    assert vertex_str(()) == "root"
    assert orthogonal((0,), (1, 1)) and not orthogonal((0,), (0, 1))


def test_ray_prefix():
    assert RaySpec((0,), (1,)).prefix(4) == (0, 1, 1, 1)
    assert RaySpec((), (0, 1)).prefix(3) == (0, 1, 0)
    with pytest.raises(ValueError):
        RaySpec((0,), ())
