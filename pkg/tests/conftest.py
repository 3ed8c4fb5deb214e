"""Shared fixtures and independent oracles.

The oracles here never touch the package's recursion code: they evaluate
generators straight from hand-written wreath rules on explicit strings.
"""

import itertools
import sys

import pytest

from grigcalc.presets import grigorchuk, gupta_sidki

# x -> image, per generator, for the Grigorchuk group (right factor acts first)
_GRIG = {
    "a": lambda v: ((1 - v[0],) + v[1:]) if v else v,
    "b": lambda v: v if not v else ((0,) + naive_act("a", v[1:]) if v[0] == 0 else (1,) + naive_act("c", v[1:])),
    "c": lambda v: v if not v else ((0,) + naive_act("a", v[1:]) if v[0] == 0 else (1,) + naive_act("d", v[1:])),
    "d": lambda v: v if not v else ((0,) + v[1:] if v[0] == 0 else (1,) + naive_act("b", v[1:])),
}


def naive_act(word, v):
    """Act on vertex ``v`` by a space-separated Grigorchuk word, rightmost letter first."""
    letters = word.split() if isinstance(word, str) else list(word)
    v = tuple(v)
    for x in reversed(letters):
        v = _GRIG[x](v)
    return v


def naive_level_perm(word, n):
    verts = list(itertools.product((0, 1), repeat=n))
    index = {v: i for i, v in enumerate(verts)}
    return tuple(index[naive_act(word, v)] for v in verts)


def perm_closure(gens, degree):
    ident = tuple(range(degree))
    seen, frontier = {ident}, [ident]
    while frontier:
        x = frontier.pop()
        for g in gens:
            y = tuple(g[i] for i in x)
            if y not in seen:
                seen.add(y)
                frontier.append(y)
    return seen


@pytest.fixture(scope="session")
def G():
    return grigorchuk()


@pytest.fixture(scope="session")
def GS():
    return gupta_sidki(3)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "ACCEPTANCE_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
