"""Acceptance criteria 1-11, one test each.

Criteria 1-10 reuse the named checks of ``grigcalc.verify``; criterion 11 runs
its randomized laws here with a fixed seed. Each test records a one-line
verdict, printed in the pytest terminal summary (or directly when this file is
run as a script).
"""

import random

import numpy as np
import pytest

from grigcalc.core import Word, act_vertex, multiply, section
from grigcalc.presets import grigorchuk
from grigcalc.permquotient import level_permutation, orbit_count, quotient_group
from grigcalc.subgroups import SubgroupSpec, nr_tree_estimate
from grigcalc.verify import CHECKS, parabolic, run_check, w_p
from grigcalc.wordproblem import equal

ACCEPTANCE_LINES: dict = {}
G = grigorchuk()
ALL = [G.gen(x) for x in G.names]


def record(k: int, ok: bool, detail: str):
    ACCEPTANCE_LINES[k] = f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}"


def run_criterion(k: int):
    results = [run_check(c) for c in CHECKS if c.criterion == k]
    failed = [r for r in results if r.status != "pass"]
    detail = f"{len(results) - len(failed)}/{len(results)} checks"
    if failed:
        detail += "; failing: " + ", ".join(r.name for r in failed)
    record(k, not failed, detail)
    return failed


@pytest.mark.parametrize("k", range(1, 11))
def test_criterion(k):
    failed = run_criterion(k)
    assert not failed, {r.name: r.witness for r in failed}


def _random_word(rng, length):
    return Word(tuple((rng.randrange(4), 1) for _ in range(length)))


def criterion_11():
    rng = random.Random(11)
    laws = 0
    for _ in range(1000):
        g, h = _random_word(rng, rng.randint(0, 12)), _random_word(rng, rng.randint(0, 12))
        v = tuple(rng.randrange(2) for _ in range(rng.randint(0, 5)))
        gh = multiply(g, h)
        ok = act_vertex(gh, v, G) == act_vertex(g, act_vertex(h, v, G), G)
        ok &= bool(np.array_equal(level_permutation(gh, 4, G),
                                  level_permutation(g, 4, G)[level_permutation(h, 4, G)]))
        ok &= equal(section(gh, v, G), multiply(section(g, act_vertex(h, v, G), G), section(h, v, G)), G)
        laws += ok
    order = [quotient_group(ALL, n, G).order() for n in range(1, 7)]
    specs = [[_random_word(rng, rng.randint(1, 10)) for _ in range(rng.randint(1, 3))] for _ in range(200)]
    monotone = bound = 0
    for gens in specs:
        idx = [order[n - 1] // quotient_group(gens, n, G).order() for n in range(1, 7)]
        monotone += all(x <= y for x, y in zip(idx, idx[1:]))
        bound += all(orbit_count(gens, n, G) <= idx[n - 1] for n in range(1, 7))
    reports = [nr_tree_estimate(SubgroupSpec(f"R{i}", tuple(gens), G), 2, 5) for i, gens in enumerate(specs[:20])]
    reports.append(nr_tree_estimate(w_p(), 2, 8))
    reports.append(nr_tree_estimate(parabolic(6), 2, 6))
    closed = sum(r.downward_closed() for r in reports)
    ok = laws == 1000 and monotone == 200 and bound == 200 and closed == len(reports)
    detail = (f"laws {laws}/1000, index monotone {monotone}/200, orbit bound {bound}/200, "
              f"NR downward closed {closed}/{len(reports)}")
    return ok, detail


def test_criterion_11():
    ok, detail = criterion_11()
    record(11, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    for k in range(1, 11):
        run_criterion(k)
    record(11, *criterion_11())
    for k in sorted(ACCEPTANCE_LINES):
        print(ACCEPTANCE_LINES[k])
