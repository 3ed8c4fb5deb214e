"""Reproducible verification suite for the explicit identities and finite checks.

Each check belongs to a numbered criterion and a topic tag. ``run_suite``
returns one :class:`CheckResult` per check, in a fixed order.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from . import core
from .core import Word, parse_word, portrait_of, root_permutation, section
from .ggs_analysis import circulant, circulant_invertible, ggs_normal_form, reassemble
from .grig_closure import (
    allowed_patterns,
    closure_member_up_to,
    exhaustive_pattern_count,
    portrait_mask,
    subgroup_lattice_over_B,
    verify_stab14_witnesses,
)
from .permquotient import (
    LevelQuotient,
    exhaustive_elements,
    level_permutation,
    normal_closure,
    orbit_count,
    perm_order,
    quotient_group,
    rigid_stabilizer_at_level,
)
from .presets import GGSVector, grigorchuk, gupta_sidki, is_torsion_ggs
from .subgroups import (
    BLOCK_STRUCTURE,
    GENERALIZED_PARABOLIC,
    RIST_CERTIFIED,
    SubgroupSpec,
    classify,
    diagonal_subgroup,
    nr_tree_estimate,
    registry_for,
    rist_subgroup,
    section_subgroup,
    spec_from_strings,
    stabilizer_schreier_generators,
    whole_group,
)
from .wordproblem import canonical, element_order, equal, is_trivial

PARABOLIC_DEPTH = 8


@dataclass
class CheckResult:
    name: str
    criterion: int
    tag: str
    status: str
    witness: dict
    seconds: float
    command: str

    def as_dict(self) -> dict:
        return {"name": self.name, "criterion": self.criterion, "tag": self.tag, "status": self.status,
                "witness": self.witness, "seconds": round(self.seconds, 3), "command": self.command}


@dataclass
class Check:
    name: str
    criterion: int
    tag: str
    fn: Callable[[], tuple]


CHECKS: list[Check] = []


def check(name: str, criterion: int, tag: str):
    def deco(fn):
        CHECKS.append(Check(name, criterion, tag, fn))
        return fn
    return deco


# ------------------------------------------------------------------ builders

@lru_cache(maxsize=None)
def G() -> core.GroupPresentation:
    return grigorchuk()


def W(text: str) -> Word:
    return parse_word(text, G())


def all_gens(grp=None) -> list[Word]:
    grp = grp or G()
    return [grp.gen(n) for n in grp.names]


def section_identity(word: str, targets: tuple[str, ...]) -> dict:
    """Exact check of ``word = (targets...)`` with trivial root permutation."""
    grp = G()
    w = W(word)
    root_ok = root_permutation(w, grp) == tuple(range(grp.degree))
    secs = [section(w, (x,), grp) for x in range(grp.degree)]
    same = [equal(s, W(t), grp) for s, t in zip(secs, targets)]
    return {"ok": root_ok and all(same), "root_trivial": root_ok, "per_coordinate": same,
            "sections": [grp.fmt(canonical(s, grp)) or "1" for s in secs]}


@lru_cache(maxsize=None)
def B_quotient(n: int) -> LevelQuotient:
    QG = quotient_group(all_gens(), n, G())
    return normal_closure(QG, [level_permutation(W("b"), n, G())])


@lru_cache(maxsize=None)
def K_quotient(n: int) -> LevelQuotient:
    QG = quotient_group(all_gens(), n, G())
    return normal_closure(QG, [level_permutation(W("(a b)^2"), n, G())])


@lru_cache(maxsize=None)
def w_p() -> SubgroupSpec:
    grp = G()
    R = registry_for(grp)
    gens = [W("a"), W("d d^a"), W("d^(a c) d^(a c a)"), W("(a c)^4")]
    gens += R.k_generators_at("01") + R.k_generators_at("11")
    return SubgroupSpec("WP", tuple(canonical(g, grp) for g in gens), grp)


@lru_cache(maxsize=None)
def w_l() -> SubgroupSpec:
    return spec_from_strings("WL", ["a", "b a b", "c a d a b"], G())


@lru_cache(maxsize=None)
def parabolic(depth: int = PARABOLIC_DEPTH) -> SubgroupSpec:
    """Schreier generators of Stab(1^depth): a truncation of the ray stabilizer."""
    P = stabilizer_schreier_generators(whole_group(G()), (1,) * depth)
    return SubgroupSpec(f"Stab(1^{depth})", P.generators, G())


def _strictly_increasing_run(seq, length) -> bool:
    run = 1
    for x, y in zip(seq, seq[1:]):
        run = run + 1 if y > x else 1
        if run >= length:
            return True
    return False


# ------------------------------------------------------------- convention

@check("convention.ggs-anchor", 0, "convention")
def _():
    # b_1 = a b a^-1 carries b in coordinate 0
    grp = gupta_sidki(3)
    w = parse_word("a b a'", grp)
    targets = ["b", "a", "a^-1"]
    same = [equal(section(w, (x,), grp), parse_word(t, grp), grp) for x, t in enumerate(targets)]
    return all(same), {"sections": [grp.fmt(section(w, (x,), grp)) for x in range(3)],
                       "right_to_left": core.RIGHT_TO_LEFT}


@check("convention.grigorchuk-anchors", 0, "convention")
def _():
    a = section_identity("d d^a", ("b", "b"))
    b = section_identity("a c a d a b a", ("b", "a b a"))
    return a["ok"] and b["ok"], {"dd^a": a, "acadaba": b}


# -------------------------------------------------------------- criterion 1

IDENTITIES = {
    "b=(a,c)": ("b", ("a", "c")),
    "c=(a,d)": ("c", ("a", "d")),
    "d=(1,b)": ("d", ("1", "b")),
    "dd^a=(b,b)": ("d d^a", ("b", "b")),
    "d^ac d^aca=(aba,aba)": ("d^(a c) d^(a c a)", ("a b a", "a b a")),
    "(ac)^4=(dada,dada)": ("(a c)^4", ("d a d a", "d a d a")),
    "(ac)^4=(dada,adad)": ("(a c)^4", ("d a d a", "a d a d")),
    "acadaba=(b,aba)": ("a c a d a b a", ("b", "a b a")),
    "baba=(ca,ac)": ("b a b a", ("c a", "a c")),
}

for _label, (_word, _targets) in IDENTITIES.items():
    def _make(word=_word, targets=_targets):
        def fn():
            r = section_identity(word, targets)
            return r["ok"], r
        return fn
    CHECKS.append(Check(f"identity.{_label}", 1, "identities", _make()))


@check("identity.abab=(ca,ac) (companion)", 1, "identities-extra")
def _():
    r = section_identity("a b a b", ("c a", "a c"))
    return r["ok"], r


# -------------------------------------------------------------- criterion 2

@check("wordproblem.relations", 2, "wordproblem")
def _():
    grp = G()
    trivial = ["a^2", "b^2", "c^2", "d^2", "b c d", "b c d'", "b d c'", "c d b'"]
    res = {w: is_trivial(W(w), grp) for w in trivial}
    nontrivial = {w: not is_trivial(W(w), grp) for w in ["a b", "a c", "a d"]}
    return all(res.values()) and all(nontrivial.values()), {"trivial": res, "nontrivial": nontrivial}


@check("wordproblem.orders", 2, "wordproblem")
def _():
    grp = G()
    expected = {"a": 2, "d": 2, "a d": 4, "a c": 8, "a b": 16}
    got = {w: element_order(W(w), grp) for w in expected}
    consistent = {}
    for w, k in got.items():
        level_orders = [perm_order(level_permutation(W(w), n, grp)) for n in range(1, 7)]
        consistent[w] = isinstance(k, int) and all(k % o == 0 for o in level_orders) and max(level_orders) == k
    ok = all(got[w] == k for w, k in expected.items()) and all(consistent.values())
    return ok, {"orders": {w: str(k) for w, k in got.items()}, "level_consistent": consistent}


# -------------------------------------------------------------- criterion 3

@check("quotients.chain-vs-exhaustive", 3, "quotients")
def _():
    out = {}
    for n in range(1, 6):
        Q = quotient_group(all_gens(), n, G())
        ex = exhaustive_elements(Q.perms, Q.degree)
        out[n] = {"chain": Q.order(), "exhaustive": None if ex is None else len(ex)}
    ok = all(v["exhaustive"] is None or v["exhaustive"] == v["chain"] for v in out.values())
    return ok, out


@check("quotients.index-B-K", 3, "quotients")
def _():
    rows = {}
    for n in range(1, 7):
        og = quotient_group(all_gens(), n, G()).order()
        ob, ok_ = B_quotient(n).order(), K_quotient(n).order()
        rows[n] = {"G:B": og // ob, "G:K": og // ok_, "B:K": ob // ok_}
    ok = all(rows[n]["G:B"] == 8 and rows[n]["G:K"] == 16 and rows[n]["B:K"] == 2 for n in range(4, 7))
    return ok, rows


@check("quotients.K-generators", 3, "quotients")
def _():
    grp = G()
    Kg = [W("(a b)^2"), W("(b d^a)^2"), W("(b^a d)^2")]
    same = {n: quotient_group(Kg, n, grp).same_group(K_quotient(n)) for n in range(1, 7)}
    return all(same.values()), same


# -------------------------------------------------------------- criterion 4

@check("rist.level1-BxB", 4, "rist")
def _():
    grp = G()
    R = registry_for(grp)
    BB = list(rist_subgroup("0", R).generators) + list(rist_subgroup("1", R).generators)
    rows = {}
    for n in range(3, 7):
        Q = quotient_group(all_gens(), n, grp)
        r0, r1 = rigid_stabilizer_at_level(Q, "0"), rigid_stabilizer_at_level(Q, "1")
        prod = LevelQuotient.from_perms(r0.perms + r1.perms, Q.degree, n)
        img = quotient_group(BB, n, grp)
        rows[n] = {"rist0*rist1": prod.order(), "image BxB": img.order(), "equal": prod.same_group(img)}
    return all(r["equal"] for r in rows.values()), rows


# -------------------------------------------------------------- criterion 5

@check("lattice.over-B", 5, "lattice")
def _():
    L = subgroup_lattice_over_B()
    ok = (len(L.subgroups) == 10 and sorted(L.indices) == [1, 2, 2, 2, 4, 4, 4, 4, 4, 8]
          and L.dihedral and L.quotient_order == 8 and L.distinct
          and all(c["differs"] and c["same_index"] for c in L.conjugates.values()))
    return ok, {"count": len(L.subgroups), "indices": L.indices, "dihedral": L.dihedral,
                "matches": L.matches, "conjugates": L.conjugates, "normal": L.normal}


# -------------------------------------------------------------- criterion 6

@check("wl.transitive", 6, "wl")
def _():
    counts = {n: orbit_count(w_l().generators, n, G()) for n in range(1, 9)}
    return all(c == 1 for c in counts.values()), counts


@check("wl.index-growth", 6, "wl")
def _():
    idx = {}
    for n in range(1, 9):
        idx[n] = quotient_group(all_gens(), n, G()).order() // w_l().quotient(n).order()
    return _strictly_increasing_run(list(idx.values()), 3), idx


@check("wl.alternate-generators", 6, "wl")
def _():
    alt = spec_from_strings("WL'", ["a", "b a b", "c a c"], G())
    same = {n: alt.quotient(n).same_group(w_l().quotient(n)) for n in range(1, 9)}
    return all(same.values()), same


# -------------------------------------------------------------- criterion 7

@check("wp.orbits", 7, "wp")
def _():
    counts = {n: orbit_count(w_p().generators, n, G()) for n in range(2, 9)}
    return all(c == 2 for c in counts.values()), counts


@check("wp.classify", 7, "wp")
def _():
    rep = classify(w_p(), 8)
    return rep.verdict == BLOCK_STRUCTURE, {"verdict": rep.verdict, "orbit_counts": rep.orbit_counts,
                                            "notes": rep.notes}


@check("wp.nr-tree", 7, "wp")
def _():
    rep = nr_tree_estimate(w_p(), 2, 8)
    status = {core.vertex_str(v): e.status for v, e in rep.vertices.items()}
    ok = status["01"] == RIST_CERTIFIED and status["11"] == RIST_CERTIFIED and rep.downward_closed()
    return ok, status


@check("parabolic.orbit-growth", 7, "wp")
def _():
    P = parabolic()
    counts = [orbit_count(P.generators, n, G()) for n in range(1, PARABOLIC_DEPTH + 1)]
    rep = classify(P, PARABOLIC_DEPTH)
    ok = all(x < y for x, y in zip(counts, counts[1:])) and rep.verdict == GENERALIZED_PARABOLIC
    return ok, {"orbit_counts": counts, "verdict": rep.verdict}


# -------------------------------------------------------------- criterion 8

@check("ggs.torsion-criterion", 8, "ggs")
def _():
    import itertools
    bad = []
    for p in (3, 5):
        for e in itertools.product(range(p), repeat=p - 1):
            if not any(e):
                continue
            if is_torsion_ggs(GGSVector(p, e)) != (sum(e) % p == 0):
                bad.append((p, e))
    return not bad, {"mismatches": bad}


@check("ggs.normal-form-b", 8, "ggs")
def _():
    grp = gupta_sidki(3)
    rec = ggs_normal_form(grp.gen("b"), grp)
    secs_ok = [equal(s, parse_word(t, grp), grp) for s, t in zip(rec.sections, ["a", "a^-1", "b"])]
    d_ok = [is_trivial(d, grp) for d in rec.d_words]
    ok = rec.n.entries == (1, 0, 0) and all(secs_ok) and all(d_ok)
    return ok, {"n": rec.n.entries, "alpha": rec.alpha.entries, "beta": rec.beta.entries}


@check("ggs.normal-form-roundtrip", 8, "ggs")
def _():
    grp = gupta_sidki(3)
    rng = random.Random(20240501)
    done = 0
    for _ in range(200):
        toks = [(rng.randrange(2), rng.choice([1, 2])) for _ in range(rng.randint(0, 14))]
        w = Word(tuple(toks))
        ea = sum(e for g, e in w.tokens if g == 0) % 3
        if ea:
            w = core.multiply(w, Word(((0, -ea),)))
        rec = ggs_normal_form(w, grp)   # raises on any certification failure
        if all(equal(c, s, grp) for c, s in zip(reassemble(rec, grp), rec.sections)):
            done += 1
    return done == 200, {"certified": done}


@check("ggs.circulant-criterion", 8, "ggs")
def _():
    import itertools
    bad = []
    for p in (3, 5):
        for row in itertools.product(range(p), repeat=p):
            if sum(row) % p and not circulant_invertible(row, p):
                bad.append((p, row))
    return not bad, {"mismatches": bad, "example": circulant((1, 2), 3)}


# -------------------------------------------------------------- criterion 9

@check("closure.table-size", 9, "closure")
def _():
    t = allowed_patterns()
    chain = quotient_group(all_gens(), 4, G()).order()
    ex = exhaustive_pattern_count()
    return len(t) == chain == ex, {"table": len(t), "chain": chain, "exhaustive": ex}


@check("closure.random-words", 9, "closure")
def _():
    grp = G()
    rng = random.Random(7)
    fails = []
    for i in range(100):
        w = Word(tuple((rng.randrange(4), 1) for _ in range(rng.randint(1, 30))))
        if not closure_member_up_to(portrait_of(w, 6, grp)):
            fails.append(grp.fmt(w))
    return not fails, {"failures": fails}


@check("closure.forbidden-window", 9, "closure")
def _():
    grp = G()
    t = allowed_patterns()
    bad = next(m for m in range(1 << 15) if m not in t)
    p = portrait_of(core.IDENTITY, 6, grp)
    labels = dict(p.labels)
    for k in range(4):
        for code in range(1 << k):
            v = tuple((code >> (k - 1 - i)) & 1 for i in range(k))
            if bad >> ((1 << k) - 1 + code) & 1:
                labels[v] = (1, 0)
    forged = core.Portrait(6, 2, labels)
    return (portrait_mask(forged) == bad and not closure_member_up_to(forged)), {"mask": bad}


@check("closure.stab14-witnesses", 9, "closure")
def _():
    r = verify_stab14_witnesses()
    return r.ok, {"checks": {c.name: c.ok for c in r.checks}, "section_values": r.section_values,
                  "c|1111=d": r.sanity_c_section_is_d}


# ------------------------------------------------------------- criterion 10

@check("parabolic.sections-J02", 10, "parabolic")
def _():
    J02 = spec_from_strings("J02", ["b", "a", "a^c"], G())
    P = parabolic()
    rows = {}
    for j in (1, 2, 3):
        v = (1,) * (j - 1) + (0,)
        S = section_subgroup(P, v)
        rows[j] = all(S.quotient(n).same_group(J02.quotient(n)) for n in range(1, 7))
    return all(rows.values()), rows


# ---------------------------------------------------------- supplementary

@check("open.J15-generating-sets", 0, "supplementary")
def _():
    a = spec_from_strings("J15", ["b", "b^a", "d d^a"], G())
    b = spec_from_strings("J15'", ["b", "a b a", "d a d a"], G())
    same = {n: a.quotient(n).same_group(b.quotient(n)) for n in range(1, 9)}
    return all(same.values()), same


@check("diagonal.example-grig", 0, "supplementary")
def _():
    grp = G()
    R = registry_for(grp)
    K = [W("(a b)^2"), W("(b d^a)^2"), W("(b^a d)^2")]
    U = ["000", "01", "10"]
    D = diagonal_subgroup(U, K, [W("a"), W("b"), W("c")], R)
    ok = True
    for l, g in zip(K, D.generators):
        for u, psi in zip(U, ["a", "b", "c"]):
            ok &= equal(section(g, u, grp), core.conjugate(l, W(psi)), grp)
        for u in ["001", "11"]:
            ok &= is_trivial(section(g, u, grp), grp)
    return ok, {"generator_letters": [len(core.letters_of(g)) for g in D.generators]}


@check("lattice.literal-B-generators", 0, "supplementary")
def _():
    lit = spec_from_strings("B?", ["b", "b^a", "b^(a d a)"], G())
    idx = quotient_group(all_gens(), 4, G()).order() // lit.quotient(4).order()
    return idx == 8, {"index_at_level_4": idx}


# ------------------------------------------------------------------ runner

def select(only: str | None = None) -> list[Check]:
    if not only:
        return list(CHECKS)
    keys = [k.strip() for k in only.split(",") if k.strip()]
    return [c for c in CHECKS if any(k == c.tag or k in c.name or k == str(c.criterion) for k in keys)]


def run_check(c: Check) -> CheckResult:
    t = time.perf_counter()
    try:
        ok, witness = c.fn()
        status = "pass" if ok else "fail"
    except Exception as exc:   # a crash is reported as a failure with its message
        status, witness = "fail", {"error": f"{type(exc).__name__}: {exc}"}
    return CheckResult(c.name, c.criterion, c.tag, status, _jsonable(witness),
                       time.perf_counter() - t, f"grigcalc verify-paper --only '{c.name}'")


def run_suite(only: str | None = None) -> list[CheckResult]:
    return [run_check(c) for c in select(only)]


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k if not isinstance(k, tuple) else core.vertex_str(k)): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    return str(x)
