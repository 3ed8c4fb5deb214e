"""Forbidden-pattern test for the closure of the Grigorchuk group, plus the
finite witnesses around level-4 vertex stabilizers and the lattice over B.

Pattern masks: the 15 vertices of levels 0..3 are numbered breadth first,
left to right (vertex ``v`` of length ``k`` gets bit ``2^k - 1 + code(v)``);
a set bit means the label at that vertex is the transposition.

Pattern table file layout (little endian)::

    bytes 0..3   magic  b"GPAT"
    bytes 4..7   uint32 number of masks
    then         uint16 masks, strictly increasing
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from .core import Portrait, Word, act_vertex, parse_word, portrait_of, section
from .permquotient import (
    LevelQuotient,
    enumerate_subgroups_small,
    exhaustive_elements,
    level_permutation,
    normal_closure,
    quotient_group,
    subgroup_elements,
)
from .presets import grigorchuk
from .subgroups import registry_for
from .wordproblem import equal, is_trivial

WINDOW_DEPTH = 3
MAGIC = b"GPAT"
TABLE_FILE = "allowed_patterns.bin"
TABLE_SHA256 = "53413285cb3436f9dadef1f8420cf8e8a9cb1914bf03c5e09d0c3132e7ff85ab"


class PatternTableError(ValueError):
    pass


@dataclass(frozen=True)
class PatternTable:
    allowed: frozenset

    def __contains__(self, mask: int) -> bool:
        return mask in self.allowed

    def __len__(self):
        return len(self.allowed)


def _bit(v) -> int:
    code = 0
    for x in v:
        code = 2 * code + x
    return (1 << len(v)) - 1 + code


def portrait_mask(p: Portrait, at=()) -> int:
    """Mask of the depth-3 window of ``p`` rooted at ``at``."""
    at = tuple(at)
    mask = 0
    for k in range(WINDOW_DEPTH + 1):
        for code in range(1 << k):
            v = tuple((code >> (k - 1 - i)) & 1 for i in range(k))
            if p.labels[at + v] != (0, 1):
                mask |= 1 << _bit(v)
    return mask


def level4_mask(perm) -> int:
    """Window mask of a level-4 permutation (labels of levels 0..3)."""
    mask = 0
    for k in range(WINDOW_DEPTH + 1):
        for code in range(1 << k):
            leaf = (2 * code) << (WINDOW_DEPTH - k)   # leftmost leaf under v0
            digit = (int(perm[leaf]) >> (WINDOW_DEPTH - k)) & 1
            if digit:
                mask |= 1 << ((1 << k) - 1 + code)
    return mask


def _level4_group() -> LevelQuotient:
    G = grigorchuk()
    return quotient_group([G.gen(n) for n in G.names], WINDOW_DEPTH + 1, G)


def compute_allowed_patterns() -> PatternTable:
    """Masks of every element of the level-4 quotient, from its stabilizer chain."""
    return PatternTable(frozenset(level4_mask(g) for g in _level4_group().elements()))


def exhaustive_pattern_count() -> int:
    """Independent count: closure of the generator images under multiplication."""
    Q = _level4_group()
    elems = exhaustive_elements(Q.perms, Q.degree, limit=1 << 16)
    return len({level4_mask(g) for g in elems})


def dumps_table(table: PatternTable) -> bytes:
    masks = sorted(table.allowed)
    return MAGIC + struct.pack("<I", len(masks)) + struct.pack(f"<{len(masks)}H", *masks)


def loads_table(data: bytes, expected_sha256: str | None = None) -> PatternTable:
    if expected_sha256 is not None and hashlib.sha256(data).hexdigest() != expected_sha256:
        raise PatternTableError("pattern table content hash mismatch")
    if data[:4] != MAGIC:
        raise PatternTableError("bad magic header")
    (count,) = struct.unpack_from("<I", data, 4)
    if len(data) != 8 + 2 * count:
        raise PatternTableError("truncated pattern table")
    masks = struct.unpack_from(f"<{count}H", data, 8)
    if any(x >= y for x, y in zip(masks, masks[1:])):
        raise PatternTableError("masks are not strictly increasing")
    return PatternTable(frozenset(masks))


def table_path() -> Path:
    return Path(str(resources.files("grigcalc") / "data" / TABLE_FILE))


@lru_cache(maxsize=None)
def allowed_patterns() -> PatternTable:
    """The checked-in table, verified against its hash."""
    return loads_table(table_path().read_bytes(), TABLE_SHA256)


def closure_member_up_to(p: Portrait, table: PatternTable | None = None) -> bool:
    """Every depth-3 window rooted at depth <= n-4 is an allowed pattern."""
    if p.depth < WINDOW_DEPTH + 1:
        raise ValueError("portrait depth must be at least 4")
    if p.degree != 2:
        raise ValueError("pattern test is for the binary tree")
    table = table or allowed_patterns()
    for k in range(p.depth - WINDOW_DEPTH):
        for code in range(1 << k):
            v = tuple((code >> (k - 1 - i)) & 1 for i in range(k))
            if portrait_mask(p, v) not in table:
                return False
    return True


# ------------------------------------------------------------ level-4 witnesses

@dataclass
class WitnessCheck:
    name: str
    window_agrees: bool
    fixes_vertex: bool
    section_trivial: bool

    @property
    def ok(self) -> bool:
        return self.window_agrees and self.fixes_vertex and self.section_trivial


@dataclass
class Stab14Report:
    checks: list
    section_values: dict
    sanity_c_section_is_d: bool
    sanity_c_not_fixing: bool

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks) and self.sanity_c_section_is_d and self.sanity_c_not_fixing


def verify_stab14_witnesses() -> Stab14Report:
    G = grigorchuk()
    R = registry_for(G)
    W = G.word
    v = (1, 1, 1, 1)
    ac4 = W("(a c)^4")
    ac4_1 = R.embed("1", ac4)
    ac4_11 = R.embed("11", ac4)
    b_1 = R.entry("1", "b")
    if not equal(b_1, W("d"), G):
        raise AssertionError("b embedded at 1 should be d")
    pairs = {
        "psi(c)": (W("c"), W("c") * ac4_1 * ac4_11),
        "psi(b@1)": (b_1, b_1 * ac4_11),
        "psi((ac)^4)": (ac4, ac4 * ac4_1 * ac4_11),
    }
    checks = []
    for name, (s, t) in pairs.items():
        same = portrait_mask(portrait_of(s, 4, G)) == portrait_mask(portrait_of(t, 4, G))
        fixes = act_vertex(t, v, G) == v
        checks.append(WitnessCheck(name, same, fixes, fixes and is_trivial(section(t, v, G), G)))
    values = {}
    for name, w, expect in (("c", W("c"), "d"), ("b@1", b_1, "b"), ("(ac)^4", ac4, "d"),
                            ("(ac)^4@1", ac4_1, "c"), ("(ac)^4@11", ac4_11, "b")):
        values[name] = equal(section(w, v, G), W(expect), G)
    c_sec = section(W("c"), v, G)
    return Stab14Report(checks, values, equal(c_sec, W("d"), G), not is_trivial(c_sec, G))


# --------------------------------------------------------------- lattice over B

LATTICE_ROWS = {
    "G": ("a", "b", "c"),
    "J02": ("b", "a", "a^c"),
    "J05": ("b", "a c"),
    "H": ("c", "c^a", "d", "d^a"),
    "J15": ("b", "b^a", "d d^a"),
    "S2300": ("b", "c", "b^a", "b^(a c a)", "c^(a c a)"),
    "S2400": ("a", "b", "b^(d a)", "a^(d a d)"),
    "B": ("b", "b^a", "b^(a d a)"),
}
CONJUGATE_PAIRS = (("S2300", "a"), ("S2400", "d"))
LATTICE_LEVEL = 4


@dataclass
class LatticeReport:
    level: int
    coset_count: int
    quotient_order: int
    dihedral: bool
    subgroups: list
    indices: list
    matches: dict
    distinct: bool
    conjugates: dict
    normal: dict = field(default_factory=dict)


def _is_dihedral_8(Q: LevelQuotient) -> bool:
    elems = Q.elements()
    if len(elems) != 8:
        return False
    orders = []
    ident = np.arange(Q.degree)
    for g in elems:
        k, x = 1, g
        while not np.array_equal(x, ident):
            x = g[x]
            k += 1
        orders.append(k)
    abelian = all(np.array_equal(g[h], h[g]) for g in elems for h in elems)
    return not abelian and orders.count(2) == 5 and orders.count(4) == 2


def coset_action(G, n: int = LATTICE_LEVEL):
    """Permutation action of words on the cosets of B at level ``n``.

    Returns ``(action, coset_count)`` with ``action(word) -> perm``.
    """
    QG = quotient_group([G.gen(x) for x in G.names], n, G)
    QB = normal_closure(QG, [level_permutation(G.gen("b"), n, G)])
    reps = [np.arange(QG.degree)]
    inv_reps = [reps[0]]
    queue = [0]

    def locate(g):
        for i, r_inv in enumerate(inv_reps):
            if QB.contains(r_inv[g]):
                return i
        return None

    while queue:
        i = queue.pop(0)
        for s in QG.perms:
            g = s[reps[i]]
            j = locate(g)
            if j is None:
                reps.append(g)
                inv_reps.append(np.argsort(g))
                j = len(reps) - 1
                queue.append(j)
    k = len(reps)

    def action(w: Word) -> np.ndarray:
        p = level_permutation(w, n, G)
        return np.array([locate(p[r]) for r in reps], dtype=np.int64)

    return action, k


def subgroup_lattice_over_B() -> LatticeReport:
    G = grigorchuk()
    action, k = coset_action(G)
    gen_perms = [action(G.gen(x)) for x in G.names]
    Q = LevelQuotient.from_perms(gen_perms, k)
    subs = enumerate_subgroups_small(Q)
    keys = [subgroup_elements(S) for S in subs]
    order = Q.order()
    indices = [order // S.order() for S in subs]

    def image(words):
        return LevelQuotient.from_perms([action(parse_word(w, G)) for w in words], k)

    matches = {}
    for name, words in LATTICE_ROWS.items():
        key = subgroup_elements(image(words))
        matches[name] = keys.index(key) if key in keys else None
    found = [m for m in matches.values() if m is not None]
    distinct = len(found) == len(LATTICE_ROWS) and len(set(found)) == len(found)
    conjugates = {}
    for name, by in CONJUGATE_PAIRS:
        words = [f"({w})^{by}" for w in LATTICE_ROWS[name]]
        key = subgroup_elements(image(words))
        idx = keys.index(key) if key in keys else None
        conjugates[name] = {"by": by, "member": idx, "differs": idx is not None and idx != matches[name],
                            "same_index": idx is not None and indices[idx] == indices[matches[name]]
                            if matches[name] is not None else False}
    normal = {}
    for name, idx in matches.items():
        if idx is None:
            continue
        S = subs[idx]
        normal[name] = all(subgroup_elements(LevelQuotient.from_perms(
            [np.argsort(g)[s[g]] for s in S.perms], k)) == keys[idx] for g in gen_perms)
    return LatticeReport(LATTICE_LEVEL, k, order, _is_dihedral_8(Q), subs, indices, matches,
                         distinct, conjugates, normal)
