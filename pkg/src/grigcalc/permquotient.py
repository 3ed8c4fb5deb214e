"""Congruence quotients: the permutation groups induced on tree levels.

Level-n vertices are encoded big-endian, ``v -> sum v[i] d^(n-1-i)``, so the
lexicographic order of vertices is the numeric order of their codes.
Permutations are numpy index arrays; ``p[q]`` is ``p o q`` (``q`` first).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import core
from .core import GroupPresentation, Vertex, Word, letters_of, parse_vertex

DEFAULT_SETWISE_BUDGET = 2**22
DEFAULT_SUBGROUP_BUDGET = 2**10
EXHAUSTIVE_LIMIT = 10**4


class BudgetExceeded(RuntimeError):
    pass


def budget_override(default: int) -> int:
    env = os.environ.get("GRIGCALC_BUDGET")
    return int(env) if env else default


# ------------------------------------------------------------ level permutations

def _letter_perm(G: GroupPresentation, g: int, s: int, n: int) -> np.ndarray:
    return _gen_perms(G, n)[g] if s > 0 else _gen_inv_perms(G, n)[g]


@lru_cache(maxsize=None)
def _gen_perms(G: GroupPresentation, n: int) -> tuple:
    d = G.degree
    if n == 0:
        return tuple(np.zeros(1, dtype=np.int64) for _ in G.rules)
    size = d ** (n - 1)
    out = []
    for r in G.rules:
        p = np.empty(d * size, dtype=np.int64)
        for x in range(d):
            sub = _word_perm(G, r.sections[x], n - 1)
            p[x * size:(x + 1) * size] = r.root_perm[x] * size + sub
        p.flags.writeable = False
        out.append(p)
    return tuple(out)


@lru_cache(maxsize=None)
def _gen_inv_perms(G: GroupPresentation, n: int) -> tuple:
    return tuple(np.argsort(p) for p in _gen_perms(G, n))


def _word_perm(G: GroupPresentation, w: Word, n: int) -> np.ndarray:
    p = np.arange(G.degree**n, dtype=np.int64)
    for g, s in letters_of(w):
        q = _letter_perm(G, g, s, n)
        p = p[q] if core.RIGHT_TO_LEFT else q[p]
    return p


def level_permutation(w: Word, n: int, G: GroupPresentation) -> np.ndarray:
    """Images of the level-n vertex codes under ``w``."""
    if n < 0:
        raise ValueError("level must be nonnegative")
    return _word_perm(G, w, n)


def is_identity(p: np.ndarray) -> bool:
    return bool(np.array_equal(p, np.arange(len(p))))


def perm_order(p: np.ndarray) -> int:
    seen = np.zeros(len(p), dtype=bool)
    order = 1
    for i in range(len(p)):
        if seen[i]:
            continue
        k, j = 0, i
        while not seen[j]:
            seen[j] = True
            j = p[j]
            k += 1
        order = order * k // np.gcd(order, k)
    return int(order)


# --------------------------------------------------------------- stabilizer chain

class StabChain:
    """Stabilizer chain built by deterministic Schreier-Sims over a prescribed base.

    The base is ``base_order`` followed by any remaining points, so
    ``strong[j]`` generates the pointwise stabilizer of the first ``j`` points
    of ``base_order`` for every ``j``.
    """

    def __init__(self, gens: Sequence[np.ndarray], degree: int, base_order: Sequence[int] | None = None):
        self.degree = degree
        self.identity = np.arange(degree, dtype=np.int64)
        order = [] if base_order is None else [int(b) for b in base_order]
        seen = set(order)
        self.full_base = order + [b for b in range(degree) if b not in seen]
        self.strong: list[list[np.ndarray]] = [[] for _ in self.full_base]
        self.orbits: list[dict] = [{b: (self.identity, self.identity)} for b in self.full_base]
        self._checked: list[set] = [set() for _ in self.full_base]
        self._depth = 0   # levels >= _depth have trivial stabilizer
        for g in gens:
            g = np.asarray(g, dtype=np.int64)
            if not np.array_equal(g, self.identity):
                self._add(g, self._first_moved_level(g))
        self._complete()

    @property
    def base(self) -> list[int]:
        """Base points with nontrivial basic orbit."""
        return [b for b, orb in zip(self.full_base, self.orbits) if len(orb) > 1]

    def _first_moved_level(self, g) -> int:
        for j, b in enumerate(self.full_base):
            if g[b] != b:
                return j
        raise AssertionError("identity has no moved base point")

    def _add(self, h: np.ndarray, level: int, lowest: int = 0):
        """``h`` fixes the first ``level`` base points; add it to levels lowest..level."""
        for j in range(lowest, level + 1):
            self.strong[j].append(h)
            self._extend_orbit(j)
        self._depth = max(self._depth, level + 1)

    def _extend_orbit(self, j: int):
        orbit = self.orbits[j]
        queue = list(orbit)
        gens = self.strong[j]
        while queue:
            pt = queue.pop()
            u = orbit[pt][0]
            for s in gens:
                img = int(s[pt])
                if img not in orbit:
                    v = s[u]
                    orbit[img] = (v, np.argsort(v))
                    queue.append(img)

    def sift(self, g: np.ndarray, start: int = 0):
        """Return ``(residue, level)``; the residue is the identity iff g is a member."""
        for j in range(start, self._depth):
            b = self.full_base[j]
            img = int(g[b])
            if img == b:
                continue
            entry = self.orbits[j].get(img)
            if entry is None:
                return g, j
            g = entry[1][g]
        if np.array_equal(g, self.identity):
            return g, self._depth
        return g, self._first_moved_level(g)

    def _complete(self):
        j = self._depth - 1
        while j >= 0:
            restart = None
            orbit = self.orbits[j]
            for pt in list(orbit):
                u = orbit[pt][0]
                for s in list(self.strong[j]):
                    key = (pt, id(s))
                    if key in self._checked[j]:
                        continue
                    self._checked[j].add(key)
                    schreier = orbit[int(s[pt])][1][s[u]]
                    h, level = self.sift(schreier, j + 1)
                    if not np.array_equal(h, self.identity):
                        self._add(h, level, lowest=j + 1)
                        restart = level
                        break
                if restart is not None:
                    break
            j = restart if restart is not None else j - 1

    # -- queries
    def order(self) -> int:
        out = 1
        for orb in self.orbits:
            out *= len(orb)
        return out

    def contains(self, g) -> bool:
        h, _ = self.sift(np.asarray(g, dtype=np.int64))
        return bool(np.array_equal(h, self.identity))

    def stabilizer_generators(self, k: int) -> list[np.ndarray]:
        """Generators of the pointwise stabilizer of ``base[:k]``."""
        return list(self.strong[k]) if k < len(self.strong) else []

    def elements(self):
        """Every group element, as products of transversal elements."""
        levels = [list(orb.values()) for orb in self.orbits[:self._depth] if len(orb) > 1]
        out = [self.identity]
        for trans in reversed(levels):
            out = [u[g] for u, _ in trans for g in out]
        return out


def exhaustive_elements(gens: Sequence[np.ndarray], degree: int, limit: int = EXHAUSTIVE_LIMIT):
    """Closure of ``gens`` under multiplication; independent of :class:`StabChain`.

    Returns ``None`` when more than ``limit`` elements turn up.
    """
    ident = np.arange(degree, dtype=np.int64)
    gens = [np.asarray(g, dtype=np.int64) for g in gens]
    seen = {ident.tobytes(): ident}
    queue = [ident]
    while queue:
        x = queue.pop()
        for g in gens:
            y = g[x]
            key = y.tobytes()
            if key not in seen:
                seen[key] = y
                if len(seen) > limit:
                    return None
                queue.append(y)
    return list(seen.values())


# ------------------------------------------------------------------ quotients

@dataclass
class LevelQuotient:
    """A permutation group on the level-n vertices (or on any finite set).

    ``generators`` pairs each generating permutation with the word it came
    from, or ``None`` for permutations produced by chain computations.
    """

    n: int | None
    degree: int
    generators: list
    base_order: tuple | None = None
    _chain: StabChain | None = field(default=None, repr=False)

    @classmethod
    def from_perms(cls, perms, degree: int, n: int | None = None, base_order=None) -> "LevelQuotient":
        return cls(n, degree, [(None, np.asarray(p, dtype=np.int64)) for p in perms], base_order)

    @property
    def perms(self) -> list[np.ndarray]:
        return [p for _, p in self.generators]

    @property
    def chain(self) -> StabChain:
        if self._chain is None:
            self._chain = StabChain(self.perms, self.degree, self.base_order)
        return self._chain

    def order(self) -> int:
        return self.chain.order()

    def contains(self, perm) -> bool:
        return self.chain.contains(perm)

    def contains_group(self, other: "LevelQuotient") -> bool:
        return all(self.contains(p) for p in other.perms)

    def same_group(self, other: "LevelQuotient") -> bool:
        return self.order() == other.order() and self.contains_group(other)

    def orbits(self) -> list[list[int]]:
        return _orbits(self.perms, self.degree)

    def elements(self) -> list[np.ndarray]:
        return self.chain.elements()


def _orbits(perms, degree) -> list[list[int]]:
    parent = list(range(degree))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p in perms:
        for i in range(degree):
            a, b = find(i), find(int(p[i]))
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict = {}
    for i in range(degree):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


def quotient_group(gens: Sequence[Word], n: int, G: GroupPresentation) -> LevelQuotient:
    if n < 0:
        raise ValueError("level must be nonnegative")
    return LevelQuotient(n, G.degree**n, [(w, level_permutation(w, n, G)) for w in gens])


def orbits_on_level(gens: Sequence[Word], n: int, G: GroupPresentation) -> list[list[Vertex]]:
    perms = [level_permutation(w, n, G) for w in gens]
    return [[G.geometry.decode(i, n) for i in orb] for orb in _orbits(perms, G.degree**n)]


def orbit_count(gens: Sequence[Word], n: int, G: GroupPresentation) -> int:
    perms = [level_permutation(w, n, G) for w in gens]
    return len(_orbits(perms, G.degree**n))


class NotContained(ValueError):
    pass


def index_at_level(gens_g: Sequence[Word], gens_h: Sequence[Word], n: int, G: GroupPresentation) -> int:
    QG = quotient_group(gens_g, n, G)
    QH = quotient_group(gens_h, n, G)
    return subgroup_index(QG, QH)


def subgroup_index(QG: LevelQuotient, QH: LevelQuotient) -> int:
    if not QG.contains_group(QH):
        raise NotContained("subgroup is not contained in the ambient group at this level")
    og, oh = QG.order(), QH.order()
    assert og % oh == 0
    return og // oh


def _points(Q: LevelQuotient, points, d: int) -> list[int]:
    out = []
    for p in points:
        if isinstance(p, (int, np.integer)):
            out.append(int(p))
        else:
            v = parse_vertex(p, d)
            if Q.n is not None and len(v) != Q.n:
                raise ValueError(f"vertex {v} is not on level {Q.n}")
            idx = 0
            for x in v:
                idx = idx * d + x
            out.append(idx)
    return sorted(set(out))


def _tree_degree(Q: LevelQuotient) -> int:
    if not Q.n:
        return Q.degree
    return round(Q.degree ** (1 / Q.n))


def pointwise_stabilizer(Q: LevelQuotient, points) -> LevelQuotient:
    pts = _points(Q, points, _tree_degree(Q))
    chain = StabChain(Q.perms, Q.degree, pts)
    return LevelQuotient.from_perms(chain.stabilizer_generators(len(pts)), Q.degree, Q.n)


def subtree_points(v: Vertex, n: int, d: int) -> list[int]:
    size = d ** (n - len(v))
    start = 0
    for x in v:
        start = start * d + x
    start *= size
    return list(range(start, start + size))


def rigid_stabilizer_at_level(Q: LevelQuotient, v, n: int | None = None) -> LevelQuotient:
    """Elements of ``Q`` fixing every level-n vertex outside the subtree at ``v``."""
    d = _tree_degree(Q)
    v = parse_vertex(v, d)
    n = Q.n if n is None else n
    if n != Q.n:
        raise ValueError(f"quotient lives on level {Q.n}, not {n}")
    if len(v) > n:
        raise ValueError("vertex below the quotient level")
    inside = set(subtree_points(v, n, d))
    outside = [i for i in range(Q.degree) if i not in inside]
    chain = StabChain(Q.perms, Q.degree, outside)
    return LevelQuotient.from_perms(chain.stabilizer_generators(len(outside)), Q.degree, Q.n)


def _greedy_generators(elements, degree, n):
    sub = LevelQuotient.from_perms([], degree, n)
    gens = []
    for g in elements:
        if not sub.contains(g):
            gens.append(g)
            sub = LevelQuotient.from_perms(gens, degree, n)
    return sub


def setwise_stabilizer_brute(Q: LevelQuotient, S, budget: int | None = None) -> LevelQuotient:
    budget = budget_override(DEFAULT_SETWISE_BUDGET) if budget is None else budget
    if Q.order() > budget:
        raise BudgetExceeded(f"group order {Q.order()} exceeds setwise-stabilizer budget {budget}")
    pts = _points(Q, S, _tree_degree(Q))
    target = np.zeros(Q.degree, dtype=bool)
    target[pts] = True
    keep = [g for g in Q.elements() if target[g[pts]].all()]
    return _greedy_generators(keep, Q.degree, Q.n)


def ray_set_stabilizer(Q: LevelQuotient, rays, budget: int | None = None) -> LevelQuotient:
    """Setwise stabilizer of the level-n prefixes of finitely many rays."""
    return setwise_stabilizer_brute(Q, [r.prefix(Q.n) for r in rays], budget)


# ------------------------------------------------------------ small subgroups

def _closure(gen_keys, mult, identity):
    elems = {identity}
    frontier = [identity]
    while frontier:
        x = frontier.pop()
        for g in gen_keys:
            y = mult(g, x)
            if y not in elems:
                elems.add(y)
                frontier.append(y)
    return frozenset(elems)


def enumerate_subgroups_small(Q: LevelQuotient, budget: int | None = None) -> list[LevelQuotient]:
    """All subgroups of a small group, sorted by (order, element codes)."""
    budget = budget_override(DEFAULT_SUBGROUP_BUDGET) if budget is None else budget
    if Q.order() > budget:
        raise BudgetExceeded(f"group order {Q.order()} exceeds subgroup-enumeration budget {budget}")
    elems = [tuple(int(x) for x in g) for g in Q.elements()]
    identity = tuple(range(Q.degree))

    def mult(g, h):
        return tuple(g[i] for i in h)

    cyclic = {}
    for g in elems:
        cyclic.setdefault(_closure([g], mult, identity), g)
    found: dict = {frozenset([identity]): []}
    layer = [frozenset([identity])]
    while layer:
        nxt = []
        for H in layer:
            for C, g in cyclic.items():
                if C <= H:
                    continue
                J = _closure(found[H] + [g], mult, identity)
                if J not in found:
                    found[J] = found[H] + [g]
                    nxt.append(J)
        layer = nxt
    subs = sorted(found, key=lambda H: (len(H), sorted(H)))
    return [LevelQuotient.from_perms([np.array(g) for g in found[H]], Q.degree, Q.n) for H in subs]


def subgroup_elements(Q: LevelQuotient) -> frozenset:
    return frozenset(tuple(int(x) for x in g) for g in Q.elements())


def normal_closure(QG: LevelQuotient, perms) -> LevelQuotient:
    """Smallest subgroup containing ``perms`` and normalized by ``QG``."""
    gens = [np.asarray(p, dtype=np.int64) for p in perms]
    H = LevelQuotient.from_perms(gens, QG.degree, QG.n)
    conj = [(g, np.argsort(g)) for g in QG.perms]
    queue = list(gens)
    while queue:
        h = queue.pop()
        for g, gi in conj:
            x = gi[h[g]]
            if not H.contains(x):
                gens.append(x)
                queue.append(x)
                H = LevelQuotient.from_perms(gens, QG.degree, QG.n)
    return H
