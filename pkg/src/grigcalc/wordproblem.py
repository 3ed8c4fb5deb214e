"""Exact word problem for bounded presentations by closing words under sections.

A word is trivial iff every word reachable from it by taking first-level
sections has trivial root permutation. For bounded presentations the
reachable set is finite, so the test is exact.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from functools import lru_cache

from .core import (
    GroupPresentation,
    Word,
    identity_perm,
    inverse,
    letters_of,
    merge_tokens,
    multiply,
    root_permutation,
    section_letters,
)

DEFAULT_ORDER_CAP = 2**12
CLOSURE_LIMIT = 500_000


class EngineRefusal(RuntimeError):
    """Raised when an input is outside what the engine can decide."""


class Unresolved:
    """Order search exceeded its cap. Not a claim of infinite order."""

    __slots__ = ("cap",)

    def __init__(self, cap):
        self.cap = cap

    def __repr__(self):
        return f"Unresolved(cap={self.cap})"

    def __eq__(self, other):
        return isinstance(other, Unresolved) and other.cap == self.cap

    def __hash__(self):
        return hash(("Unresolved", self.cap))


@dataclass
class SectionClosure:
    members: set
    edges: dict = field(default_factory=dict)


@dataclass
class RelationReport:
    passed: list
    failed: list

    @property
    def ok(self) -> bool:
        return not self.failed


class _Engine:
    """Per-presentation canonicalizer and memo tables."""

    def __init__(self, G: GroupPresentation):
        if not G.bounded:
            bad = [r.name for r in G.rules if not r.bounded]
            raise EngineRefusal(
                "word problem engine needs a bounded presentation (every section a single token); "
                f"unbounded generators: {', '.join(bad)}")
        self.G = G
        self.lock = threading.RLock()
        self.memo: dict = {}
        self.orders: dict = {}
        self.rewrites: list = []
        self.report = self._verify(G.relations)

    # relations are activated one at a time, each checked with the engine
    # running on the relations already accepted
    def _verify(self, relations) -> RelationReport:
        passed, failed = [], []
        for lhs, rhs in relations:
            if self._trivial(multiply(lhs, inverse(rhs)).tokens):
                passed.append((lhs, rhs))
                self._activate(lhs, rhs)
            else:
                failed.append((lhs, rhs))
        return RelationReport(passed, failed)

    def _activate(self, lhs: Word, rhs: Word):
        if not rhs and len(lhs.tokens) == 1:
            g, m = lhs.tokens[0]
            m = abs(m)
            if m and (g not in self.orders or m < self.orders[g]):
                self.orders[g] = m
            return
        if lhs.letter_length() > rhs.letter_length():
            self.rewrites.append((lhs.tokens, rhs.tokens))
        elif rhs.letter_length() > lhs.letter_length():
            self.rewrites.append((rhs.tokens, lhs.tokens))
        self.memo.clear()

    def canon(self, tokens) -> tuple:
        tokens = merge_tokens(tokens)
        changed = True
        while changed:
            changed = False
            if self.orders:
                out = []
                for g, e in tokens:
                    m = self.orders.get(g)
                    if m:
                        e %= m
                        if 2 * e > m:
                            e -= m
                    if e:
                        out.append((g, e))
                new = merge_tokens(out)
                if new != tokens:
                    tokens = new
                    changed = True
            for lhs, rhs in self.rewrites:
                k = len(lhs)
                i = 0
                while i + k <= len(tokens):
                    if tokens[i:i + k] == lhs:
                        tokens = merge_tokens(tokens[:i] + rhs + tokens[i + k:])
                        changed = True
                        i = max(0, i - k)
                    else:
                        i += 1
        return tokens

    def sections(self, tokens):
        letters = letters_of(Word(tokens))
        return [self.canon(section_letters(letters, x, self.G)[0]) for x in range(self.G.degree)]

    def closure(self, tokens, stop_on_nontrivial=False):
        ident = identity_perm(self.G.degree)
        start = self.canon(tokens)
        members = {start}
        edges = {}
        queue = [start]
        while queue:
            w = queue.pop()
            if stop_on_nontrivial:
                known = self.memo.get(w)
                if known is True:
                    continue
                if known is False or root_permutation(Word(w), self.G) != ident:
                    return None
            for x, s in enumerate(self.sections(w)):
                edges[(w, x)] = s
                if s not in members:
                    members.add(s)
                    if len(members) > CLOSURE_LIMIT:
                        raise EngineRefusal(f"section closure exceeded {CLOSURE_LIMIT} members")
                    queue.append(s)
        return SectionClosure(members, edges)

    def _trivial(self, tokens) -> bool:
        w = self.canon(tokens)
        if not w:
            return True
        with self.lock:
            if w in self.memo:
                return self.memo[w]
            cl = self.closure(w, stop_on_nontrivial=True)
            if cl is None:
                self.memo[w] = False
                return False
            for m in cl.members:
                self.memo[m] = True
            return True


@lru_cache(maxsize=None)
def engine(G: GroupPresentation) -> _Engine:
    return _Engine(G)


def canonical(w: Word, G: GroupPresentation) -> Word:
    """Shorten ``w`` with the engine-verified relations only."""
    return Word(engine(G).canon(w.tokens))


def section_closure(w: Word, G: GroupPresentation) -> SectionClosure:
    E = engine(G)
    cl = E.closure(w.tokens)
    return SectionClosure({Word(m) for m in cl.members},
                          {(Word(a), x): Word(b) for (a, x), b in cl.edges.items()})


def is_trivial(w: Word, G: GroupPresentation) -> bool:
    return engine(G)._trivial(w.tokens)


def equal(w1: Word, w2: Word, G: GroupPresentation) -> bool:
    return is_trivial(multiply(w1, inverse(w2)), G)


def element_order(w: Word, G: GroupPresentation, cap: int = DEFAULT_ORDER_CAP):
    """Smallest ``k <= cap`` with ``w^k = 1``, else :class:`Unresolved`.

    When the presentation declares a torsion prime only prime powers are tried.
    """
    if cap < 1:
        raise ValueError("order cap must be positive")
    p = G.torsion_prime
    if p:
        k, power = 1, w
        while k <= cap:
            if is_trivial(power, G):
                return k
            power = canonical(power.power(p), G)
            k *= p
        return Unresolved(cap)
    power = w
    for k in range(1, cap + 1):
        if is_trivial(power, G):
            return k
        power = canonical(multiply(power, w), G)
    return Unresolved(cap)


def verify_relations(G: GroupPresentation) -> RelationReport:
    """Check every declared relation; failing ones are left disabled."""
    return engine(G).report
