"""Tree geometry, words and the section calculus of wreath recursion.

An automorphism ``g`` of the d-regular rooted tree is written
``g = (g|0, ..., g|d-1) sigma`` and acts by ``g(x u) = sigma(x) g|x(u)``.
Products compose like functions: ``(g h)(v) = g(h(v))``, so the right
factor acts first and ``(g h)|x = g|h(x) . h|x``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

# Product convention. True: ``(g h)(v) = g(h(v))``. Flipping this constant
# switches every product/section/action routine to left-to-right action; the
# convention checks in ``grigcalc.verify`` then fail.
RIGHT_TO_LEFT = True

Perm = tuple[int, ...]
Vertex = tuple[int, ...]
Tokens = tuple[tuple[int, int], ...]


class WordParseError(ValueError):
    def __init__(self, message, text="", pos=None):
        self.text = text
        self.pos = pos
        if pos is not None:
            message = f"{message} (at column {pos + 1} of {text!r})"
        super().__init__(message)


class PresentationError(ValueError):
    pass


# ---------------------------------------------------------------- permutations

def identity_perm(d: int) -> Perm:
    return tuple(range(d))


def check_perm(images: Sequence[int]) -> Perm:
    images = tuple(int(x) for x in images)
    if sorted(images) != list(range(len(images))):
        raise PresentationError(f"not a permutation: {list(images)}")
    return images


def compose(p: Perm, q: Perm) -> Perm:
    """``p o q``: apply ``q`` first."""
    return tuple(p[i] for i in q)


def invert(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, x in enumerate(p):
        out[x] = i
    return tuple(out)


def perm_cycles(p: Perm) -> str:
    seen, out = set(), []
    for i in range(len(p)):
        if i in seen or p[i] == i:
            continue
        cyc, j = [i], p[i]
        seen.add(i)
        while j != i:
            seen.add(j)
            cyc.append(j)
            j = p[j]
        out.append("(" + " ".join(map(str, cyc)) + ")")
    return "".join(out) or "()"


# ---------------------------------------------------------------------- tree

@dataclass(frozen=True)
class TreeGeometry:
    degree: int

    def __post_init__(self):
        if self.degree < 2:
            raise PresentationError("tree degree must be at least 2")

    def level(self, n: int) -> list[Vertex]:
        """Level-n vertices in lexicographic order."""
        out: list[Vertex] = [()]
        for _ in range(n):
            out = [v + (x,) for v in out for x in range(self.degree)]
        return out

    def encode(self, v: Vertex) -> int:
        idx = 0
        for x in v:
            idx = idx * self.degree + x
        return idx

    def decode(self, idx: int, n: int) -> Vertex:
        out = []
        for _ in range(n):
            idx, r = divmod(idx, self.degree)
            out.append(r)
        return tuple(reversed(out))


def parse_vertex(text: str | Sequence[int], d: int | None = None) -> Vertex:
    if isinstance(text, str):
        text = text.strip()
        if text in ("", "root", "()", "ε"):
            v: Vertex = ()
        else:
            v = tuple(int(ch) for ch in text if not ch.isspace() and ch != ",")
    else:
        v = tuple(int(x) for x in text)
    if d is not None and any(not 0 <= x < d for x in v):
        raise ValueError(f"vertex {v} has a letter outside 0..{d - 1}")
    return v


def vertex_str(v: Vertex) -> str:
    return "".join(map(str, v)) if v else "root"


def orthogonal(u: Vertex, v: Vertex) -> bool:
    k = min(len(u), len(v))
    return u[:k] != v[:k]


@dataclass(frozen=True)
class RaySpec:
    """The eventually periodic ray ``preperiod . period . period ...``."""

    preperiod: Vertex
    period: Vertex

    def __post_init__(self):
        if not self.period:
            raise ValueError("ray period must be nonempty")

    def prefix(self, n: int) -> Vertex:
        out = list(self.preperiod[:n])
        while len(out) < n:
            out.append(self.period[(len(out) - len(self.preperiod)) % len(self.period)])
        return tuple(out)


# ---------------------------------------------------------------------- words

def merge_tokens(tokens: Iterable[tuple[int, int]]) -> Tokens:
    out: list[list[int]] = []
    for g, e in tokens:
        if e == 0:
            continue
        if out and out[-1][0] == g:
            out[-1][1] += e
            if out[-1][1] == 0:
                out.pop()
        else:
            out.append([g, e])
    return tuple((g, e) for g, e in out)


@dataclass(frozen=True)
class Word:
    """Product of generator tokens ``(generator index, exponent)``.

    Always kept in canonical token form: adjacent equal generators merged and
    zero exponents dropped. No other reduction happens here.
    """

    tokens: Tokens = ()

    def __post_init__(self):
        object.__setattr__(self, "tokens", merge_tokens(self.tokens))

    def __mul__(self, other: "Word") -> "Word":
        return multiply(self, other)

    def __len__(self):
        return len(self.tokens)

    def __bool__(self):
        return bool(self.tokens)

    def letter_length(self) -> int:
        return sum(abs(e) for _, e in self.tokens)

    def power(self, k: int) -> "Word":
        base = self if k >= 0 else inverse(self)
        return Word(base.tokens * abs(k))

    def format(self, names: Sequence[str]) -> str:
        if not self.tokens:
            return "1"
        parts = []
        for g, e in self.tokens:
            parts.append(names[g] if e == 1 else f"{names[g]}^{e}")
        return " ".join(parts)


IDENTITY = Word()


def multiply(w1: Word, w2: Word) -> Word:
    return Word(w1.tokens + w2.tokens)


def inverse(w: Word) -> Word:
    return Word(tuple((g, -e) for g, e in reversed(w.tokens)))


def commutator(u: Word, v: Word) -> Word:
    return Word(inverse(u).tokens + inverse(v).tokens + u.tokens + v.tokens)


def compose_words(g: Word, h: Word) -> Word:
    """The element ``g o h`` (``h`` acts first) under the product convention."""
    return multiply(g, h) if RIGHT_TO_LEFT else multiply(h, g)


def conjugate(u: Word, v: Word) -> Word:
    """``u^v = v' u v``."""
    return Word(inverse(v).tokens + u.tokens + v.tokens)


# --------------------------------------------------------------- presentations

@dataclass(frozen=True)
class GeneratorRule:
    name: str
    root_perm: Perm
    sections: tuple[Word, ...]

    @property
    def bounded(self) -> bool:
        return all(len(s.tokens) <= 1 for s in self.sections)


@dataclass(frozen=True)
class GroupPresentation:
    geometry: TreeGeometry
    rules: tuple[GeneratorRule, ...]
    relations: tuple[tuple[Word, Word], ...] = ()
    name: str = ""
    torsion_prime: int | None = None
    _letters: tuple = field(default=(), init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        d = self.geometry.degree
        names = [r.name for r in self.rules]
        if len(set(names)) != len(names):
            raise PresentationError("generator names must be unique")
        for r in self.rules:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", r.name):
                raise PresentationError(f"invalid generator name {r.name!r}")
            if len(r.root_perm) != d or sorted(r.root_perm) != list(range(d)):
                raise PresentationError(f"rule {r.name}: root permutation {list(r.root_perm)} is not a bijection of 0..{d - 1}")
            if len(r.sections) != d:
                raise PresentationError(f"rule {r.name}: expected {d} sections, got {len(r.sections)}")
            for s in r.sections:
                for g, _ in s.tokens:
                    if not 0 <= g < len(self.rules):
                        raise PresentationError(f"rule {r.name}: section references unknown generator {g}")
        # per generator: (perm, inverse perm, letter sections, inverse letter sections)
        letters = []
        for r in self.rules:
            inv = invert(r.root_perm)
            secs = tuple(_expand(s.tokens) for s in r.sections)
            inv_secs = tuple(_expand(inverse(r.sections[inv[x]]).tokens) for x in range(d))
            letters.append((r.root_perm, inv, secs, inv_secs))
        object.__setattr__(self, "_letters", tuple(letters))

    @property
    def degree(self) -> int:
        return self.geometry.degree

    @property
    def names(self) -> list[str]:
        return [r.name for r in self.rules]

    @property
    def bounded(self) -> bool:
        return all(r.bounded for r in self.rules)

    def index(self, name: str) -> int:
        for i, r in enumerate(self.rules):
            if r.name == name:
                return i
        raise KeyError(name)

    def gen(self, name: str) -> Word:
        return Word(((self.index(name), 1),))

    def word(self, text: str) -> Word:
        return parse_word(text, self)

    def fmt(self, w: Word) -> str:
        return w.format(self.names)


def _expand(tokens: Tokens) -> tuple[tuple[int, int], ...]:
    """Tokens as a sequence of letters ``(gen, +1|-1)``."""
    out = []
    for g, e in tokens:
        s = 1 if e > 0 else -1
        out.extend([(g, s)] * abs(e))
    return tuple(out)


# ------------------------------------------------------------ word grammar

_TOKEN_RE = re.compile(r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<int>-?\d+)|(?P<sym>[()\[\]{},*^']))")


def _tokenize(text: str):
    pos, out = 0, []
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise WordParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str, G: GroupPresentation):
        self.text = text
        self.G = G
        self.toks = _tokenize(text)
        self.i = 0
        self.names = {r.name: k for k, r in enumerate(G.rules)}

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None, len(self.text))

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, sym):
        kind, val, pos = self.take()
        if kind != "sym" or val != sym:
            raise WordParseError(f"expected {sym!r}", self.text, pos)

    def product(self, closers=()) -> Word:
        tokens: list = []
        while True:
            kind, val, pos = self.peek()
            if kind is None or (kind == "sym" and val in closers):
                return Word(tuple(tokens))
            if kind == "sym" and val == "*":
                self.take()
                continue
            tokens.extend(self.factor().tokens)

    def factor(self) -> Word:
        w = self.atom()
        while True:
            kind, val, pos = self.peek()
            if kind == "sym" and val == "'":
                self.take()
                w = inverse(w)
            elif kind == "sym" and val == "^":
                self.take()
                kind, val, pos = self.peek()
                if kind == "int":
                    self.take()
                    w = w.power(int(val))
                elif kind in ("name",) or (kind == "sym" and val in "({["):
                    w = conjugate(w, self.atom())
                else:
                    raise WordParseError("malformed exponent", self.text, pos)
            else:
                return w

    def atom(self) -> Word:
        kind, val, pos = self.take()
        if kind == "name":
            return self.name(val, pos)
        if kind == "int":
            if val == "1":
                return IDENTITY
            raise WordParseError(f"unexpected integer {val}", self.text, pos)
        if kind == "sym" and val in "({":
            close = ")" if val == "(" else "}"
            w = self.product(closers=(close,))
            self.expect(close)
            return w
        if kind == "sym" and val == "[":
            u = self.product(closers=(",",))
            self.expect(",")
            v = self.product(closers=("]",))
            self.expect("]")
            return commutator(u, v)
        if kind is None:
            raise WordParseError("unexpected end of word", self.text, pos)
        raise WordParseError(f"unexpected {val!r}", self.text, pos)

    def name(self, val: str, pos: int) -> Word:
        if val in self.names:
            return Word(((self.names[val], 1),))
        # juxtaposed generator names, e.g. "abab"; longest match first
        tokens, k = [], 0
        ordered = sorted(self.names, key=len, reverse=True)
        while k < len(val):
            for nm in ordered:
                if val.startswith(nm, k):
                    tokens.append((self.names[nm], 1))
                    k += len(nm)
                    break
            else:
                raise WordParseError(f"unknown generator {val!r}", self.text, pos)
        return Word(tuple(tokens))


def parse_word(text: str, G: GroupPresentation) -> Word:
    """Parse ``text`` in the word grammar over the generators of ``G``.

    Tokens are separated by whitespace or ``*``; ``x'`` is an inverse,
    ``x^k`` a power, ``u^v`` the conjugate ``v' u v`` and ``[u,v]`` the
    commutator ``u' v' u v``. Parentheses (or braces) group, ``1`` is the
    identity, and juxtaposed generator names such as ``abab`` are split.
    """
    p = _Parser(text, G)
    w = p.product()
    kind, val, pos = p.peek()
    if kind is not None:
        raise WordParseError(f"unexpected {val!r}", text, pos)
    return w


# ------------------------------------------------------------- section calculus

def letters_of(w: Word) -> tuple[tuple[int, int], ...]:
    return _expand(w.tokens)


def _letter_data(G: GroupPresentation, g: int, s: int):
    perm, inv, secs, inv_secs = G._letters[g]
    return (perm, secs) if s > 0 else (inv, inv_secs)


def root_permutation(w: Word, G: GroupPresentation) -> Perm:
    p = identity_perm(G.degree)
    for g, s in letters_of(w):
        q = _letter_data(G, g, s)[0]
        p = compose(p, q) if RIGHT_TO_LEFT else compose(q, p)
    return p


def section_letters(letters: Sequence[tuple[int, int]], x: int, G: GroupPresentation):
    """Section at the level-1 vertex ``x`` of a letter sequence.

    Returns ``(section letters, image of x)``.
    """
    out: list = []
    if RIGHT_TO_LEFT:
        pieces = []
        for g, s in reversed(letters):
            perm, secs = _letter_data(G, g, s)
            pieces.append(secs[x])
            x = perm[x]
        for piece in reversed(pieces):
            out.extend(piece)
    else:
        for g, s in letters:
            perm, secs = _letter_data(G, g, s)
            out.extend(secs[x])
            x = perm[x]
    return out, x


def section(w: Word, v: Vertex | str, G: GroupPresentation) -> Word:
    v = parse_vertex(v, G.degree)
    letters = letters_of(w)
    for x in v:
        letters, _ = section_letters(letters, x, G)
    return Word(tuple(letters))


def act_vertex(w: Word, v: Vertex | str, G: GroupPresentation) -> Vertex:
    v = parse_vertex(v, G.degree)
    letters = letters_of(w)
    out = []
    for x in v:
        letters, y = section_letters(letters, x, G)
        out.append(y)
    return tuple(out)


@dataclass(frozen=True)
class Portrait:
    depth: int
    degree: int
    labels: dict

    def label(self, v: Vertex | str) -> Perm:
        return self.labels[parse_vertex(v, self.degree)]

    def truncate(self, n: int) -> "Portrait":
        return Portrait(n, self.degree, {v: p for v, p in self.labels.items() if len(v) < n})

    def subportrait(self, v: Vertex) -> "Portrait":
        """Portrait of the section at ``v`` (depth reduced by ``|v|``)."""
        k = len(v)
        labels = {u[k:]: p for u, p in self.labels.items() if u[:k] == v}
        return Portrait(self.depth - k, self.degree, labels)


def portrait_of(w: Word, n: int, G: GroupPresentation) -> Portrait:
    if n < 0:
        raise ValueError("portrait depth must be nonnegative")
    labels = {}
    frontier = [((), letters_of(w))]
    for _ in range(n):
        nxt = []
        for v, letters in frontier:
            labels[v] = root_permutation(Word(tuple(letters)), G)
            for x in range(G.degree):
                sec, _ = section_letters(letters, x, G)
                nxt.append((v + (x,), _expand(merge_tokens(sec))))
        frontier = nxt
    return Portrait(n, G.degree, labels)
