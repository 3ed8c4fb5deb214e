"""Subgroups given by generating words, and the tools used to study them.

Covers Schreier generators of vertex stabilizers, section subgroups,
rigid-stabilizer embeddings for the Grigorchuk group, diagonal and block
constructions, non-rigidity tree estimates, classification evidence and
tree-equivalence of finite truncations.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import (
    IDENTITY,
    GeneratorRule,
    GroupPresentation,
    TreeGeometry,
    Vertex,
    Word,
    compose_words,
    conjugate,
    inverse,
    letters_of,
    multiply,
    orthogonal,
    parse_vertex,
    parse_word,
    root_permutation,
    section,
    vertex_str,
)
from .permquotient import (
    BudgetExceeded,
    LevelQuotient,
    StabChain,
    budget_override,
    level_permutation,
    orbits_on_level,
    quotient_group,
    rigid_stabilizer_at_level,
    subtree_points,
)
from .wordproblem import canonical, equal, is_trivial

DEFAULT_GROWTH_WINDOW = 3
DEFAULT_LIFT_BUDGET = 2**16
_PREFILTER_LEVEL = 6


# ----------------------------------------------------------------- specs

@dataclass(frozen=True)
class SubgroupSpec:
    """A named generating set inside a preset group.

    ``support`` is set for diagonal and block subgroups built by this module.
    """

    name: str
    generators: tuple
    group: GroupPresentation = field(repr=False)
    support: tuple | None = None

    def __post_init__(self):
        gens = tuple(self.generators)
        if not gens:
            raise ValueError("a subgroup spec needs at least one generator (use the empty word for {1})")
        object.__setattr__(self, "generators", gens)

    def quotient(self, n: int) -> LevelQuotient:
        return quotient_group(self.generators, n, self.group)

    def format(self) -> str:
        lines = [f"subgroup {self.name}"]
        lines += [self.group.fmt(w) if w else "1" for w in self.generators]
        return "\n".join(lines) + "\n"


def whole_group(G: GroupPresentation, name: str = "G") -> SubgroupSpec:
    return SubgroupSpec(name, tuple(G.gen(nm) for nm in G.names), G)


def spec_from_strings(name: str, words: Iterable[str], G: GroupPresentation) -> SubgroupSpec:
    return SubgroupSpec(name, tuple(parse_word(w, G) for w in words), G)


class SpecFileError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def loads_subgroups(text: str, G: GroupPresentation) -> list[SubgroupSpec]:
    """Parse ``subgroup <name>`` blocks, one generator word per line."""
    blocks: list = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if body.startswith("subgroup ") or body == "subgroup":
            name = body[len("subgroup"):].strip()
            if not name:
                raise SpecFileError("subgroup header needs a name", lineno)
            blocks.append((name, []))
            continue
        if not blocks:
            raise SpecFileError("generator line before any 'subgroup <name>' header", lineno)
        try:
            blocks[-1][1].append(parse_word(body, G))
        except ValueError as exc:
            raise SpecFileError(str(exc), lineno) from None
    if not blocks:
        raise SpecFileError("no subgroup found")
    out = []
    for name, gens in blocks:
        if not gens:
            raise SpecFileError(f"subgroup {name} has no generators")
        out.append(SubgroupSpec(name, tuple(gens), G))
    return out


def load_subgroup(path, G: GroupPresentation, name: str | None = None) -> SubgroupSpec:
    with open(path, encoding="utf-8") as fh:
        specs = loads_subgroups(fh.read(), G)
    if name is None:
        return specs[0]
    for s in specs:
        if s.name == name:
            return s
    raise SpecFileError(f"no subgroup named {name!r} in {path}")


def dumps_subgroups(specs: Sequence[SubgroupSpec]) -> str:
    return "\n".join(s.format() for s in specs)


# ------------------------------------------------------------- schreier calculus

def _dedupe(words: Iterable[Word], G: GroupPresentation) -> list[Word]:
    seen, out = set(), []
    for w in words:
        c = canonical(w, G)
        if c and c.tokens not in seen:
            seen.add(c.tokens)
            out.append(c)
    return out


def orbit_transversal(H: SubgroupSpec, v: Vertex) -> dict:
    """Words ``t_u`` with ``t_u(v) = u`` for every ``u`` in the orbit of ``v``; BFS order."""
    G = H.group
    k = len(v)
    perms = [level_permutation(w, k, G) for w in H.generators]
    start = G.geometry.encode(v) if k else 0
    trans = {start: IDENTITY}
    queue = [start]
    i = 0
    while i < len(queue):
        u = queue[i]
        i += 1
        for w, p in zip(H.generators, perms):
            img = int(p[u])
            if img not in trans:
                trans[img] = canonical(compose_words(w, trans[u]), G)
                queue.append(img)
    return {G.geometry.decode(u, k) if k else (): t for u, t in trans.items()}


def stabilizer_schreier_generators(H: SubgroupSpec, v) -> SubgroupSpec:
    """Schreier generators of ``Stab_H(v)`` from the orbit transversal."""
    G = H.group
    v = parse_vertex(v, G.degree)
    if not v:
        return H
    k = len(v)
    perms = [level_permutation(w, k, G) for w in H.generators]
    trans = {G.geometry.encode(u): t for u, t in orbit_transversal(H, v).items()}
    out = []
    for u, t in trans.items():
        for w, p in zip(H.generators, perms):
            img = int(p[u])
            out.append(compose_words(inverse(trans[img]), compose_words(w, t)))
    gens = _dedupe(out, G) or [IDENTITY]
    return SubgroupSpec(f"Stab_{H.name}({vertex_str(v)})", tuple(gens), G)


def section_subgroup(H: SubgroupSpec, v) -> SubgroupSpec:
    """Sections at ``v`` of the Schreier generators of ``Stab_H(v)``."""
    G = H.group
    v = parse_vertex(v, G.degree)
    stab = stabilizer_schreier_generators(H, v)
    gens = _dedupe((section(w, v, G) for w in stab.generators), G) or [IDENTITY]
    return SubgroupSpec(f"pi_{vertex_str(v)}({H.name})", tuple(gens), G)


# ----------------------------------------------------------- word search

class SearchExhausted(LookupError):
    """No word up to the length bound matched; not a proof that none exists."""


def _search_letters(words: Sequence[Word], G: GroupPresentation) -> list[Word]:
    out = list(words)
    for w in words:
        inv = canonical(inverse(w), G)
        if not any(equal(inv, x, G) for x in out):
            out.append(inv)
    return out


def find_word_by_sections(targets: Sequence[Word], root, gens: SubgroupSpec, max_len: int) -> Word:
    """First word (BFS over products of ``gens``) with the given root permutation and sections."""
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    G = gens.group
    d = G.degree
    root = tuple(root)
    if len(targets) != d:
        raise ValueError(f"need {d} section targets")
    m = _PREFILTER_LEVEL
    target_perms = [level_permutation(t, m, G) for t in targets]
    letters = _search_letters(gens.generators, G)

    def matches(w):
        if root_permutation(w, G) != root:
            return False
        secs = [section(w, (x,), G) for x in range(d)]
        if not all(np.array_equal(level_permutation(s, m, G), tp) for s, tp in zip(secs, target_perms)):
            return False
        return all(equal(s, t, G) for s, t in zip(secs, targets))

    seen = {IDENTITY.tokens}
    layer = [IDENTITY]
    if matches(IDENTITY):
        return IDENTITY
    for _ in range(max_len):
        nxt = []
        for w in layer:
            for g in letters:
                c = canonical(multiply(w, g), G)
                if c.tokens in seen:
                    continue
                seen.add(c.tokens)
                if matches(c):
                    return c
                nxt.append(c)
        layer = nxt
    raise SearchExhausted(f"no word of length <= {max_len} has the requested sections")


# ------------------------------------------------------- rigid stabilizers

class Uncovered(KeyError):
    pass


class NotInB(ValueError):
    """The element does not lie in B, so it has no rigid embedding below level 1."""


@dataclass(frozen=True)
class Certificate:
    vertex: Vertex
    target: Word
    word: Word
    fixes_path: bool
    off_path_trivial: bool
    section_equal: bool

    @property
    def ok(self) -> bool:
        return self.fixes_path and self.off_path_trivial and self.section_equal


def certify_rist(word: Word, v: Vertex, target: Word, G: GroupPresentation) -> Certificate:
    """Exact check that ``word`` lies in Rist(v) with section ``target`` at ``v``.

    Along the path to ``v`` every prefix section must fix the next letter and
    be trivial on each sibling subtree.
    """
    fixes, off = True, True
    cur = word
    for x in v:
        if root_permutation(cur, G)[x] != x:
            fixes = False
            break
        for y in range(G.degree):
            if y != x and not is_trivial(section(cur, (y,), G), G):
                off = False
        cur = section(cur, (x,), G)
    same = fixes and equal(cur, target, G)
    return Certificate(v, target, word, fixes, off, same)


class RigidEmbeddingError(RuntimeError):
    pass


# Stab(level 1) words with a prescribed section, per letter of a and d
_LIFT = {0: {"a": "b", "d": "a c a"}, 1: {"a": "a b a", "d": "c"}}
_B_AT = {0: "a d a", 1: "d"}
_K_GENERATORS = {"k1": "(a b)^2", "k2": "(b a d a)^2", "k3": "(a b a d)^2"}


def _is_grigorchuk(G: GroupPresentation) -> bool:
    from .presets import grigorchuk
    return G.degree == 2 and G.rules == grigorchuk().rules


class RistEmbeddingRegistry:
    """Certified words realizing K (and B at level 1) inside rigid stabilizers.

    Level-1 embeddings come from a Schreier rewrite of the element over
    ``G/B = <a, d>`` (dihedral of order 8): each occurrence of ``b`` becomes
    a conjugate of ``d`` (or ``ada``) by a level-1 stabilizer word with the
    right section. Deeper vertices are reached by composing level-1
    embeddings, using K-words for ``E_x(k_i)`` found by search. Every entry
    carries a :class:`Certificate` and insertion is synchronized.
    """

    def __init__(self, G: GroupPresentation):
        if not _is_grigorchuk(G):
            raise RigidEmbeddingError("rigid embeddings are implemented for the Grigorchuk preset only")
        self.G = G
        self.alphabet = {"b": G.word("b")}
        self.alphabet.update({k: canonical(G.word(w), G) for k, w in _K_GENERATORS.items()})
        names = list(self.alphabet)
        self.alphabet_group = GroupPresentation(
            TreeGeometry(2), tuple(GeneratorRule(nm, (0, 1), (Word(), Word())) for nm in names),
            name="registry-alphabet")
        self.entries: dict = {}
        self.certificates: dict = {}
        self._lock = threading.RLock()
        self._embed_cache: dict = {}
        self._lift = {x: {G.index(k): G.word(w) for k, w in t.items()} for x, t in _LIFT.items()}
        self._b_at = {x: G.word(w) for x, w in _B_AT.items()}
        self._check_lift_tables()
        self._d8, self._d8_words = self._dihedral_quotient()
        self.k_expressions = {x: [self._express_in_k(self._embed1(x, self.alphabet[k]))
                                  for k in _K_GENERATORS] for x in (0, 1)}

    # -- seeding
    def _check_lift_tables(self):
        G = self.G
        for x in (0, 1):
            for g, w in self._lift[x].items():
                c = certify_rist(w, (), w, G)
                sec = section(w, (x,), G)
                if root_permutation(w, G) != (0, 1) or not equal(sec, Word(((g, 1),)), G) or not c.ok:
                    raise RigidEmbeddingError(f"lift table entry for {G.names[g]} at {x} is wrong")
            cert = certify_rist(self._b_at[x], (x,), self.alphabet["b"], G)
            if not cert.ok:
                raise RigidEmbeddingError(f"b does not embed at {x} as expected")

    def _dihedral_quotient(self):
        # a and d act on the corners of a square; b is killed and c maps like d
        G = self.G
        refl = {"a": (1, 0, 3, 2), "d": (0, 3, 2, 1)}
        images = {G.index("a"): refl["a"], G.index("b"): (0, 1, 2, 3),
                  G.index("c"): refl["d"], G.index("d"): refl["d"]}
        words = {(0, 1, 2, 3): IDENTITY}
        queue = [(0, 1, 2, 3)]
        while queue:
            t = queue.pop(0)
            for nm in ("a", "d"):
                u = tuple(t[i] for i in refl[nm])
                if u not in words:
                    words[u] = multiply(words[t], G.gen(nm))
                    queue.append(u)
        return images, words

    def _lift_word(self, t: Word, x: int) -> Word:
        out = IDENTITY
        for g, _ in letters_of(t):
            out = multiply(out, self._lift[x][g])
        return out

    def _embed1(self, x: int, w: Word) -> Word:
        G = self.G
        b, c = G.index("b"), G.index("c")
        cur = (0, 1, 2, 3)
        out = IDENTITY
        for g, _ in letters_of(canonical(w, G)):
            if g in (b, c):   # c = b d
                r = self._lift_word(self._d8_words[cur], x)
                out = multiply(out, multiply(multiply(r, self._b_at[x]), inverse(r)))
            if g != b:
                img = self._d8[g]
                cur = tuple(cur[i] for i in img)
        if cur != (0, 1, 2, 3):
            raise NotInB(f"{G.fmt(w)} is not in B")
        return canonical(out, G)

    def _express_in_k(self, target: Word) -> Word:
        """Shortest word over k1, k2, k3 equal to ``target``, as a word over the alphabet group."""
        G = self.G
        n = 9
        kw = [self.alphabet[k] for k in _K_GENERATORS]
        kp = [level_permutation(k, n, G) for k in kw]
        tp = level_permutation(target, n, G)
        letters = [(i, s) for i in range(len(kw)) for s in (1, -1)]
        offset = self.alphabet_group.index("k1")
        for length in range(1, 7):
            for combo in itertools.product(letters, repeat=length):
                if any(combo[j][0] == combo[j + 1][0] and combo[j][1] != combo[j + 1][1]
                       for j in range(length - 1)):
                    continue
                p = np.arange(2**n)
                for i, s in combo:
                    p = p[kp[i]] if s > 0 else p[np.argsort(kp[i])]
                if not np.array_equal(p, tp):
                    continue
                cand = IDENTITY
                for i, s in combo:
                    cand = multiply(cand, kw[i].power(s))
                if equal(cand, target, G):
                    return Word(tuple((i + offset, s) for i, s in combo))
        raise RigidEmbeddingError("level-1 embedding of a K generator is not a short K-word")

    # -- queries
    def embed(self, v, w: Word, certify: bool = True) -> Word:
        """A word in Rist(v) whose section at ``v`` is ``w``.

        ``w`` must lie in B for ``|v| = 1`` and in K (more precisely, each
        intermediate embedding must stay in B) for deeper vertices.
        """
        v = parse_vertex(v, 2)
        key = (v, canonical(w, self.G).tokens)
        with self._lock:
            if key in self._embed_cache:
                return self._embed_cache[key]
        out = w
        for x in reversed(v):
            out = self._embed1(x, out)
        out = canonical(out, self.G)
        if certify and v:
            cert = certify_rist(out, v, w, self.G)
            if not cert.ok:
                raise RigidEmbeddingError(f"embedding at {vertex_str(v)} failed certification")
        with self._lock:
            self._embed_cache[key] = out
        return out

    def entry(self, v, name: str) -> Word:
        v = parse_vertex(v, 2)
        with self._lock:
            if (v, name) in self.entries:
                return self.entries[(v, name)]
        if name not in self.alphabet:
            raise Uncovered(f"{name!r} is not in the registry alphabet")
        if not v:
            word = self.alphabet[name]
        elif name == "b":
            if len(v) != 1:
                raise Uncovered("b embeds only at level-1 vertices (Rist at deeper vertices is K)")
            word = self._embed1(v[0], self.alphabet["b"])
        elif len(v) == 1:
            word = self._embed1(v[0], self.alphabet[name])
        else:
            # E_{u x} = E_u o E_x, and E_x(k) is a short K-word
            u, x = v[:-1], v[-1]
            kexpr = self.k_expressions[x][list(_K_GENERATORS).index(name)]
            word = IDENTITY
            for g, e in kexpr.tokens:
                word = multiply(word, self.entry(u, self.alphabet_group.names[g]).power(e))
            word = canonical(word, self.G)
        cert = certify_rist(word, v, self.alphabet[name], self.G)
        if not cert.ok:
            raise RigidEmbeddingError(f"registry entry ({vertex_str(v)}, {name}) failed certification")
        with self._lock:
            self.entries[(v, name)] = word
            self.certificates[(v, name)] = cert
        return word

    def k_generators_at(self, v) -> list[Word]:
        return [self.entry(v, k) for k in _K_GENERATORS]


def rist_embed(v, w, R: RistEmbeddingRegistry) -> Word:
    """Substitute registry entries at ``v`` for the letters of ``w``.

    ``w`` is a word (or string) over the registry alphabet ``b, k1, k2, k3``.
    """
    if isinstance(w, str):
        w = parse_word(w, R.alphabet_group)
    names = R.alphabet_group.names
    out = IDENTITY
    for g, e in w.tokens:
        out = multiply(out, R.entry(v, names[g]).power(e))
    return canonical(out, R.G)


_REGISTRIES: dict = {}
_REG_LOCK = threading.Lock()


def registry_for(G: GroupPresentation) -> RistEmbeddingRegistry:
    with _REG_LOCK:
        if G not in _REGISTRIES:
            _REGISTRIES[G] = RistEmbeddingRegistry(G)
        return _REGISTRIES[G]


# ------------------------------------------------------ diagonal and block

def _check_orthogonal(vertices: Sequence[Vertex], what: str):
    for u, w in itertools.combinations(vertices, 2):
        if not orthogonal(u, w):
            raise ValueError(f"{what}: vertices {vertex_str(u)} and {vertex_str(w)} are not orthogonal")


def diagonal_subgroup(U, Lgens: Sequence[Word], psi: Sequence[Word], R: RistEmbeddingRegistry,
                      name: str = "D") -> SubgroupSpec:
    """Generators ``prod_j E_{u_j}(l^{psi_j})`` for ``l`` in ``Lgens``."""
    G = R.G
    U = [parse_vertex(u, G.degree) for u in U]
    if len(psi) != len(U):
        raise ValueError("need one conjugator per support vertex")
    _check_orthogonal(U, "diagonal support")
    gens = []
    for l in Lgens:
        g = IDENTITY
        for u, p in zip(U, psi):
            g = multiply(g, R.embed(u, conjugate(l, p)))
        gens.append(canonical(g, G))
    return SubgroupSpec(name, tuple(gens), G, support=tuple(U))


def block_subgroup(diagonals: Sequence[SubgroupSpec], name: str = "A") -> SubgroupSpec:
    if not diagonals:
        raise ValueError("need at least one diagonal subgroup")
    if len(diagonals) == 1:
        return diagonals[0]
    for D1, D2 in itertools.combinations(diagonals, 2):
        if D1.support is None or D2.support is None:
            raise ValueError("block factors must carry a support")
        for u in D1.support:
            for w in D2.support:
                if not orthogonal(u, w):
                    raise ValueError(f"supports overlap at {vertex_str(u)} and {vertex_str(w)}")
    gens = tuple(w for D in diagonals for w in D.generators)
    support = tuple(u for D in diagonals for u in D.support)
    return SubgroupSpec(name, gens, diagonals[0].group, support=support)


def rist_subgroup(v, R: RistEmbeddingRegistry, name: str | None = None) -> SubgroupSpec:
    """K embedded at ``v`` (B when ``v`` is on level 1)."""
    v = parse_vertex(v, 2)
    if len(v) == 1:
        B = [R.alphabet["b"], canonical(R.G.word("b^a"), R.G), canonical(R.G.word("b^(a d)"), R.G),
             canonical(R.G.word("b^(a d a)"), R.G)]
        gens = [R.embed(v, b) for b in B]
    else:
        gens = R.k_generators_at(v)
    return SubgroupSpec(name or f"Rist({vertex_str(v)})", tuple(gens), R.G, support=(v,))


# ------------------------------------------------------------ level lifts

def lift_at_level(Hquot: LevelQuotient, v, n: int, G: GroupPresentation,
                  budget: int | None = None) -> LevelQuotient:
    """Image at level ``n`` of ``{g in Stab_G(v) : g|_v in H}``, with ``H`` given at level ``n - |v|``."""
    d = G.degree
    v = parse_vertex(v, d)
    m = n - len(v)
    if m < 0 or (Hquot.n is not None and Hquot.n != m):
        raise ValueError(f"section quotient must live on level {m}")
    budget = budget_override(DEFAULT_LIFT_BUDGET) if budget is None else budget
    stab = stabilizer_schreier_generators(whole_group(G), v)
    S = quotient_group(stab.generators, n, G)
    sub = subtree_points(v, n, d)
    start = sub[0]
    chain = StabChain(S.perms, S.degree, sub)

    def restrict(p):
        return p[start:start + len(sub)] - start

    image = LevelQuotient.from_perms([restrict(p) for p in S.perms], d**m, m)
    kernel = chain.stabilizer_generators(len(sub))
    if Hquot.contains_group(image):
        return LevelQuotient.from_perms(S.perms, S.degree, n)
    small, big = (image, Hquot) if image.order() <= Hquot.order() else (Hquot, image)
    if small.order() > budget:
        raise BudgetExceeded(f"lift needs to enumerate {small.order()} elements (budget {budget})")
    inter = [h for h in small.elements() if big.contains(h)]
    sub_gens = LevelQuotient.from_perms([], d**m, m)
    lifted = []
    for h in inter:
        if sub_gens.contains(h):
            continue
        sub_gens = LevelQuotient.from_perms(sub_gens.perms + [h], d**m, m)
        lifted.append(_preimage(chain, h, sub, S.degree))
    return LevelQuotient.from_perms(list(kernel) + lifted, S.degree, n)


def _preimage(chain: StabChain, h: np.ndarray, sub: list[int], degree: int) -> np.ndarray:
    start = sub[0]
    g = np.arange(degree, dtype=np.int64)
    g[start:start + len(sub)] = h + start
    s = np.arange(degree, dtype=np.int64)
    for j in range(len(sub)):
        b = chain.full_base[j]
        img = int(g[b])
        if img == b:
            continue
        u, u_inv = chain.orbits[j][img]
        g = u_inv[g]
        s = s[u]
    if not np.array_equal(s[start:start + len(sub)], h + start):
        raise AssertionError("section permutation has no preimage in the stabilizer")
    return s


# --------------------------------------------------------- NR tree estimate

RIST_CERTIFIED = "rist-certified"
INFINITE_EVIDENCE = "infinite-index-evidence"
UNKNOWN = "unknown"


@dataclass
class VertexEvidence:
    vertex: Vertex
    status: str
    membership: list
    exact: bool
    index_sequence: dict = field(default_factory=dict)


@dataclass
class NRReport:
    """Per-vertex rigidity evidence. Finite-level evidence only, never a proof."""

    subgroup: str
    depth: int
    max_level: int
    growth_window: int
    vertices: dict
    nr_orbit_counts: dict = field(default_factory=dict)
    note: str = "evidence from congruence quotients; infinite index is never asserted"

    def status(self, v) -> str:
        return self.vertices[parse_vertex(v)].status

    def certified(self) -> set:
        return {v for v, e in self.vertices.items() if e.status == RIST_CERTIFIED}

    def tree(self) -> set:
        """Estimated non-rigidity tree: the vertices that are not rist-certified."""
        return {v for v in self.vertices if v not in self.certified()}

    def downward_closed(self) -> bool:
        cert = self.certified()
        return all(c in cert for v in cert for c in self.vertices if c[:len(v)] == v)

    def minimal_action_evidence(self) -> bool:
        """One H-orbit on the estimated tree at every level (finite-level evidence only)."""
        return all(k <= 1 for k in self.nr_orbit_counts.values())


def _strictly_increasing_tail(seq: Sequence[int], window: int) -> bool:
    tail = list(seq)[-window:]
    return len(tail) == window and all(x < y for x, y in zip(tail, tail[1:]))


def _stable_tail(seq: Sequence[int], window: int) -> bool:
    tail = list(seq)[-window:]
    return len(tail) == window and len(set(tail)) == 1


def nr_tree_estimate(H: SubgroupSpec, depth: int, max_level: int,
                     growth_window: int = DEFAULT_GROWTH_WINDOW,
                     registry: RistEmbeddingRegistry | None = None) -> NRReport:
    if depth > max_level:
        raise ValueError("depth must not exceed max_level")
    G = H.group
    R = registry or registry_for(G)
    all_gens = [G.gen(nm) for nm in G.names]
    QH = H.quotient(max_level)
    canon_gens = {canonical(w, G).tokens for w in H.generators}
    canon_gens |= {canonical(inverse(w), G).tokens for w in H.generators}
    QG_at: dict = {}
    QH_at: dict = {}

    def q(level):
        if level not in QG_at:
            QG_at[level] = quotient_group(all_gens, level, G)
            QH_at[level] = H.quotient(level)
        return QG_at[level], QH_at[level]

    vertices: dict = {}
    for k in range(depth + 1):
        for v in G.geometry.level(k):
            kw = R.k_generators_at(v)
            member = [bool(QH.contains(level_permutation(w, max_level, G))) for w in kw]
            literal = all(canonical(w, G).tokens in canon_gens for w in kw)
            parent = vertices.get(v[:-1]) if v else None
            exact = literal or (parent is not None and parent.exact)
            ev = VertexEvidence(v, UNKNOWN, member, exact)
            if all(member):
                ev.status = RIST_CERTIFIED
            else:
                for level in range(max(k, 1), max_level + 1):
                    QG, QHl = q(level)
                    rg = rigid_stabilizer_at_level(QG, v)
                    rh = rigid_stabilizer_at_level(QHl, v)
                    ev.index_sequence[level] = rg.order() // rh.order()
                if _strictly_increasing_tail(list(ev.index_sequence.values()), growth_window):
                    ev.status = INFINITE_EVIDENCE
            vertices[v] = ev
    report = NRReport(H.name, depth, max_level, growth_window, vertices)
    tree = report.tree()
    for k in range(1, depth + 1):
        on_level = {v for v in tree if len(v) == k}
        orbs = orbits_on_level(H.generators, k, G)
        report.nr_orbit_counts[k] = sum(1 for o in orbs if on_level & set(o))
    return report


# ---------------------------------------------------------- classification

GENERALIZED_PARABOLIC = "generalized-parabolic-side"
BLOCK_STRUCTURE = "block-structure-side"
INCONCLUSIVE = "inconclusive"


@dataclass
class ClassificationReport:
    subgroup: str
    max_level: int
    orbit_counts: dict
    index_in_group: dict
    transversal_level: int | None
    section_indices: dict
    rist_orders: dict
    verdict: str
    notes: list = field(default_factory=list)


def _section_index_sequence(H: SubgroupSpec, v: Vertex, levels: Iterable[int]) -> dict:
    G = H.group
    S = section_subgroup(H, v)
    all_gens = [G.gen(nm) for nm in G.names]
    out = {}
    for m in levels:
        QG = quotient_group(all_gens, m, G)
        out[m] = QG.order() // S.quotient(m).order()
    return out


def classify(H: SubgroupSpec, max_level: int, growth_window: int = DEFAULT_GROWTH_WINDOW) -> ClassificationReport:
    G = H.group
    all_gens = [G.gen(nm) for nm in G.names]
    orbit_counts, index = {}, {}
    for n in range(1, max_level + 1):
        QH = H.quotient(n)
        orbit_counts[n] = len(QH.orbits())
        index[n] = quotient_group(all_gens, n, G).order() // QH.order()
    report = ClassificationReport(H.name, max_level, orbit_counts, index, None, {}, {}, INCONCLUSIVE)
    counts = list(orbit_counts.values())
    if _stable_tail(list(index.values()), growth_window):
        report.notes.append(f"index stays at {index[max_level]} over the last {growth_window} levels: "
                            "finite-index input, not a weakly maximal candidate")
        return report
    if _strictly_increasing_tail(counts, growth_window):
        report.verdict = GENERALIZED_PARABOLIC
        report.notes.append("orbit counts grow: orbit closures accumulate on the boundary")
        return report
    if not _stable_tail(counts, growth_window):
        report.notes.append("orbit counts neither grow nor stabilize over the window")
        return report
    # bounded orbit counts: look for finite-index sections at a transversal
    chosen = None
    for k in range(1, max_level - growth_window + 1):
        reps = [G.geometry.decode(orb[0], k) for orb in H.quotient(k).orbits()]
        seqs = {v: _section_index_sequence(H, v, range(1, max_level - k + 1)) for v in reps}
        finite = {v: _stable_tail(list(s.values()), growth_window) for v, s in seqs.items()}
        report.section_indices.update(seqs)
        if all(finite.values()):
            chosen = (k, reps, finite)
            break
        chosen = (k, reps, finite)
    if chosen is None:
        report.notes.append("max_level too small for a section-index window")
        return report
    k, reps, finite = chosen
    report.transversal_level = k
    QH = H.quotient(max_level)
    for v in reps:
        report.rist_orders[v] = rigid_stabilizer_at_level(QH, v).order()
    if any(finite.values()):
        report.verdict = BLOCK_STRUCTURE
        report.notes.append(f"orbit counts bounded at {counts[-1]}; finite-index sections at level {k}")
    else:
        report.notes.append("bounded orbit counts but no finite-index section found")
    return report


# ------------------------------------------------------- tree equivalence

def _as_tree(vertices) -> set:
    tree = {parse_vertex(v) for v in vertices}
    tree.add(())
    for v in tree:
        if v and v[:-1] not in tree:
            raise ValueError(f"vertex set is not prefix closed (missing parent of {vertex_str(v)})")
    return tree


def canonical_tree_code(vertices) -> str:
    """AHU code: children codes sorted recursively."""
    tree = _as_tree(vertices)
    children: dict = {}
    for v in tree:
        if v:
            children.setdefault(v[:-1], []).append(v)

    def code(v):
        return "(" + "".join(sorted(code(c) for c in children.get(v, []))) + ")"

    return code(())


def tree_depth(vertices) -> int:
    return max(len(v) for v in _as_tree(vertices))


def tree_equivalent_truncation(S1, S2) -> bool:
    if tree_depth(S1) != tree_depth(S2):
        raise ValueError("truncations have different depths")
    return canonical_tree_code(S1) == canonical_tree_code(S2)
