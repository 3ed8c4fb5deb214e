"""Linear algebra over F_p and the level-1 normal form for torsion GGS groups.

Conventions: ``b_i = a^i b a^-i`` (Schreier transversal ``{a^i}``), and
``b_i`` carries ``b`` in coordinate ``i - 1 mod p``. With ``e_{p-1} = 0``
the level-1 stabilizer element with ``b_i``-exponent sums ``n`` has
coordinate ``x`` equal to ``a^alpha_x b^beta_x`` modulo ``G'`` where::

    alpha = n . Circ(e, 0)      beta_x = n_{x+1 mod p}
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import GroupPresentation, Word, inverse, multiply, section
from .presets import GGSVector
from .wordproblem import canonical, equal


class GGSError(ValueError):
    pass


class CertificationError(RuntimeError):
    """A normal-form identity failed its exact check; indicates a convention bug."""


@dataclass(frozen=True)
class ResidueVector:
    p: int
    entries: tuple

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(int(x) % self.p for x in self.entries))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]


def circulant(e, p: int) -> list[list[int]]:
    """Rows ``C[i][j] = r[(j - i) mod p]`` with ``r = (e_0, ..., e_{p-2}, 0)``.

    ``e`` may already be padded to length ``p``.
    """
    r = [int(x) % p for x in e]
    if len(r) == p - 1:
        r.append(0)
    if len(r) != p:
        raise ValueError(f"need p-1 or p entries, got {len(r)}")
    return [[r[(j - i) % p] for j in range(p)] for i in range(p)]


def rank_mod_p(M, p: int) -> int:
    rows = [[int(x) % p for x in row] for row in M]
    rank, ncols = 0, len(rows[0]) if rows else 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        rows[rank] = [x * inv % p for x in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][col]:
                f = rows[r][col]
                rows[r] = [(x - f * y) % p for x, y in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def circulant_invertible(row, p: int) -> bool:
    """Full rank mod p of the circulant whose first row is ``row`` (length p)."""
    row = list(row)
    if len(row) != p:
        raise ValueError(f"row must have length {p}")
    C = [[row[(j - i) % p] for j in range(p)] for i in range(p)]
    return rank_mod_p(C, p) == p


def ggs_vector(G: GroupPresentation) -> GGSVector:
    """Recover the defining vector of a GGS preset (and check its shape)."""
    if G.names[:2] != ["a", "b"] or len(G.names) != 2:
        raise GGSError("not a GGS presentation (expects generators a, b)")
    p = G.degree
    a, b = G.rules
    if a.root_perm != tuple((x + 1) % p for x in range(p)) or any(a.sections):
        raise GGSError("generator a must be the rigid p-cycle x -> x+1")
    if b.root_perm != tuple(range(p)) or b.sections[-1] != G.gen("b"):
        raise GGSError("generator b must stabilize level 1 with last section b")
    e = []
    for s in b.sections[:-1]:
        if not s:
            e.append(0)
        elif len(s.tokens) == 1 and s.tokens[0][0] == 0:
            e.append(s.tokens[0][1])
        else:
            raise GGSError("sections of b before the last must be powers of a")
    return GGSVector(p, tuple(e))


def abelianization(w: Word, G: GroupPresentation) -> tuple[int, int]:
    p = ggs_vector(G).p
    ea = sum(e for g, e in w.tokens if g == 0) % p
    eb = sum(e for g, e in w.tokens if g == 1) % p
    return ea, eb


@dataclass(frozen=True)
class BiWord:
    """A word over ``b_0, ..., b_{p-1}`` as ``(i, exponent)`` tokens."""

    p: int
    tokens: tuple

    def exponent_sums(self) -> ResidueVector:
        n = [0] * self.p
        for i, e in self.tokens:
            n[i] += e
        return ResidueVector(self.p, n)

    def to_word(self) -> Word:
        out = Word()
        for i, e in self.tokens:
            out = multiply(out, Word(((0, i), (1, e), (0, -i))))
        return out

    def format(self) -> str:
        if not self.tokens:
            return "1"
        return " ".join(f"b{i}" if e == 1 else f"b{i}^{e}" for i, e in self.tokens)


def rewrite_in_bi(w: Word, G: GroupPresentation) -> BiWord:
    """Rewrite a level-1 stabilizer word over the ``b_i`` (certified)."""
    p = ggs_vector(G).p
    if abelianization(w, G)[0] != 0:
        raise GGSError("word does not stabilize level 1 (a-exponent sum is nonzero mod p)")
    shift = 0
    toks = []
    for g, e in w.tokens:
        if g == 0:
            shift = (shift + e) % p
        else:
            if toks and toks[-1][0] == shift:
                e += toks.pop()[1]
            if e % p:
                toks.append((shift, e))
    out = BiWord(p, tuple(toks))
    if not equal(out.to_word(), w, G):
        raise CertificationError("b_i rewriting does not reproduce the input word")
    return out


@dataclass(frozen=True)
class GGSNormalFormRecord:
    n: ResidueVector
    alpha: ResidueVector
    beta: ResidueVector
    sections: tuple
    d_words: tuple


def ggs_normal_form(w: Word, G: GroupPresentation) -> GGSNormalFormRecord:
    v = ggs_vector(G)
    p = v.p
    if sum(v.e) % p:
        raise GGSError("normal form needs a torsion defining vector (sum of e_i = 0 mod p)")
    n = rewrite_in_bi(w, G).exponent_sums()
    C = circulant(v.e, p)
    alpha = ResidueVector(p, [sum(n[i] * C[i][x] for i in range(p)) for x in range(p)])
    beta = ResidueVector(p, [n[(x + 1) % p] for x in range(p)])
    secs, ds = [], []
    for x in range(p):
        s = canonical(section(w, (x,), G), G)
        lead = Word(((0, alpha[x]), (1, beta[x])))
        dx = canonical(multiply(inverse(lead), s), G)
        if abelianization(dx, G) != (0, 0):
            raise CertificationError(f"d_{x} is not in the derived subgroup")
        if not equal(s, multiply(lead, dx), G):
            raise CertificationError(f"coordinate {x} does not reassemble")
        secs.append(s)
        ds.append(dx)
    return GGSNormalFormRecord(n, alpha, beta, tuple(secs), tuple(ds))


def reassemble(record: GGSNormalFormRecord, G: GroupPresentation) -> list[Word]:
    """The coordinates ``a^alpha_x b^beta_x d_x`` of a record."""
    return [multiply(Word(((0, record.alpha[x]), (1, record.beta[x]))), record.d_words[x])
            for x in range(len(record.d_words))]
