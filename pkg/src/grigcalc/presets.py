"""Built-in presentations and the group definition file format.

File grammar (UTF-8, line oriented, ``#`` starts a comment)::

    degree: <d>
    name: <free text>                         (optional)
    torsion-prime: <p>                        (optional)
    <gen> = [i0, i1, ..., i_{d-1}] ( w0 | w1 | ... | w_{d-1} )
    relation: <word>                          (means <word> = 1)
    relation: <word> = <word>

Generator lines come before relation lines that use them. The bracket is the
root permutation as an image list (``x -> i_x``). Each ``wi`` is a word in the
word grammar and may be empty (identity).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .core import (
    GeneratorRule,
    GroupPresentation,
    PresentationError,
    TreeGeometry,
    Word,
    WordParseError,
    parse_word,
)


class GroupFileError(ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


def _is_prime(n: int) -> bool:
    return n >= 2 and all(n % k for k in range(2, int(n**0.5) + 1))


@dataclass(frozen=True)
class GGSVector:
    p: int
    e: tuple[int, ...]

    def __post_init__(self):
        if not _is_prime(self.p) or self.p == 2:
            raise ValueError(f"GGS prime must be an odd prime, got {self.p}")
        if len(self.e) != self.p - 1:
            raise ValueError(f"GGS vector must have length p-1 = {self.p - 1}")
        e = tuple(int(x) % self.p for x in self.e)
        if not any(e):
            raise ValueError("GGS defining vector must be nonzero")
        object.__setattr__(self, "e", e)


def is_torsion_ggs(v: GGSVector) -> bool:
    return sum(v.e) % v.p == 0


def _gen(i: int, e: int = 1) -> Word:
    return Word(((i, e),))


GRIGORCHUK_RELATIONS = ("a^2", "b^2", "c^2", "d^2", "b c = d", "b d = c", "c d = b",
                        "c b = d", "d b = c", "d c = b")


def grigorchuk() -> GroupPresentation:
    a, b, c, d = (_gen(i) for i in range(4))
    e = Word()
    rules = (
        GeneratorRule("a", (1, 0), (e, e)),
        GeneratorRule("b", (0, 1), (a, c)),
        GeneratorRule("c", (0, 1), (a, d)),
        GeneratorRule("d", (0, 1), (e, b)),
    )
    bare = GroupPresentation(TreeGeometry(2), rules, name="grigorchuk", torsion_prime=2)
    return _with_relations(bare, GRIGORCHUK_RELATIONS)


def ggs(v: GGSVector) -> GroupPresentation:
    p = v.p
    cycle = tuple((x + 1) % p for x in range(p))
    rules = (
        GeneratorRule("a", cycle, (Word(),) * p),
        GeneratorRule("b", tuple(range(p)), tuple(_gen(0, ei) for ei in v.e) + (_gen(1),)),
    )
    name = f"ggs:{p}:" + ",".join(map(str, v.e))
    bare = GroupPresentation(TreeGeometry(p), rules, name=name,
                             torsion_prime=p if is_torsion_ggs(v) else None)
    return _with_relations(bare, (f"a^{p}", f"b^{p}"))


def gupta_sidki(p: int = 3) -> GroupPresentation:
    return ggs(GGSVector(p, (1, -1) + (0,) * (p - 3)))


def _parse_relation(text: str, G: GroupPresentation) -> tuple[Word, Word]:
    lhs, _, rhs = text.partition("=")
    return parse_word(lhs, G), parse_word(rhs, G)


def _with_relations(G: GroupPresentation, relations) -> GroupPresentation:
    rels = tuple(_parse_relation(r, G) for r in relations)
    return GroupPresentation(G.geometry, G.rules, rels, G.name, G.torsion_prime)


def group_from_spec(spec: str) -> GroupPresentation:
    """``grigorchuk``, ``ggs:p:e0,e1,...`` or a path to a group file."""
    if spec in ("grigorchuk", "grig"):
        return grigorchuk()
    if spec.startswith("ggs:"):
        _, p, e = spec.split(":")
        return ggs(GGSVector(int(p), tuple(int(x) for x in e.split(","))))
    if spec in ("gupta-sidki", "gs3"):
        return gupta_sidki(3)
    return load_group(spec)


# -------------------------------------------------------------------- files

_GEN_RE = re.compile(r"^\s*(?P<name>[A-Za-z_][A-Za-z0-9_]*)\s*=\s*\[(?P<perm>[^\]]*)\]\s*\((?P<secs>.*)\)\s*$")


def loads_group(text: str) -> GroupPresentation:
    degree = None
    name = ""
    torsion = None
    raw_rules = []
    raw_relations = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        if not body.strip():
            continue
        key, sep, rest = body.partition(":")
        key = key.strip().lower()
        if sep and key == "degree":
            try:
                degree = int(rest)
            except ValueError:
                raise GroupFileError("degree must be an integer", lineno, body.index(":") + 2) from None
            continue
        if sep and key == "name":
            name = rest.strip()
            continue
        if sep and key == "torsion-prime":
            torsion = int(rest)
            continue
        if sep and key == "relation":
            raw_relations.append((lineno, body.index(":") + 1, rest))
            continue
        m = _GEN_RE.match(body)
        if not m:
            raise GroupFileError("expected 'degree:', 'relation:' or a generator rule", lineno, 1)
        try:
            perm = tuple(int(x) for x in m.group("perm").replace(",", " ").split())
        except ValueError:
            raise GroupFileError("root permutation must be a list of integers", lineno, m.start("perm") + 1) from None
        raw_rules.append((lineno, m, m.group("name"), perm, m.group("secs").split("|")))
    if degree is None:
        raise GroupFileError("missing 'degree:' header")
    if not raw_rules:
        raise GroupFileError("no generator rules")

    # generator names are needed before section words can be parsed
    names = [r[2] for r in raw_rules]
    placeholder = tuple(GeneratorRule(nm, tuple(range(degree)), (Word(),) * degree) for nm in names)
    try:
        scratch = GroupPresentation(TreeGeometry(degree), placeholder)
    except PresentationError as exc:
        raise GroupFileError(str(exc)) from None
    rules = []
    for lineno, m, nm, perm, secs in raw_rules:
        if len(perm) != degree or sorted(perm) != list(range(degree)):
            raise GroupFileError(f"rule {nm}: root permutation {list(perm)} is not a bijection of 0..{degree - 1}",
                                 lineno, m.start("perm") + 1)
        if len(secs) != degree:
            raise GroupFileError(f"rule {nm}: expected {degree} sections, got {len(secs)}", lineno, m.start("secs") + 1)
        words = []
        offset = m.start("secs")
        for s in secs:
            try:
                words.append(parse_word(s, scratch))
            except WordParseError as exc:
                col = offset + 1 + (exc.pos or 0)
                raise GroupFileError(f"rule {nm}: {exc}", lineno, col) from None
            offset += len(s) + 1
        rules.append(GeneratorRule(nm, perm, tuple(words)))
    try:
        G = GroupPresentation(TreeGeometry(degree), tuple(rules), name=name, torsion_prime=torsion)
    except PresentationError as exc:
        raise GroupFileError(str(exc)) from None
    rels = []
    for lineno, col, rest in raw_relations:
        try:
            rels.append(_parse_relation(rest, G))
        except WordParseError as exc:
            raise GroupFileError(f"relation: {exc}", lineno, col + 1 + (exc.pos or 0)) from None
    return GroupPresentation(G.geometry, G.rules, tuple(rels), G.name, G.torsion_prime)


def load_group(path) -> GroupPresentation:
    return loads_group(Path(path).read_text(encoding="utf-8"))


def dumps_group(G: GroupPresentation) -> str:
    names = G.names
    lines = [f"degree: {G.degree}"]
    if G.name:
        lines.append(f"name: {G.name}")
    if G.torsion_prime:
        lines.append(f"torsion-prime: {G.torsion_prime}")
    for r in G.rules:
        perm = ", ".join(map(str, r.root_perm))
        secs = " | ".join("" if not s else s.format(names) for s in r.sections)
        lines.append(f"{r.name} = [{perm}] ( {secs} )")
    for lhs, rhs in G.relations:
        if rhs:
            lines.append(f"relation: {lhs.format(names)} = {rhs.format(names)}")
        else:
            lines.append(f"relation: {lhs.format(names)}")
    return "\n".join(lines) + "\n"


def save_group(G: GroupPresentation, path) -> None:
    Path(path).write_text(dumps_group(G), encoding="utf-8")
