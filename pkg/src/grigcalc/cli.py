"""Command-line interface.

Exit codes: 0 success, 1 check failure, 2 usage or parse error,
3 engine refusal or budget exhaustion.

Structured output (``--json``) always has the shape
``{"command": ..., "group": ..., "result": ...}``; the verify suite emits
``{"command": "verify-paper", "checks": [...], "passed": n, "failed": n}``
where every check carries ``name, criterion, tag, status, witness, seconds, command``.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import core
from .core import WordParseError, act_vertex, parse_word, portrait_of, section, vertex_str
from .permquotient import BudgetExceeded, orbit_count, orbits_on_level
from .presets import GroupFileError, group_from_spec
from .subgroups import SpecFileError, classify, load_subgroup, nr_tree_estimate, whole_group
from .wordproblem import EngineRefusal, Unresolved, canonical, element_order, is_trivial

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_REFUSAL = 0, 1, 2, 3


class Refusal(Exception):
    pass


def _emit(args, command: str, result, plain: str) -> None:
    if args.json:
        print(json.dumps({"command": command, "group": args.group, "result": result}, sort_keys=True))
    else:
        print(plain)


# ----------------------------------------------------------------- element

def cmd_element(args) -> int:
    G = group_from_spec(args.group)
    w = parse_word(args.word, G)
    sub = args.element_cmd
    if sub == "eval":
        img = vertex_str(act_vertex(w, args.vertex, G))
        _emit(args, "element eval", img, img)
    elif sub == "section":
        s = G.fmt(canonical(section(w, args.vertex, G), G)) or "1"
        _emit(args, "element section", s, s)
    elif sub == "portrait":
        p = portrait_of(w, args.depth, G)
        rows = {vertex_str(v): list(p.labels[v]) for v in sorted(p.labels, key=lambda v: (len(v), v))}
        plain = "\n".join(f"{v}: {' '.join(map(str, lab))}" for v, lab in rows.items())
        _emit(args, "element portrait", rows, plain)
    elif sub == "trivial":
        t = is_trivial(w, G)
        _emit(args, "element trivial", t, str(t).lower())
    elif sub == "order":
        k = element_order(w, G, cap=args.cap)
        if isinstance(k, Unresolved):
            raise Refusal(f"order exceeds cap {args.cap}")
        _emit(args, "element order", k, str(k))
    return EXIT_OK


# ---------------------------------------------------------------- subgroup

def _load_spec(args, G):
    if not args.spec:
        raise SpecFileError("--spec is required for this subcommand")
    return load_subgroup(args.spec, G, args.name)


def cmd_subgroup(args) -> int:
    G = group_from_spec(args.group)
    sub = args.subgroup_cmd
    if sub == "lattice-over-b":
        from .grig_closure import subgroup_lattice_over_B
        L = subgroup_lattice_over_B()
        result = {"quotient_order": L.quotient_order, "dihedral": L.dihedral, "indices": L.indices,
                  "matches": L.matches, "conjugates": L.conjugates, "normal": L.normal}
        plain = [f"G/B order {L.quotient_order}, dihedral: {str(L.dihedral).lower()}",
                 f"{len(L.subgroups)} subgroups, indices {sorted(L.indices)}"]
        plain += [f"{name}: member {idx} (index {L.indices[idx]})" if idx is not None else f"{name}: unmatched"
                  for name, idx in L.matches.items()]
        _emit(args, "subgroup lattice-over-b", result, "\n".join(plain))
        return EXIT_OK
    H = _load_spec(args, G)
    if sub == "orbits":
        orbs = [[vertex_str(v) for v in o] for o in orbits_on_level(H.generators, args.level, G)]
        plain = f"{len(orbs)} orbits\n" + "\n".join(" ".join(o) for o in orbs)
        _emit(args, "subgroup orbits", orbs, plain)
    elif sub == "index":
        ambient = whole_group(G) if args.ambient == "G" else load_subgroup(args.ambient, G)
        QA, QH = ambient.quotient(args.level), H.quotient(args.level)
        if not QA.contains_group(QH):
            raise Refusal("subgroup image is not contained in the ambient image")
        idx = QA.order() // QH.order()
        _emit(args, "subgroup index", idx, str(idx))
    elif sub == "transitive":
        counts = {n: orbit_count(H.generators, n, G) for n in range(1, args.max_level + 1)}
        bad = [n for n, c in counts.items() if c != 1]
        plain = (f"transitive at levels 1..{args.max_level}" if not bad
                 else f"not transitive at level {bad[0]} ({counts[bad[0]]} orbits)")
        _emit(args, "subgroup transitive", {"orbit_counts": counts, "transitive": not bad}, plain)
    elif sub == "nr-tree":
        rep = nr_tree_estimate(H, args.depth, args.max_level)
        rows = {vertex_str(v): {"status": e.status, "exact": e.exact,
                                "index_sequence": e.index_sequence} for v, e in rep.vertices.items()}
        plain = "\n".join(f"{v}: {r['status']}" for v, r in rows.items())
        plain += (f"\ndownward closed: {str(rep.downward_closed()).lower()}"
                  f"\norbits on the estimated tree by level: {rep.nr_orbit_counts}\nnote: {rep.note}")
        _emit(args, "subgroup nr-tree", {"vertices": rows, "downward_closed": rep.downward_closed(),
                                         "nr_orbit_counts": rep.nr_orbit_counts,
                                         "minimal_action_evidence": rep.minimal_action_evidence()}, plain)
    elif sub == "classify":
        rep = classify(H, args.max_level)
        result = {"verdict": rep.verdict, "orbit_counts": rep.orbit_counts, "index": rep.index_in_group,
                  "transversal_level": rep.transversal_level, "notes": rep.notes}
        _emit(args, "subgroup classify", result, rep.verdict)
    return EXIT_OK


# ------------------------------------------------------------ verify-paper

def cmd_verify(args) -> int:
    from .verify import run_suite
    results = run_suite(args.only)
    if not results:
        raise SpecFileError(f"no check matches {args.only!r}")
    failed = [r for r in results if r.status == "fail"]
    if args.json:
        print(json.dumps({"command": "verify-paper", "checks": [r.as_dict() for r in results],
                          "passed": len(results) - len(failed), "failed": len(failed)}, sort_keys=True))
    else:
        for r in results:
            line = f"[{r.status.upper():4}] c{r.criterion:<2} {r.name}  ({r.seconds:.2f}s)"
            if r.status == "fail":
                line += f"\n        repro: {r.command}\n        witness: {json.dumps(r.witness, sort_keys=True)}"
            print(line)
        print(f"{len(results) - len(failed)} passed, {len(failed)} failed")
    return EXIT_FAIL if failed else EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--group", default="grigorchuk", help="grigorchuk, ggs:p:e0,e1,... or a group file")
    common.add_argument("--json", action="store_true", help="structured output")

    ap = argparse.ArgumentParser(prog="grigcalc", description="Computations in self-similar groups.")
    cmds = ap.add_subparsers(dest="command", required=True)

    el = cmds.add_parser("element", help="operations on a single word")
    els = el.add_subparsers(dest="element_cmd", required=True)
    for name in ("eval", "section"):
        p = els.add_parser(name, parents=[common])
        p.add_argument("word")
        p.add_argument("--vertex", required=True)
    p = els.add_parser("portrait", parents=[common])
    p.add_argument("word")
    p.add_argument("--depth", type=int, default=3)
    p = els.add_parser("trivial", parents=[common])
    p.add_argument("word")
    p = els.add_parser("order", parents=[common])
    p.add_argument("word")
    p.add_argument("--cap", type=int, default=1024)

    sg = cmds.add_parser("subgroup", help="operations on a subgroup spec file")
    sgs = sg.add_subparsers(dest="subgroup_cmd", required=True)

    def spec_parser(name):
        p = sgs.add_parser(name, parents=[common])
        p.add_argument("--spec")
        p.add_argument("--name", help="subgroup name when the file holds several")
        return p

    spec_parser("orbits").add_argument("--level", type=int, required=True)
    p = spec_parser("index")
    p.add_argument("--in", dest="ambient", default="G", help="G or an ambient spec file")
    p.add_argument("--level", type=int, required=True)
    spec_parser("transitive").add_argument("--max-level", type=int, default=8)
    p = spec_parser("nr-tree")
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--max-level", type=int, default=8)
    spec_parser("classify").add_argument("--max-level", type=int, default=8)
    spec_parser("lattice-over-b")

    vp = cmds.add_parser("verify-paper", parents=[common], help="run the verification suite")
    vp.add_argument("--only", help="comma-separated tags, criterion numbers or name fragments")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    handler = {"element": cmd_element, "subgroup": cmd_subgroup, "verify-paper": cmd_verify}[args.command]
    try:
        return handler(args)
    except (WordParseError, SpecFileError, GroupFileError, core.PresentationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (EngineRefusal, BudgetExceeded, Refusal) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSAL


if __name__ == "__main__":
    sys.exit(main())
