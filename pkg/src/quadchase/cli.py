"""Command-line front end. Each command loads inputs, calls the library, writes results."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import analysis, gadgets, query, safety
from .chase import FIXPOINT, Fuel, default_fuel, lclosure_pack, run_dchase
from .model import QuadSystem, normalize_rules
from .textio import (ParseError, parse_nquads, parse_query, parse_rules,
                     serialize_nquads, serialize_query, serialize_report,
                     serialize_rules, to_jsonable)

EXIT_OK, EXIT_PARSE, EXIT_IO, EXIT_FUEL = 0, 1, 2, 3


class InputError(Exception):
    pass


def _read(path: str | None) -> str:
    if path is None:
        return ""
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror or e}") from e


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot write {path}: {e.strerror or e}") from e


def _fuel(args) -> Fuel:
    base = default_fuel()
    return Fuel(args.fuel_iterations or base.max_iterations, args.fuel_quads or base.max_quads)


def _system(args) -> QuadSystem:
    graph = parse_nquads(_read(args.data), generalized=args.generalized)
    rules = parse_rules(_read(args.rules)).rules if args.rules else []
    qs = QuadSystem(graph, normalize_rules(rules))
    if args.lir != "simple":
        start = max((r.id for r in qs.rules), default=0) + 1
        qs.rules += lclosure_pack(args.lir, qs.contexts, start)
    return qs


def _digest(*texts: str) -> str:
    h = hashlib.sha1()
    for t in texts:
        h.update(t.encode("utf-8"))
        h.update(b"\0")
    return h.hexdigest()[:12]


def _emit(text: str) -> None:
    sys.stdout.write(text)


def cmd_chase(args) -> int:
    qs = _system(args)
    st = run_dchase(qs.graph, qs.rules, _fuel(args))
    report = st.to_report()
    report["skolemMeta"] = [st.skolems[b] for b in sorted(st.skolems)]
    nq = serialize_nquads(st.quads)
    log = "".join(json.dumps(to_jsonable(s), sort_keys=True, ensure_ascii=False) + "\n"
                  for s in st.log)
    if args.out:
        stem = "chase-" + _digest(_read(args.data), _read(args.rules))
        out = Path(args.out)
        _write(out / f"{stem}.nq", nq)
        _write(out / f"{stem}.log.jsonl", log)
        _write(out / f"{stem}.json", serialize_report(report))
    _emit(nq if args.format == "nquads" else serialize_report(report))
    return EXIT_OK if st.status == FIXPOINT else EXIT_FUEL


def cmd_classify(args) -> int:
    qs = _system(args)
    modes = safety.MODES if args.mode == "all" else (args.mode,)
    fuel = _fuel(args)
    if args.universal:
        report = {m: safety.check_universal(qs.rules, m, fuel) for m in modes}
        report.update(safety.check_rr(qs.rules))
        report["universal"] = True
    else:
        report = safety.classify(qs.graph, qs.rules, fuel, modes).to_report()
    _emit(serialize_report(report))
    return EXIT_OK


def cmd_query(args) -> int:
    qs = _system(args)
    q = parse_query(_read(args.query))
    st = run_dchase(qs.graph, qs.rules, _fuel(args))
    complete = st.status == FIXPOINT
    if q.is_boolean:
        result = {"boolean": query.eval_boolean(q, st), "complete": complete}
        if args.format == "tsv":
            _emit(("true" if result["boolean"] else "false") + "\n")
        else:
            _emit(serialize_report(result))
    else:
        ans = query.eval_select(q, st, allow_skolem=args.allow_skolem_answers)
        if args.format == "tsv":
            lines = ["\t".join(str(v) for v in q.free)]
            lines += ["\t".join(str(t) for t in row) for row in ans.bindings]
            _emit("\n".join(lines) + "\n")
        else:
            report = ans.to_report()
            report["variables"] = [str(v) for v in q.free]
            _emit(serialize_report(report))
    return EXIT_OK if complete else EXIT_FUEL


def cmd_translate(args) -> int:
    if args.from_rules:
        fe = analysis.parse_fe_rules(_read(args.from_rules))
        qs = analysis.translate_from_rules(fe)
        data, rules = serialize_nquads(qs.graph), serialize_rules(qs.rules)
        if args.out:
            _write(Path(args.out) / "data.nq", data)
            _write(Path(args.out) / "rules.txt", rules)
        _emit("# data\n" + data + "# rules\n" + rules)
        return EXIT_OK
    qs = _system(args)
    text = analysis.serialize_fe_rules(analysis.translate_to_rules(qs.graph, qs.rules))
    if args.out:
        _write(Path(args.out) / "ternary.rules", text)
    _emit(text)
    return EXIT_OK


def cmd_analyze(args) -> int:
    if args.ternary:
        fe = analysis.parse_fe_rules(_read(args.ternary))
    else:
        qs = _system(args)
        fe = analysis.translate_to_rules(qs.graph, qs.rules)
    report = analysis.analyze(fe, _fuel(args))
    if args.dot:
        out = Path(args.dot)
        _write(out / "positions.dot", analysis.weakly_acyclic(fe)["graph"].to_dot())
        _write(out / "existentials.dot", analysis.edg_dot(analysis.jointly_acyclic(fe)["graph"]))
    _emit(serialize_report(report))
    return EXIT_OK


def _load_json(path: str):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: {e.msg}", e.lineno) from e


def cmd_gen(args) -> int:
    kind = args.gadget
    if kind == "three-color":
        if args.graph:
            doc = _load_json(args.graph)
            vertices, edges = doc["vertices"], [tuple(e) for e in doc["edges"]]
        else:
            vertices = [f"v{i}" for i in range(args.k)]
            edges = [(a, b) for i, a in enumerate(vertices) for b in vertices[i + 1:]]
        qs, q = gadgets.three_color(vertices, edges)
    elif kind == "horn":
        qs, q = gadgets.horn_sat([tuple(c) for c in _load_json(args.formula)])
    elif kind == "cfg":
        qs, q = gadgets.cfg_intersection(gadgets.CFG.from_json(_load_json(args.g1)),
                                         gadgets.CFG.from_json(_load_json(args.g2)))
    else:
        m = gadgets.DTM.from_json(_load_json(args.machine))
        qs, q = gadgets.dtm_system(m, list(args.input), args.n)
    out = Path(args.out)
    _write(out / "data.nq", serialize_nquads(qs.graph))
    _write(out / "rules.txt", serialize_rules(qs.rules))
    _write(out / "query.txt", serialize_query(q))
    _emit(serialize_report({"gadget": kind, "quads": len(qs.graph), "rules": len(qs.rules),
                            "files": ["data.nq", "rules.txt", "query.txt"]}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", help="N-Quads file")
    common.add_argument("--rules", help="bridge rule file")
    common.add_argument("--fuel-iterations", type=int, default=None)
    common.add_argument("--fuel-quads", type=int, default=None)
    common.add_argument("--lir", choices=["simple", "rdfs-min"], default="simple")
    common.add_argument("--generalized", action="store_true",
                        help="accept literals and blank nodes in any triple position")

    p = argparse.ArgumentParser(prog="quadchase", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("chase", parents=[common], help="compute the dChase")
    c.add_argument("--out", help="directory for N-Quads, JSON report and iteration log")
    c.add_argument("--format", choices=["json", "nquads"], default="json")
    c.set_defaults(func=cmd_chase)

    c = sub.add_parser("classify", parents=[common], help="safe / msafe / csafe / RR")
    c.add_argument("--mode", choices=["safe", "msafe", "csafe", "all"], default="all")
    c.add_argument("--universal", action="store_true",
                   help="decide for every instance via the critical quad-graph")
    c.set_defaults(func=cmd_classify)

    c = sub.add_parser("query", parents=[common], help="answer a CCQ")
    c.add_argument("--query", required=True)
    c.add_argument("--format", choices=["json", "tsv"], default="json")
    c.add_argument("--allow-skolem-answers", action="store_true")
    c.set_defaults(func=cmd_query)

    c = sub.add_parser("translate", parents=[common], help="to and from ternary rules")
    c.add_argument("--from-rules", help="ternary rule file to turn into a quad-system")
    c.add_argument("--out")
    c.set_defaults(func=cmd_translate)

    c = sub.add_parser("analyze", parents=[common], help="WA / JA / MFA")
    c.add_argument("--ternary", help="ternary rule file (instead of --data/--rules)")
    c.add_argument("--dot", help="directory for DOT graphs")
    c.set_defaults(func=cmd_analyze)

    c = sub.add_parser("gen", parents=[common], help="generate a reduction gadget")
    c.add_argument("gadget", choices=["three-color", "horn", "cfg", "dtm"])
    c.add_argument("--out", required=True)
    c.add_argument("--k", type=int, default=3, help="complete graph size for three-color")
    c.add_argument("--graph", help="JSON {vertices, edges}")
    c.add_argument("--formula", help="JSON list of [P1, P2, P3] clauses")
    c.add_argument("--g1")
    c.add_argument("--g2")
    c.add_argument("--machine", help="JSON machine description")
    c.add_argument("--input", default="")
    c.add_argument("--n", type=int, default=1)
    c.set_defaults(func=cmd_gen)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ParseError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
