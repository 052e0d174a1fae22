"""Ternary forall-exists rules: translation from quad-systems and acyclicity tests."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import networkx as nx

from .chase import FIXPOINT, HALTED, Fuel, default_fuel, run_dchase
from .model import (BOX, NS, VAR, BridgeRule, Quad, QuadSystem, Term, make_rule,
                    normalize_rules, uri, var)
from .safety import NO, UNKNOWN, YES
from .textio import ParseError, _Cursor, _decode, tokenize

QC_ID = 0  # id of the body-empty rule holding the instance


class Atom(NamedTuple):
    pred: Term
    args: tuple[Term, ...]

    def __str__(self) -> str:
        return f"{self.pred}(" + ", ".join(map(str, self.args)) + ")"


def _vars(atoms: Iterable[Atom]) -> list[Term]:
    seen: dict[Term, None] = {}
    for a in atoms:
        for t in a.args:
            if t.kind == VAR:
                seen.setdefault(t)
    return list(seen)


@dataclass(frozen=True)
class FERule:
    id: int
    body: tuple[Atom, ...]
    head: tuple[Atom, ...]
    name: str = ""

    @property
    def universal(self) -> tuple[Term, ...]:
        return tuple(_vars(self.body))

    @property
    def frontier(self) -> tuple[Term, ...]:
        b = set(self.universal)
        return tuple(v for v in _vars(self.head) if v in b)

    @property
    def existential(self) -> tuple[Term, ...]:
        b = set(self.universal)
        return tuple(v for v in _vars(self.head) if v not in b)

    def __str__(self) -> str:
        return (f"[{self.id}] " + ", ".join(map(str, self.body)) + " => "
                + ", ".join(map(str, self.head)) + " .").replace("]  =>", "] =>")


Position = tuple[Term, int]


def pos_text(p: Position) -> str:
    return f"<{p[0].value},{p[1]}>"


# ---------------------------------------------------------------- translations

def quad_atom(q: Quad) -> Atom:
    return Atom(q.c, (q.s, q.p, q.o))


def blank_var(t: Term) -> Term:
    return var("_b_" + t.value) if t.is_blank else t


def translate_to_rules(graph: Iterable[Quad], rules: Iterable[BridgeRule]) -> list[FERule]:
    out: list[FERule] = []
    graph = sorted(set(graph))
    if graph:
        head = tuple(Atom(q.c, tuple(blank_var(t) for t in q.terms())) for q in graph)
        out.append(FERule(QC_ID, (), head, "r_QC"))
    # heads are split the same way the chase splits them, so guards line up
    for r in normalize_rules(rules):
        out.append(FERule(r.id, tuple(map(quad_atom, r.body)), tuple(map(quad_atom, r.head)),
                          r.name))
    return out


def translate_system(qs: QuadSystem) -> list[FERule]:
    return translate_to_rules(qs.graph, qs.rules)


def chi(a: Atom) -> Quad:
    if len(a.args) > 3:
        raise ValueError(f"atom of arity {len(a.args)} > 3: {a}")
    args = tuple(a.args) + (BOX,) * (3 - len(a.args))
    return Quad(a.pred, *args)


def to_bridge_rule(r: FERule) -> BridgeRule:
    return make_rule(r.id, [chi(a) for a in r.body], [chi(a) for a in r.head], name=r.name)


def translate_from_rules(rules: Iterable[FERule]) -> QuadSystem:
    """Inverse direction with padding: body-empty rules become instance quads."""
    graph: set[Quad] = set()
    brs: list[BridgeRule] = []
    for r in rules:
        if not r.body:
            for a in r.head:
                q = chi(a)
                graph.add(Quad(*(Term(1, "x_" + t.value) if t.kind == VAR else t for t in q)))
        else:
            brs.append(to_bridge_rule(r))
    return QuadSystem(graph, brs)


# ---------------------------------------------------------------- parsing / printing

def parse_fe_rules(data: str | bytes) -> list[FERule]:
    cur = _Cursor(tokenize(_decode(data)))
    out: list[FERule] = []
    ids: set[int] = set()
    n = 0
    while not cur.done():
        if cur.peek().kind == "directive":
            cur.directive()
            continue
        n += 1
        rid = n
        line = cur.line()
        if cur.at("["):
            cur.next()
            tok = cur.next()
            if tok.kind != "num":
                raise ParseError("rule id must be a non-negative integer", tok.line)
            rid = int(tok.text)
            cur.expect("]")

        def atoms(stop):
            res = []
            if cur.at(stop):
                return res
            while True:
                tok = cur.next()
                if tok.kind not in ("name", "iri"):
                    raise ParseError(f"expected predicate, found {tok.text!r}", tok.line)
                pred = uri(tok.text[1:-1]) if tok.kind == "iri" else cur.expand(tok)
                cur.expect("(")
                args = [cur.term(allow_bnode=False)]
                while cur.at(","):
                    cur.next()
                    args.append(cur.term(allow_bnode=False))
                cur.expect(")")
                res.append(Atom(pred, tuple(args)))
                if not cur.at(","):
                    return res
                cur.next()

        body = atoms("=>")
        arrow = cur.next()
        if arrow.kind != "arrow":
            raise ParseError(f"expected '=>', found {arrow.text!r}", arrow.line)
        head = atoms(".")
        cur.expect(".")
        if rid in ids:
            raise ParseError(f"duplicate rule id {rid}", line)
        ids.add(rid)
        out.append(FERule(rid, tuple(body), tuple(head)))
    return out


def serialize_fe_rules(rules: Iterable[FERule]) -> str:
    return "".join(str(r) + "\n" for r in rules)


# ---------------------------------------------------------------- weak acyclicity

def _positions(atoms: Iterable[Atom], v: Term) -> set[Position]:
    return {(a.pred, i + 1) for a in atoms for i, t in enumerate(a.args) if t == v}


def _all_positions(rules: Iterable[FERule]) -> set[Position]:
    return {(a.pred, i + 1) for r in rules for a in r.body + r.head for i in range(len(a.args))}


@dataclass
class PositionGraph:
    nodes: set = field(default_factory=set)
    normal: set = field(default_factory=set)
    special: set = field(default_factory=set)

    def digraph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(self.normal | self.special)
        return g

    def to_dot(self) -> str:
        lines = ["digraph positions {"]
        for n in sorted(self.nodes):
            lines.append(f'  "{pos_text(n)}";')
        for s, t in sorted(self.normal | self.special):
            style = " [style=dashed,label=\"*\"]" if (s, t) in self.special else ""
            lines.append(f'  "{pos_text(s)}" -> "{pos_text(t)}"{style};')
        lines.append("}")
        return "\n".join(lines) + "\n"


def dependency_graph(rules: Iterable[FERule]) -> PositionGraph:
    rules = list(rules)
    g = PositionGraph(nodes=_all_positions(rules))
    for r in rules:
        ex_pos = set().union(*[_positions(r.head, y) for y in r.existential]) \
            if r.existential else set()
        for x in r.frontier:
            for src in _positions(r.body, x):
                for dst in _positions(r.head, x):
                    g.normal.add((src, dst))
                for dst in ex_pos:
                    g.special.add((src, dst))
    return g


def weakly_acyclic(rules: Iterable[FERule]) -> dict:
    g = dependency_graph(rules)
    dg = g.digraph()
    comp = {}
    for k, scc in enumerate(nx.strongly_connected_components(dg)):
        for n in scc:
            comp[n] = k
    witness = None
    for s, t in sorted(g.special):
        if comp[s] == comp[t]:
            back = nx.shortest_path(dg, t, s)
            witness = [s] + back
            break
    return {"result": witness is None, "graph": g, "witnessCycle": witness}


# ---------------------------------------------------------------- joint acyclicity

def rename_apart(rules: Iterable[FERule]) -> list[FERule]:
    out = []
    for r in rules:
        ren = {v: var(f"{v.value}.{r.id}") for v in _vars(r.body + r.head)}

        def sub(a: Atom) -> Atom:
            return Atom(a.pred, tuple(ren.get(t, t) for t in a.args))
        out.append(FERule(r.id, tuple(map(sub, r.body)), tuple(map(sub, r.head)), r.name))
    return out


def base_name(v: Term) -> str:
    return v.value.rsplit(".", 1)[0]


def mov_set(rules: list[FERule], rule: FERule, y: Term) -> set[Position]:
    mov = set(_positions(rule.head, y))
    changed = True
    while changed:
        changed = False
        for r in rules:
            for x in r.universal:
                pb = _positions(r.body, x)
                if pb <= mov:
                    ph = _positions(r.head, x)
                    if not ph <= mov:
                        mov |= ph
                        changed = True
    return mov


def jointly_acyclic(rules: Iterable[FERule]) -> dict:
    rules = rename_apart(rules)
    g = nx.DiGraph()
    movs: dict = {}
    for r in rules:
        for y in r.existential:
            g.add_node((r.id, y))
    for r in rules:
        for y in r.existential:
            mov = mov_set(rules, r, y)
            movs[(r.id, var(base_name(y)))] = mov
            for r2 in rules:
                if not r2.existential:
                    continue
                if any(_positions(r2.body, x) <= mov for x in r2.frontier):
                    for y2 in r2.existential:
                        g.add_edge((r.id, y), (r2.id, y2))
    cycle = None
    try:
        cycle = nx.find_cycle(g)
    except nx.NetworkXNoCycle:
        pass
    return {"result": cycle is None, "graph": g, "movSets": movs, "witnessCycle": cycle}


def edg_dot(g: nx.DiGraph) -> str:
    name = lambda n: f"{base_name(n[1])}@r{n[0]}"
    lines = ["digraph existential_dependencies {"]
    for n in sorted(g.nodes):
        lines.append(f'  "{name(n)}";')
    for s, t in sorted(g.edges):
        lines.append(f'  "{name(s)}" -> "{name(t)}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- MFA

S_PRED = uri(NS + "S")
C_QUAD = Quad(uri(NS + "C"), BOX, BOX, BOX)


def y_pred(rid: int, j: int) -> Term:
    return uri(f"{NS}Y_{rid}_{j}")


def mfa_rules(rules: Iterable[FERule]) -> list[BridgeRule]:
    """mfa(P) as padded bridge rules; Y/S atoms are bookkeeping outside the guard."""
    out: list[BridgeRule] = []
    aux = -1
    x1, x2, x3 = var("x1"), var("x2"), var("x3")
    out.append(make_rule(aux, [Quad(S_PRED, x1, x2, BOX), Quad(S_PRED, x2, x3, BOX)],
                         [Quad(S_PRED, x1, x3, BOX)], name="S-trans"))
    for r in rules:
        core = [chi(a) for a in r.head]
        body = [chi(a) for a in r.body]
        if not r.existential:
            out.append(make_rule(r.id, body, core, name=r.name))
            continue
        extra = []
        for j, y in enumerate(r.existential, start=1):
            extra.append(Quad(y_pred(r.id, j), y, BOX, BOX))
            extra += [Quad(S_PRED, x, y, BOX) for x in r.frontier]
            aux -= 1
            out.append(make_rule(aux, [Quad(y_pred(r.id, j), x1, BOX, BOX),
                                       Quad(S_PRED, x1, x2, BOX),
                                       Quad(y_pred(r.id, j), x2, BOX, BOX)],
                                 [C_QUAD], name=f"C-{r.id}-{j}"))
        out.append(make_rule(r.id, body, core + extra, guard=core, name=r.name))
    return out


def mfa_check(rules: Iterable[FERule], fuel: Fuel | None = None) -> str:
    rules = list(rules)
    if not any(r.existential for r in rules):
        return YES
    st = run_dchase([], mfa_rules(rules), fuel or default_fuel(), halt=frozenset([C_QUAD]))
    if st.status == HALTED or C_QUAD in st.store:
        return NO
    return YES if st.status == FIXPOINT else UNKNOWN


def chase_rules(rules: Iterable[FERule], fuel: Fuel | None = None):
    """Chase of a ternary rule set (padded), starting from the empty instance."""
    return run_dchase([], [to_bridge_rule(r) for r in rules], fuel or default_fuel())


def analyze(rules: Iterable[FERule], fuel: Fuel | None = None) -> dict:
    rules = list(rules)
    wa = weakly_acyclic(rules)
    ja = jointly_acyclic(rules)
    mfa = mfa_check(rules, fuel)
    return {"WA": YES if wa["result"] else NO, "JA": YES if ja["result"] else NO,
            "MFA": mfa,
            "movSets": {f"{base_name(y)}@r{rid}": sorted(pos_text(p) for p in m)
                        for (rid, y), m in ja["movSets"].items()},
            "waWitness": [pos_text(p) for p in wa["witnessCycle"]] if wa["witnessCycle"] else None}
