"""Safety classes via the augmented chase, range restriction, descendance graphs."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable

import networkx as nx

from .chase import (FIXPOINT, VIOLATION, ChaseState, Fuel, default_fuel, run_dchase,
                    skolem_label)
from .model import (CC, CRIT, DESCENDANT_OF, NS, ORIGIN_CONTEXT, ORIGIN_RULE_ID,
                    ORIGIN_VECTOR, URI, VECTOR_VAR, BridgeRule, Quad, Term, bnode,
                    context_scope, literal, make_rule, normalize_rules, uri, var,
                    vector_isomorphic)

MODES = ("safe", "msafe", "csafe")
YES, NO, UNKNOWN = "yes", "no", "unknown"

VIOLATION_QUADS = {
    "safe": Quad(CC, uri(NS + "unsafe"), uri(NS + "unsafe"), uri(NS + "unsafe")),
    "msafe": Quad(CC, uri(NS + "unmsafe"), uri(NS + "unmsafe"), uri(NS + "unmsafe")),
    "csafe": Quad(CC, uri(NS + "uncsafe"), uri(NS + "uncsafe"), uri(NS + "uncsafe")),
}
TRANSITIVITY_ID = -1


def transitivity_rule() -> BridgeRule:
    x1, z1, x2 = var("x1"), var("z1"), var("x2")
    return make_rule(TRANSITIVITY_ID,
                     [Quad(CC, x1, DESCENDANT_OF, z1), Quad(CC, z1, DESCENDANT_OF, x2)],
                     [Quad(CC, x1, DESCENDANT_OF, x2)], name="brTR")


def augment_rule(r: BridgeRule, mode: str) -> BridgeRule:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if not r.existential:
        return r
    extra: list[Quad] = []
    for y in r.existential:
        extra += [Quad(CC, x, DESCENDANT_OF, y) for x in r.frontier]
        extra.append(Quad(CC, y, DESCENDANT_OF, y))
        if mode in ("safe", "msafe"):
            extra.append(Quad(CC, y, ORIGIN_RULE_ID, literal(str(r.id))))
        if mode == "safe":
            extra.append(Quad(CC, y, ORIGIN_VECTOR, VECTOR_VAR))
        if mode == "csafe":
            for c in sorted(context_scope(y, r.head)):
                extra.append(Quad(CC, y, ORIGIN_CONTEXT, c))
    # the original head alone decides applicability; see the decisions ledger
    return make_rule(r.id, r.body, r.head + tuple(extra), parent=r.parent,
                     guard=r.head, name=r.name)


def augment_rules(rules: Iterable[BridgeRule], mode: str) -> list[BridgeRule]:
    rules = list(rules)
    out = [augment_rule(r, mode) for r in rules]
    if out:
        out.append(transitivity_rule())
    return out


def descendants_or_self(state: ChaseState, b: Term) -> list[Term]:
    """Blanks d with c_c:(d, descendantOf, b), closed over the direct accounting quads."""
    seen = {b: None}
    todo = deque([b])
    out = []
    while todo:
        cur = todo.popleft()
        for q in state.store.index.get((3, cur), ()):
            if q.c != CC or q.p != DESCENDANT_OF:
                continue
            if q.s == cur and cur == b and b not in out:
                out.append(b)
            if q.s not in seen:
                seen[q.s] = None
                out.append(q.s)
                todo.append(q.s)
    return out


def violation_test(rule: BridgeRule, binding: dict, state: ChaseState, mode: str) -> dict | None:
    """Witness if applying (rule, binding) would break the mode's condition."""
    if not rule.existential:
        return None
    vector = tuple(binding[x] for x in rule.frontier)
    scopes = {context_scope(y, rule.head) - {CC} for y in rule.existential}
    for b in dict.fromkeys(t for t in vector if t.is_blank):
        for d in descendants_or_self(state, b):
            meta = state.skolems.get(d)
            if meta is None:
                continue
            if mode == "safe":
                hit = meta.rule_id == rule.id and vector_isomorphic(meta.vector, vector)
            elif mode == "msafe":
                hit = meta.rule_id == rule.id
            else:
                hit = meta.contexts in scopes
            if hit:
                fresh = [bnode(skolem_label(rule.id, y.value, vector)) for y in rule.existential]
                return {"mode": mode, "ruleId": rule.id, "frontierBlank": b,
                        "newBlanks": fresh,
                        "descendant": d, "descendantRuleId": meta.rule_id,
                        "vector": list(vector), "descendantVector": list(meta.vector),
                        "descendantContexts": meta.contexts}
    return None


def _hook(mode: str):
    def hook(state, rule, binding, body):
        w = violation_test(rule, binding, state, mode)
        return None if w is None else (VIOLATION_QUADS[mode], w)
    return hook


def augmented_chase(graph: Iterable[Quad], rules: Iterable[BridgeRule], mode: str,
                    fuel: Fuel | None = None, oblivious: bool = False) -> ChaseState:
    aug = augment_rules(normalize_rules(rules), mode)
    return run_dchase(graph, aug, fuel or default_fuel(), oblivious=oblivious,
                      hook=_hook(mode))


def verdict(state: ChaseState) -> str:
    if state.status == FIXPOINT:
        return YES
    if state.status == VIOLATION:
        return NO
    return UNKNOWN


def check_rr(rules: Iterable[BridgeRule], bound: int = 3) -> dict:
    rules = normalize_rules(rules)
    rr = all(not r.existential for r in rules)
    n = max((len(r.body) for r in rules), default=0)
    return {"rr": rr, "restrictedRR": rr and n <= bound, "maxBody": n}


@dataclass
class Classification:
    safe: str = UNKNOWN
    msafe: str = UNKNOWN
    csafe: str = UNKNOWN
    rr: bool = False
    restrictedRR: bool = False
    maxBody: int = 0
    witness: dict = field(default_factory=dict)
    sizes: dict = field(default_factory=dict)
    iterations: dict = field(default_factory=dict)

    def get(self, mode: str) -> str:
        return getattr(self, mode)

    def to_report(self) -> dict:
        return {"safe": self.safe, "msafe": self.msafe, "csafe": self.csafe,
                "rr": self.rr, "restrictedRR": self.restrictedRR, "maxBody": self.maxBody,
                "witness": self.witness, "augmentedChaseSize": self.sizes,
                "iterations": self.iterations}


def classify(graph: Iterable[Quad], rules: Iterable[BridgeRule], fuel: Fuel | None = None,
             modes: Iterable[str] = MODES, oblivious: bool = False,
             rr_bound: int = 3) -> Classification:
    graph = set(graph)
    rules = list(rules)
    out = Classification(**check_rr(rules, rr_bound))
    for mode in modes:
        st = augmented_chase(graph, rules, mode, fuel, oblivious)
        setattr(out, mode, verdict(st))
        out.sizes[mode] = len(st)
        out.iterations[mode] = st.iteration
        if st.witness is not None:
            out.witness[mode] = st.witness
    return out


def classify_system(qs, fuel: Fuel | None = None, **kw) -> Classification:
    return classify(qs.graph, qs.rules, fuel, **kw)


# ---------------------------------------------------------------- universal safety

def critical_quad_graph(rules: Iterable[BridgeRule]) -> set[Quad]:
    rules = list(rules)
    ctxs = sorted({q.c for r in rules for q in r.body + r.head})
    if not ctxs:
        return set()
    consts = {t for r in rules for q in r.body + r.head for t in q.terms() if t.kind == URI}
    universe = sorted(consts) + [CRIT]
    return {Quad(c, s, p, o) for c in ctxs for s, p, o in product(universe, repeat=3)}


def check_universal(rules: Iterable[BridgeRule], mode: str = "safe",
                    fuel: Fuel | None = None) -> str:
    """Safety of the rule set for every instance, decided on the critical quad-graph.

    The critical graph satisfies every rule head outright (the ad hoc blank
    can witness any existential), so a restricted chase over it never fires.
    Rules with existentials therefore fire once per frontier image here.
    """
    rules = list(rules)
    st = augmented_chase(critical_quad_graph(rules), rules, mode, fuel, oblivious=True)
    return verdict(st)


# ---------------------------------------------------------------- descendance graphs

def _node_term(n) -> Term:
    return n if isinstance(n, Term) else n[0]


@dataclass
class DescendanceGraph:
    root: object
    nodes: list
    edges: set
    labels: dict  # Term -> (ruleId, vector, contexts) or None for n.d.

    def term(self, node) -> Term:
        return _node_term(node)

    def label(self, node):
        return self.labels.get(_node_term(node))

    def children(self, node) -> list:
        return sorted((t for s, t in self.edges if s == node), key=repr)

    def leaves(self) -> list:
        has_out = {s for s, _ in self.edges}
        return [n for n in self.nodes if n not in has_out]

    def order(self) -> int:
        out: dict = {}
        for s, _ in self.edges:
            out[s] = out.get(s, 0) + 1
        return max(out.values(), default=0)

    def digraph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(self.edges)
        return g

    def to_dot(self) -> str:
        ids = {n: f"n{i}" for i, n in enumerate(self.nodes)}
        lines = ["digraph descendance {"]
        for n in self.nodes:
            lab = self.label(n)
            extra = "" if lab is None else f"\\nr={lab[0]}"
            lines.append(f'  {ids[n]} [label="{self.term(n)}{extra}"];')
        for s, t in sorted(self.edges, key=lambda e: (ids[e[0]], ids[e[1]])):
            lines.append(f"  {ids[s]} -> {ids[t]};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_descendance(state: ChaseState, root: Term) -> DescendanceGraph:
    if root not in state.skolems:
        raise KeyError(f"{root} is not a Skolem blank node of this chase")
    g = nx.DiGraph()
    todo = deque([root])
    g.add_node(root)
    while todo:
        cur = todo.popleft()
        meta = state.skolems.get(cur)
        if meta is None:
            continue
        for ch in sorted(meta.children):
            if ch not in g:
                todo.append(ch)
            g.add_edge(cur, ch)
    closure = nx.transitive_closure_dag(g) if nx.is_directed_acyclic_graph(g) \
        else nx.transitive_closure(g, reflexive=False)
    nodes = sorted(g.nodes)
    labels = {}
    for n in nodes:
        m = state.skolems.get(n)
        labels[n] = None if m is None else (m.rule_id, m.vector, m.contexts)
    return DescendanceGraph(root, nodes, set(closure.edges), labels)


def unravel(g: DescendanceGraph) -> DescendanceGraph:
    """Transitive reduction followed by splitting every node of indegree k > 1 into k copies."""
    dg = g.digraph()
    if not nx.is_directed_acyclic_graph(dg):
        raise ValueError("descendance graph has a cycle")
    red = nx.transitive_reduction(dg)
    work = nx.DiGraph()
    copies: dict = {}
    for n in red.nodes:
        node = (n, 0)
        work.add_node(node)
        copies[n] = [node]
    for s, t in red.edges:
        work.add_edge((s, 0), (t, 0))
    serial = {n: 1 for n in red.nodes}
    for n in nx.lexicographical_topological_sort(red, key=repr):
        for node in list(copies[n]):
            preds = sorted(work.predecessors(node), key=repr)
            if len(preds) <= 1:
                continue
            succs = sorted(work.successors(node), key=repr)
            work.remove_node(node)
            copies[n].remove(node)
            for p in preds:
                fresh = (n, serial[n])
                serial[n] += 1
                copies[n].append(fresh)
                work.add_edge(p, fresh)
                for s in succs:
                    work.add_edge(fresh, s)
    reach = nx.descendants(work, (g.root, 0)) | {(g.root, 0)}
    nodes = sorted(reach, key=lambda n: (repr(n[0]), n[1]))
    edges = {(s, t) for s, t in work.edges if s in reach and t in reach}
    labels = {_node_term(n): g.labels.get(_node_term(n)) for n in nodes}
    return DescendanceGraph((g.root, 0), nodes, edges, labels)
