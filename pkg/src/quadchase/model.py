"""Terms, quads, bridge rules and the total orders used by the chase."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

URI, BNODE, LITERAL, VAR = 0, 1, 2, 3
KIND_NAMES = {URI: "uri", BNODE: "bnode", LITERAL: "literal", VAR: "var"}

NS = "urn:quadchase:"


class Term(NamedTuple):
    """A constant or variable.

    Tuple comparison gives the constant order: kind rank first
    (URI < blank node < literal), then code-point order of the lexical form.
    The datatype and language tag take part in the key as opaque strings.
    """

    kind: int
    value: str
    datatype: str = ""
    lang: str = ""

    def __str__(self) -> str:
        if self.kind == URI:
            return f"<{self.value}>"
        if self.kind == BNODE:
            return f"_:{self.value}"
        if self.kind == VAR:
            return f"?{self.value}"
        text = '"' + escape_literal(self.value) + '"'
        if self.lang:
            return f"{text}@{self.lang}"
        if self.datatype:
            return f"{text}^^<{self.datatype}>"
        return text

    @property
    def is_var(self) -> bool:
        return self.kind == VAR

    @property
    def is_blank(self) -> bool:
        return self.kind == BNODE


_SHORT_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def escape_literal(text: str) -> str:
    out = []
    for ch in text:
        if ch in _SHORT_ESCAPES:
            out.append(_SHORT_ESCAPES[ch])
        elif ord(ch) < 0x20 or ch in "\x7f\x85\u2028\u2029":
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


def uri(value: str) -> Term:
    if not value:
        raise ValueError("empty URI")
    return Term(URI, value)


def bnode(value: str) -> Term:
    if not value:
        raise ValueError("empty blank node label")
    return Term(BNODE, value)


def literal(value: str, datatype: str = "", lang: str = "") -> Term:
    return Term(LITERAL, value, datatype, lang)


def var(name: str) -> Term:
    if not name:
        raise ValueError("empty variable name")
    return Term(VAR, name)


# reserved vocabulary
CC = uri(NS + "cc")
DESCENDANT_OF = uri(NS + "descendantOf")
ORIGIN_RULE_ID = uri(NS + "originRuleId")
ORIGIN_VECTOR = uri(NS + "originVector")
ORIGIN_CONTEXT = uri(NS + "originContext")
BOX = uri(NS + "box")
BOTTOM = uri(NS + "bottom")
CRIT = bnode("b_crit")
# head-only variable bound at application time to the origin-vector literal
VECTOR_VAR = Term(VAR, "__vector")
RDF_TYPE = uri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")


class Quad(NamedTuple):
    """c:(s,p,o). The same shape doubles as a quad pattern when it holds variables."""

    c: Term
    s: Term
    p: Term
    o: Term

    def __str__(self) -> str:
        return f"{self.c}:({self.s}, {self.p}, {self.o})"

    def terms(self) -> tuple[Term, Term, Term]:
        return (self.s, self.p, self.o)


def make_quad(c: Term, s: Term, p: Term, o: Term) -> Quad:
    q = Quad(c, s, p, o)
    if c.kind != URI:
        raise ValueError(f"context must be a URI: {c}")
    if any(t.kind == VAR for t in q):
        raise ValueError(f"variable inside a quad: {q}")
    return q


def compare(a, b) -> int:
    return (a > b) - (a < b)


def compare_terms(a: Term, b: Term) -> int:
    return compare(a, b)


def compare_quads(q1: Quad, q2: Quad) -> int:
    return compare(q1, q2)


def graph_key(quads: Iterable[Quad]) -> tuple:
    """Sort key realising the quad-graph order.

    Graphs are compared as their quads sorted in descending order: a proper
    subset is smaller, otherwise the graph holding the greatest quad of the
    symmetric difference is greater.
    """
    return tuple(sorted(set(quads), reverse=True))


def compare_graphs(g1: Iterable[Quad], g2: Iterable[Quad]) -> int:
    return compare(graph_key(g1), graph_key(g2))


def vector_isomorphic(v: tuple[Term, ...], w: tuple[Term, ...]) -> bool:
    if len(v) != len(w):
        return False
    fwd: dict[Term, Term] = {}
    back: dict[Term, Term] = {}
    for a, b in zip(v, w):
        if a.is_blank != b.is_blank:
            return False
        if not a.is_blank:
            if a != b:
                return False
            continue
        if fwd.setdefault(a, b) != b or back.setdefault(b, a) != a:
            return False
    return True


def context_scope(t: Term, patterns: Iterable[Quad]) -> frozenset[Term]:
    return frozenset(q.c for q in patterns if t in q.terms())


def project_graph(quads: Iterable[Quad], c: Term) -> set[tuple[Term, Term, Term]]:
    return {q.terms() for q in quads if q.c == c}


def variables(patterns: Iterable[Quad]) -> list[Term]:
    """Variables in order of first occurrence."""
    seen: dict[Term, None] = {}
    for q in patterns:
        for t in q:
            if t.kind == VAR:
                seen.setdefault(t)
    return list(seen)


@dataclass(frozen=True)
class BridgeRule:
    id: int
    body: tuple[Quad, ...]
    head: tuple[Quad, ...]
    frontier: tuple[Term, ...]
    existential: tuple[Term, ...]
    body_only: tuple[Term, ...]
    parent: int | None = None
    # head atoms checked by the restricted applicability test; None means the whole head
    guard: tuple[Quad, ...] | None = None
    name: str = ""

    @property
    def guard_atoms(self) -> tuple[Quad, ...]:
        return self.head if self.guard is None else self.guard

    def __str__(self) -> str:
        body = ", ".join(map(str, self.body))
        head = ", ".join(map(str, self.head))
        return f"[{self.id}] {body} -> {head}"


def make_rule(rid: int, body: Iterable[Quad], head: Iterable[Quad],
              parent: int | None = None, guard: Iterable[Quad] | None = None,
              name: str = "") -> BridgeRule:
    body = tuple(body)
    head = tuple(head)
    for q in body + head:
        if q.c.kind != URI:
            raise ValueError(f"rule {rid}: context must be a URI: {q}")
        if any(t.kind == BNODE for t in q):
            raise ValueError(f"rule {rid}: blank node in rule atom {q}")
    bvars = variables(body)
    hvars = [v for v in variables(head) if v != VECTOR_VAR]
    bset = set(bvars)
    frontier = tuple(v for v in hvars if v in bset)
    existential = tuple(v for v in hvars if v not in bset)
    fset = set(frontier)
    body_only = tuple(v for v in bvars if v not in fset)
    return BridgeRule(rid, body, head, frontier, existential, body_only,
                      parent, None if guard is None else tuple(guard), name)


@dataclass
class QuadSystem:
    graph: set[Quad] = field(default_factory=set)
    rules: list[BridgeRule] = field(default_factory=list)
    contexts: set[Term] = field(default_factory=set)

    def __post_init__(self):
        self.graph = set(self.graph)
        self.contexts = set(self.contexts) | {q.c for q in self.graph}
        for r in self.rules:
            self.contexts |= {q.c for q in r.body + r.head}


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def head_components(atoms: tuple[Quad, ...], members: set[Term]) -> list[tuple[Quad, ...]]:
    """T-connected components of a set of atoms, T = members."""
    uf = _UnionFind(len(atoms))
    owner: dict[Term, int] = {}
    for i, q in enumerate(atoms):
        for t in q.terms():
            if t in members:
                if t in owner:
                    uf.union(i, owner[t])
                else:
                    owner[t] = i
    groups: dict[int, list[Quad]] = {}
    for i, q in enumerate(atoms):
        groups.setdefault(uf.find(i), []).append(q)
    pieces = [tuple(g) for g in groups.values()]
    pieces.sort(key=lambda g: min(g))
    return pieces


def split_head_pieces(r: BridgeRule, next_id: int | None = None) -> list[BridgeRule]:
    """One rule per {y}-component of the head, each keeping the full body.

    Fresh ids start at next_id (default: r.id * 1000 + 1) and record r.id as parent.
    """
    pieces = head_components(r.head, set(r.existential))
    if len(pieces) == 1:
        return [r]
    start = r.id * 1000 + 1 if next_id is None else next_id
    return [make_rule(start + k, r.body, piece, parent=r.id, name=r.name)
            for k, piece in enumerate(pieces)]


def normalize_rules(rules: Iterable[BridgeRule]) -> list[BridgeRule]:
    """Split rules whose head generates blanks in more than one component.

    Existential pieces become separate rules and the existential-free atoms
    are kept together in one more rule. Rules with at most one existential
    piece are left as written.
    """
    rules = list(rules)
    next_id = max((r.id for r in rules), default=0) + 1
    out: list[BridgeRule] = []
    for r in rules:
        ys = set(r.existential)
        pieces = head_components(r.head, ys)
        gen = [p for p in pieces if any(t in ys for q in p for t in q.terms())]
        if len(gen) <= 1:
            out.append(r)
            continue
        plain = tuple(q for p in pieces if p not in gen for q in p)
        groups = gen + ([plain] if plain else [])
        for piece in groups:
            out.append(make_rule(next_id, r.body, piece, parent=r.id, name=r.name))
            next_id += 1
    return out


def constants_of(quads: Iterable[Quad]) -> set[Term]:
    return {t for q in quads for t in q.terms()}


def vector_text(vec: Iterable[Term]) -> str:
    return "(" + " ".join(str(t) for t in vec) + ")"
