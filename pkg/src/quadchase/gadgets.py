"""Generators for the reduction gadgets: CFG intersection, 3-HornSAT, 3-colouring, DTM."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .model import BOTTOM, NS, RDF_TYPE, Quad, QuadSystem, Term, make_rule, uri, var
from .textio import QueryDocument

G = NS + "g:"


def _u(name: str) -> Term:
    return uri(G + name)


# ---------------------------------------------------------------- CFG intersection

@dataclass
class CFG:
    variables: set[str]
    terminals: set[str]
    start: str
    productions: list[tuple[str, tuple[str, ...]]]

    def validate(self) -> None:
        if self.variables & self.terminals:
            raise ValueError("variables and terminals overlap")
        if self.start not in self.variables:
            raise ValueError("start symbol is not a variable")
        for lhs, rhs in self.productions:
            if lhs not in self.variables:
                raise ValueError(f"left side {lhs!r} is not a variable")
            if not rhs:
                raise ValueError(f"empty right side for {lhs!r}")
            for s in rhs:
                if s not in self.variables and s not in self.terminals:
                    raise ValueError(f"unknown symbol {s!r}")

    @classmethod
    def from_json(cls, doc: dict) -> "CFG":
        return cls(set(doc["variables"]), set(doc["terminals"]), doc["start"],
                   [(p[0], tuple(p[1])) for p in doc["productions"]])


def cfg_intersection(g1: CFG, g2: CFG) -> tuple[QuadSystem, QueryDocument]:
    for g in (g1, g2):
        g.validate()
    if g1.variables & g2.variables:
        raise ValueError("grammars must use disjoint variables")
    if g1.start == g2.start:
        raise ValueError("start symbols must differ")
    c, C = _u("c"), _u("C")
    rules = []
    rid = 1
    for lhs, rhs in g1.productions + g2.productions:
        xs = [var(f"x{i}") for i in range(1, len(rhs) + 2)]
        body = [Quad(c, xs[i], _u(s), xs[i + 1]) for i, s in enumerate(rhs)]
        rules.append(make_rule(rid, body, [Quad(c, xs[0], _u(lhs), xs[-1])]))
        rid += 1
    x, y = var("x"), var("y")
    for t in sorted(g1.terminals | g2.terminals):
        rules.append(make_rule(rid, [Quad(c, x, RDF_TYPE, C)],
                               [Quad(c, x, _u(t), y), Quad(c, y, RDF_TYPE, C)]))
        rid += 1
    a = _u("a")
    qs = QuadSystem({Quad(c, a, RDF_TYPE, C)}, rules)
    query = QueryDocument((), (Quad(c, a, _u(g1.start), y), Quad(c, a, _u(g2.start), y)))
    return qs, query


# ---------------------------------------------------------------- 3-HornSAT

TRUE, FALSE = "t", "f"


def horn_sat(clauses: Iterable[tuple[str, str, str]]) -> tuple[QuadSystem, QueryDocument]:
    """Clauses P1 & P2 -> P3 over symbols, with the constants t and f."""
    ct, cf, T = _u("c_t"), _u("c_f"), _u("T")
    graph = {Quad(ct, _u(TRUE), RDF_TYPE, T)}
    for cl in clauses:
        if len(cl) != 3 or not all(isinstance(s, str) and s for s in cl):
            raise ValueError(f"not a pure 3-Horn clause: {cl!r}")
        if cl[0] == FALSE or cl[1] == FALSE or cl[2] == TRUE:
            raise ValueError(f"not a pure clause: {cl!r}")
        graph.add(Quad(cf, *(_u(s) for s in cl)))
    x1, x2, x3 = var("x1"), var("x2"), var("x3")
    rule = make_rule(1, [Quad(ct, x1, RDF_TYPE, T), Quad(ct, x2, RDF_TYPE, T),
                         Quad(cf, x1, x2, x3)], [Quad(ct, x3, RDF_TYPE, T)])
    return QuadSystem(graph, [rule]), QueryDocument((), (Quad(ct, _u(FALSE), RDF_TYPE, T),))


# ---------------------------------------------------------------- 3-colourability

COLOURS = ("r", "g", "b")


def three_color(vertices: Iterable[str], edges: Iterable[tuple[str, str]]
                ) -> tuple[QuadSystem, QueryDocument]:
    c, edge = _u("c"), _u("edge")
    graph = {Quad(c, _u(a), edge, _u(b)) for a in COLOURS for b in COLOURS if a != b}
    atoms = []
    for v, w in sorted(set(tuple(e) for e in edges)):
        if v == w:
            # a loop can never be coloured; keep it as an unsatisfiable atom
            atoms.append(Quad(c, var(v), edge, var(v)))
            continue
        atoms += [Quad(c, var(v), edge, var(w)), Quad(c, var(w), edge, var(v))]
    if not atoms:
        atoms = [Quad(c, _u(COLOURS[0]), edge, var("any"))]
    return QuadSystem(graph, []), QueryDocument((), tuple(atoms))


# ---------------------------------------------------------------- DTM

@dataclass
class DTM:
    states: list[str]
    alphabet: list[str]
    blank: str
    start: str
    accept: str
    transitions: dict[tuple[str, str], tuple[str, str, int]] = field(default_factory=dict)

    @classmethod
    def from_json(cls, doc: dict) -> "DTM":
        trans: dict = {}
        for q, s, q2, s2, mv in doc.get("transitions", []):
            if (q, s) in trans:
                raise ValueError(f"nondeterministic machine: two moves for ({q}, {s})")
            trans[(q, s)] = (q2, s2, int(mv))
        m = cls(list(doc["states"]), list(doc["alphabet"]), doc["blank"], doc["start"],
                doc["accept"], trans)
        m.validate()
        return m

    def validate(self) -> None:
        if self.blank not in self.alphabet:
            raise ValueError("blank symbol not in alphabet")
        for (q, s), (q2, s2, mv) in self.transitions.items():
            if q not in self.states or q2 not in self.states:
                raise ValueError("unknown state in transition")
            if s not in self.alphabet or s2 not in self.alphabet:
                raise ValueError("unknown symbol in transition")
            if mv not in (-1, 1):
                raise ValueError("moves must be -1 or +1")


def dtm_system(m: DTM, word: str | Sequence[str], n: int = 1) -> tuple[QuadSystem, QueryDocument]:
    """Word problem of a DTM as a quad-system with 2^(2^n) cells and configurations."""
    if n < 1:
        raise ValueError("n must be at least 1")
    word = list(word)
    for s in word:
        if s not in m.alphabet:
            raise ValueError(f"symbol {s!r} not in alphabet")
    ctx = [_u(f"c{i}") for i in range(n + 1)]
    R, k0, k1 = _u("R"), _u("k0"), _u("k1")
    mn = [_u(f"min{i}") for i in range(n + 1)]
    mx = [_u(f"max{i}") for i in range(n + 1)]
    succ = [_u(f"succ{i}") for i in range(n + 1)]
    succt, con, con_init, con_succ = _u("succt"), _u("Con"), _u("conInit"), _u("conSucc")
    hi, lo = _u("conHigh"), _u("conLow")
    head, state, accept = _u("head"), _u("state"), _u("Accept")
    sym = {s: _u("sym_" + s) for s in m.alphabet}
    st = {q: _u("q_" + q) for q in m.states}

    c0 = ctx[0]
    graph = {Quad(c0, k0, RDF_TYPE, R), Quad(c0, k1, RDF_TYPE, R),
             Quad(c0, k0, RDF_TYPE, mn[0]), Quad(c0, k1, RDF_TYPE, mx[0]),
             Quad(c0, k0, succ[0], k1)}
    rules = []

    def add(body, hd, name):
        rules.append(make_rule(len(rules) + 1, body, hd, name=name))

    x0, x1, x2, x3, x4, x5, x6 = (var(f"x{i}") for i in range(7))
    y = var("y")
    for i in range(n):
        a, b = ctx[i], ctx[i + 1]
        add([Quad(a, x0, RDF_TYPE, R), Quad(a, x1, RDF_TYPE, R)],
            [Quad(b, x0, x1, y), Quad(b, y, RDF_TYPE, R)], f"eBr{i}")
        add([Quad(b, x0, x0, x1), Quad(a, x0, RDF_TYPE, mn[i])],
            [Quad(b, x1, RDF_TYPE, mn[i + 1])], f"min{i + 1}")
        add([Quad(b, x0, x0, x1), Quad(a, x0, RDF_TYPE, mx[i])],
            [Quad(b, x1, RDF_TYPE, mx[i + 1])], f"max{i + 1}")
        add([Quad(a, x1, succ[i], x2), Quad(b, x0, x1, x3), Quad(b, x0, x2, x4)],
            [Quad(b, x3, succ[i + 1], x4)], f"succLow{i + 1}")
        add([Quad(a, x1, succ[i], x2), Quad(b, x1, x3, x5), Quad(b, x2, x4, x6),
             Quad(a, x3, RDF_TYPE, mx[i]), Quad(a, x4, RDF_TYPE, mn[i])],
            [Quad(b, x5, succ[i + 1], x6)], f"succHigh{i + 1}")
    cn, cp = ctx[n], ctx[n - 1]
    add([Quad(cn, x0, succ[n], x1)], [Quad(cn, x0, succt, x1)], "succt")
    add([Quad(cn, x0, succt, x1), Quad(cn, x1, succt, x2)], [Quad(cn, x0, succt, x2)],
        "succtTrans")
    # configurations: one object per pair of elements of the previous context,
    # ordered like the cells (interpolated construction)
    add([Quad(cp, x0, RDF_TYPE, R), Quad(cp, x1, RDF_TYPE, R)],
        [Quad(cn, y, hi, x0), Quad(cn, y, lo, x1), Quad(cn, y, RDF_TYPE, con)], "conGen")
    add([Quad(cn, x0, hi, x1), Quad(cn, x0, lo, x2), Quad(cp, x1, RDF_TYPE, mn[n - 1]),
         Quad(cp, x2, RDF_TYPE, mn[n - 1])], [Quad(cn, x0, RDF_TYPE, con_init)], "conInit")
    add([Quad(cp, x1, succ[n - 1], x2), Quad(cn, x3, hi, x0), Quad(cn, x3, lo, x1),
         Quad(cn, x4, hi, x0), Quad(cn, x4, lo, x2)],
        [Quad(cn, x3, con_succ, x4)], "conSuccLow")
    add([Quad(cp, x1, succ[n - 1], x2), Quad(cn, x5, hi, x1), Quad(cn, x5, lo, x3),
         Quad(cn, x6, hi, x2), Quad(cn, x6, lo, x4),
         Quad(cp, x3, RDF_TYPE, mx[n - 1]), Quad(cp, x4, RDF_TYPE, mn[n - 1])],
        [Quad(cn, x5, con_succ, x6)], "conSuccHigh")

    # initialization: the word on the first cells, blanks after, head on cell 1
    cells = [var(f"p{i}") for i in range(len(word) + 1)]
    body = [Quad(cn, x0, RDF_TYPE, con_init), Quad(cn, cells[0], RDF_TYPE, mn[n])]
    body += [Quad(cn, cells[i], succ[n], cells[i + 1]) for i in range(len(word))]
    hd = [Quad(cn, x0, head, cells[0]), Quad(cn, x0, state, st[m.start])]
    hd += [Quad(cn, x0, sym[s], cells[i]) for i, s in enumerate(word)]
    add(body, hd, "init")
    last = cells[len(word)]
    if word:
        add(body + [Quad(cn, last, succt, x1)], [Quad(cn, x0, sym[m.blank], x1)], "initBlank")
    else:
        add([Quad(cn, x0, RDF_TYPE, con_init), Quad(cn, x1, RDF_TYPE, R)],
            [Quad(cn, x0, sym[m.blank], x1)], "initBlank")
    # transitions
    for (q, s), (q2, s2, mv) in sorted(m.transitions.items()):
        move = [Quad(cn, x1, succ[n], x2)] if mv == 1 else [Quad(cn, x2, succ[n], x1)]
        add([Quad(cn, x0, head, x1), Quad(cn, x0, sym[s], x1), Quad(cn, x0, state, st[q]),
             Quad(cn, x0, con_succ, x3)] + move,
            [Quad(cn, x3, head, x2), Quad(cn, x3, sym[s2], x1), Quad(cn, x3, state, st[q2])],
            f"delta_{q}_{s}")
    # inertia: cells away from the head keep their symbol
    for s in m.alphabet:
        for order in ("before", "after"):
            rel = Quad(cn, x2, succt, x1) if order == "before" else Quad(cn, x1, succt, x2)
            add([Quad(cn, x0, head, x1), rel, Quad(cn, x0, sym[s], x2),
                 Quad(cn, x0, con_succ, x3)], [Quad(cn, x3, sym[s], x2)], f"inertia_{s}_{order}")
    # acceptance propagates backwards along the configuration chain
    add([Quad(cn, x0, state, st[m.accept])], [Quad(cn, x0, RDF_TYPE, accept)], "accept")
    add([Quad(cn, x0, con_succ, x1), Quad(cn, x1, RDF_TYPE, accept)],
        [Quad(cn, x0, RDF_TYPE, accept)], "acceptBack")
    # constraints: one symbol per cell, one state per configuration
    bot = Quad(cn, BOTTOM, BOTTOM, BOTTOM)
    for s1 in m.alphabet:
        for s2 in m.alphabet:
            if s1 < s2:
                add([Quad(cn, x0, sym[s1], x1), Quad(cn, x0, sym[s2], x1)], [bot],
                    f"oneSym_{s1}_{s2}")
    for q1 in m.states:
        for q2 in m.states:
            if q1 < q2:
                add([Quad(cn, x0, state, st[q1]), Quad(cn, x0, state, st[q2])], [bot],
                    f"oneState_{q1}_{q2}")
    query = QueryDocument((), (Quad(cn, y, RDF_TYPE, con_init), Quad(cn, y, RDF_TYPE, accept)))
    return QuadSystem(graph, rules), query
