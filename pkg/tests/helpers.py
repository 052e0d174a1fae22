"""Independent oracles and fixtures shared by the test modules.

Nothing here calls the engine's join, order or safety code; the oracles follow
the definitions literally and are slow on purpose.
"""

from __future__ import annotations

import random
from functools import cmp_to_key
from itertools import permutations, product
from pathlib import Path

from quadchase.chase import skolem_label
from quadchase.model import (BNODE, URI, VAR, Quad, Term, bnode, make_rule, uri,
                             var)
from quadchase.textio import parse_nquads, parse_rules

DATA = Path(__file__).parent / "data"


def load(name: str):
    graph = parse_nquads((DATA / f"{name}.nq").read_text())
    rules = parse_rules((DATA / f"{name}.rules").read_text()).rules
    return graph, rules


def U(name: str) -> Term:
    return uri(name)


def B(name: str) -> Term:
    return bnode(name)


def _conv(t) -> Term:
    if isinstance(t, Term):
        return t
    if t.startswith("_:"):
        return bnode(t[2:])
    if t.startswith("?"):
        return var(t[1:])
    return uri(t)


def Q(c, s, p, o) -> Quad:
    """Quad or pattern from short names: '_:b' blank, '?x' variable, else IRI."""
    return Quad(_conv(c), _conv(s), _conv(p), _conv(o))


# ---------------------------------------------------------------- isomorphism

def blanks(quads) -> list[Term]:
    return sorted({t for q in quads for t in q if t.kind == BNODE})


def isomorphism(g1, g2) -> dict | None:
    """A blank-node bijection mapping g1 onto g2, by brute force."""
    g1, g2 = set(g1), set(g2)
    b1, b2 = blanks(g1), blanks(g2)
    if len(g1) != len(g2) or len(b1) != len(b2):
        return None
    for perm in permutations(b2):
        m = dict(zip(b1, perm))
        if {Quad(*(m.get(t, t) for t in q)) for q in g1} == g2:
            return m
    return None


# ---------------------------------------------------------------- orders

def term_less(a: Term, b: Term) -> bool:
    rank = {URI: 0, BNODE: 1, 2: 2}
    if rank[a.kind] != rank[b.kind]:
        return rank[a.kind] < rank[b.kind]
    return (a.value, a.datatype, a.lang) < (b.value, b.datatype, b.lang)


def quad_cmp(q1: Quad, q2: Quad) -> int:
    for a, b in zip(q1, q2):
        if a != b:
            return -1 if term_less(a, b) else 1
    return 0


def greatest(quads):
    return max(quads, key=cmp_to_key(quad_cmp))


def graph_precedes(g1, g2) -> bool:
    """The two-clause definition of the quad-graph order."""
    g1, g2 = set(g1), set(g2)
    if g1 < g2:
        return True
    if g1 <= g2 or g2 <= g1:
        return False
    return quad_cmp(greatest(g1 - g2), greatest(g2 - g1)) < 0


def graph_cmp(g1, g2) -> int:
    if set(g1) == set(g2):
        return 0
    return -1 if graph_precedes(g1, g2) else 1


# ---------------------------------------------------------------- naive chase

def _vars(atoms):
    out = []
    for a in atoms:
        for t in a:
            if t.kind == VAR and t not in out:
                out.append(t)
    return out


def _sub(a: Quad, m: dict) -> Quad:
    return Quad(*(m.get(t, t) for t in a))


def _bind(atom: Quad, q: Quad, m: dict) -> dict | None:
    m = dict(m)
    for t, v in zip(atom, q):
        if t.kind == VAR:
            if m.setdefault(t, v) != v:
                return None
        elif t != v:
            return None
    return m


def _ground(atoms, quads, m, first: bool = False) -> list[dict]:
    """Nested loops over the whole quad set, one loop per atom."""
    out = []
    for combo in product(list(quads), repeat=len(atoms)):
        cur = m
        for a, q in zip(atoms, combo):
            cur = _bind(a, q, cur)
            if cur is None:
                break
        if cur is not None and cur not in out:
            out.append(cur)
            if first:
                break
    return out


def naive_matches(quads: dict, rules):
    """All (rule, assignment) pairs with body image in Q and unsatisfied head."""
    out = []
    for r in rules:
        for m in _ground(r.body, quads, {}):
            image = tuple(_sub(a, m) for a in r.body)
            if not _ground(r.guard_atoms, quads, m, first=True):
                out.append((r, m, image))
    return out


def match_cmp(a, b, quads) -> int:
    (r1, m1, b1), (r2, m2, b2) = a, b
    l1 = max((quads[q] for q in b1), default=0)
    l2 = max((quads[q] for q in b2), default=0)
    if l1 != l2:
        return -1 if l1 < l2 else 1
    c = graph_cmp(b1, b2)
    if c:
        return c
    if r1.id != r2.id:
        return -1 if r1.id < r2.id else 1
    h1 = sorted(_sub(a, m1) for a in r1.head)
    h2 = sorted(_sub(a, m2) for a in r2.head)
    if h1 != h2:
        return -1 if h1 < h2 else 1
    k1, k2 = sorted(m1.items()), sorted(m2.items())
    return (k1 > k2) - (k1 < k2)


def naive_chase(graph, rules, max_iterations: int = 200):
    """Literal dChase: recompute every applicable pair each iteration, apply the least."""
    quads = {q: 0 for q in graph}
    log = []
    status = "fixpoint"
    while True:
        cands = naive_matches(quads, rules)
        if not cands:
            break
        if len(log) >= max_iterations:
            status = "fuel"
            break
        key = cmp_to_key(lambda a, b: match_cmp(a, b, quads))
        r, m, body = min(cands, key=key)
        lvl = 1 + max((quads[q] for q in body), default=0)
        vec = tuple(m[x] for x in r.frontier)
        ext = dict(m)
        for y in r.existential:
            ext[y] = bnode(skolem_label(r.id, y.value, vec))
        added = []
        for a in r.head:
            q = _sub(a, ext)
            if q not in quads:
                quads[q] = lvl
                added.append(q)
        log.append((r.id, body, tuple(added)))
    return quads, log, status


# ---------------------------------------------------------------- safety by definition

def iso_vectors(v, w) -> bool:
    if len(v) != len(w):
        return False
    for i in range(len(v)):
        if v[i].kind == BNODE or w[i].kind == BNODE:
            if v[i].kind != w[i].kind:
                return False
            for j in range(len(v)):
                if (v[i] == v[j]) != (w[i] == w[j]):
                    return False
        elif v[i] != w[i]:
            return False
    return True


def strict_descendants(skolems, b) -> set:
    out, todo = set(), [b]
    while todo:
        cur = todo.pop()
        meta = skolems.get(cur)
        if meta is None:
            continue
        for ch in meta.vector:
            if ch not in out:
                out.add(ch)
                todo.append(ch)
    return out


def definition_violations(skolems) -> dict:
    """Which of safe/msafe/csafe the recorded Skolem metadata violates."""
    bad = {"safe": False, "msafe": False, "csafe": False}
    for b, mb in skolems.items():
        for d in strict_descendants(skolems, b):
            md = skolems.get(d)
            if md is None:
                continue
            if md.rule_id == mb.rule_id:
                bad["msafe"] = True
                if iso_vectors(md.vector, mb.vector):
                    bad["safe"] = True
            if md.contexts == mb.contexts:
                bad["csafe"] = True
    return bad


# ---------------------------------------------------------------- queries

def brute_answers(atoms, free, quads) -> set:
    quads = set(quads)
    consts = sorted({t for q in quads for t in q})
    qvars = _vars(atoms)
    rows = set()
    for vals in product(consts, repeat=len(qvars)):
        m = dict(zip(qvars, vals))
        if all(_sub(a, m) in quads for a in atoms):
            rows.add(tuple(m[v] for v in free))
    return rows


# ---------------------------------------------------------------- random systems

CONSTS = [U("a"), U("b"), U("c")]


def random_system(rng: random.Random, max_contexts=3, max_rules=4, max_exist=2,
                  allow_exist=True):
    ctxs = [U(f"c{i}") for i in range(1, rng.randint(1, max_contexts) + 1)]
    graph = {Quad(rng.choice(ctxs), *(rng.choice(CONSTS) for _ in range(3)))
             for _ in range(rng.randint(1, 4))}
    pool = [var(f"x{i}") for i in range(1, 5)]
    ys = [var("y1"), var("y2")][:max_exist]
    used_y = 0
    rules = []
    for rid in range(1, rng.randint(1, max_rules) + 1):
        body = []
        for _ in range(rng.randint(1, 2)):
            body.append(Quad(rng.choice(ctxs), *(rng.choice(pool) if rng.random() < 0.75
                                                  else rng.choice(CONSTS) for _ in range(3))))
        bvars = _vars(body)
        if not bvars:
            body[0] = Quad(body[0].c, pool[0], body[0].p, body[0].o)
            bvars = _vars(body)
        head = []
        local_y = []
        for _ in range(rng.randint(1, 2)):
            terms = []
            for _ in range(3):
                roll = rng.random()
                if allow_exist and roll < 0.25 and (local_y or used_y < max_exist):
                    if not local_y or (used_y < max_exist and rng.random() < 0.3):
                        local_y.append(ys[used_y])
                        used_y += 1
                    terms.append(rng.choice(local_y))
                elif roll < 0.85:
                    terms.append(rng.choice(bvars))
                else:
                    terms.append(rng.choice(CONSTS))
            head.append(Quad(rng.choice(ctxs), *terms))
        rules.append(make_rule(rid, body, head))
    return graph, rules


def horn_oracle(clauses) -> bool:
    """Unit propagation from t; unsatisfiable iff f is forced."""
    true = {"t"}
    grew = True
    while grew:
        grew = False
        for p1, p2, p3 in clauses:
            if p1 in true and p2 in true and p3 not in true:
                true.add(p3)
                grew = True
    return "f" in true


def colourable(vertices, edges) -> bool:
    for cols in product(range(3), repeat=len(vertices)):
        m = dict(zip(vertices, cols))
        if all(m[a] != m[b] for a, b in edges):
            return True
    return False


# ---------------------------------------------------------------- listed chase steps

# quads added at each dChase iteration, blanks named as in the listing
EX1_ADDED = [
    [Q("c2", "a", "b", "_:b1")],
    [Q("c3", "a", "_:b1", "_:b2")],
    [Q("c3", "b", "_:b1", "_:b3")],
    [Q("c2", "_:b4", "_:b2", "a"), Q("c2", "_:b4", "_:b3", "b")],
]
EX1_META = {  # blank: (originRuleId, originVector, originContexts)
    "b1": (1, ("a", "b"), {"c2"}),
    "b2": (2, ("_:b1",), {"c3"}),
    "b3": (3, ("_:b1",), {"c3"}),
    "b4": (4, ("_:b2", "_:b3"), {"c2"}),
}
EX2_ADDED = [
    [Q("c3", "_:b1", "a", "b"), Q("c4", "b", "c", "d")],
    [Q("c1", "_:b1", "a", "b"), Q("c2", "b", "c", "d")],
    [Q("c3", "_:b2", "_:b1", "a"), Q("c4", "a", "b", "c")],
    [Q("c1", "_:b2", "_:b1", "a"), Q("c2", "a", "b", "c")],
    [Q("c3", "_:b3", "_:b2", "_:b1"), Q("c4", "_:b1", "a", "b")],
    [Q("c1", "_:b3", "_:b2", "_:b1"), Q("c2", "_:b1", "a", "b")],
    [Q("c3", "_:b4", "_:b3", "_:b2"), Q("c4", "_:b2", "_:b1", "a")],
    [Q("c1", "_:b4", "_:b3", "_:b2"), Q("c2", "_:b2", "_:b1", "a")],
    [Q("c3", "_:b5", "_:b4", "_:b3"), Q("c4", "_:b3", "_:b2", "_:b1")],
]
EX2_VECTORS = {
    "b1": ("a", "b", "c", "d"),
    "b2": ("_:b1", "a", "b", "c"),
    "b3": ("_:b2", "_:b1", "a", "b"),
    "b4": ("_:b3", "_:b2", "_:b1", "a"),
    "b5": ("_:b4", "_:b3", "_:b2", "_:b1"),
}


def short(t) -> Term:
    return _conv(t)
