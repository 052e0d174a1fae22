"""The deterministic restricted chase over quads.

Matches are found by semi-naive delta joins and kept in a priority queue keyed
by the selection order (level of the body image, body image, rule id, head,
assignment). The least pending match whose head is not yet satisfied is the
one applied at each iteration; a match whose head becomes satisfied never
becomes applicable again, so it is dropped for good.
"""

from __future__ import annotations

import hashlib
import heapq
import os
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, NamedTuple

from .model import (VECTOR_VAR, BridgeRule, Quad, Term, bnode, graph_key,
                    literal, make_rule, uri, var, vector_text)

FIXPOINT = "fixpoint"
FUEL = "fuel-exhausted"
VIOLATION = "violation"
HALTED = "halted"
RUNNING = "running"


class Fuel(NamedTuple):
    max_iterations: int = 100_000
    max_quads: int = 5_000_000


def default_fuel() -> Fuel:
    env = os.environ.get("QUADCHASE_FUEL_ITERATIONS")
    if env:
        return Fuel(max_iterations=int(env))
    return Fuel()


Binding = dict[Term, Term]


def unify(pattern: Quad, quad: Quad, binding: Binding) -> Binding | None:
    out = None
    for pt, qt in zip(pattern, quad):
        if pt.kind == 3:
            bound = binding.get(pt) if out is None else out.get(pt)
            if bound is None:
                if out is None:
                    out = dict(binding)
                out[pt] = qt
            elif bound != qt:
                return None
        elif pt != qt:
            return None
    return dict(binding) if out is None else out


def substitute(pattern: Quad, binding: Binding) -> Quad:
    return Quad(*(binding.get(t, t) if t.kind == 3 else t for t in pattern))


class Store:
    """Append-only quad store with per-position hash indexes and levels."""

    def __init__(self):
        self.level: dict[Quad, int] = {}
        self.order: list[Quad] = []
        self.index: dict[tuple[int, Term], list[Quad]] = defaultdict(list)

    def __len__(self) -> int:
        return len(self.order)

    def __contains__(self, q: Quad) -> bool:
        return q in self.level

    def __iter__(self) -> Iterator[Quad]:
        return iter(self.order)

    def add(self, q: Quad, level: int) -> bool:
        if q in self.level:
            return False
        self.level[q] = level
        self.order.append(q)
        for i, t in enumerate(q):
            self.index[(i, t)].append(q)
        return True

    def candidates(self, pattern: Quad, binding: Binding) -> list[Quad]:
        best = None
        for i, t in enumerate(pattern):
            if t.kind == 3:
                t = binding.get(t)
                if t is None:
                    continue
            lst = self.index.get((i, t))
            if lst is None:
                return []
            if best is None or len(lst) < len(best):
                best = lst
        return self.order if best is None else best


def join(store: Store, atoms: list[Quad], binding: Binding) -> Iterator[Binding]:
    """All extensions of binding mapping every atom into the store."""
    if not atoms:
        yield binding
        return
    best_i, best = -1, None
    for i, a in enumerate(atoms):
        c = store.candidates(a, binding)
        if not c:
            return
        if best is None or len(c) < len(best):
            best_i, best = i, c
    atom = atoms[best_i]
    rest = atoms[:best_i] + atoms[best_i + 1:]
    for q in list(best):
        b = unify(atom, q, binding)
        if b is not None:
            yield from join(store, rest, b)


def satisfiable(store: Store, atoms: Iterable[Quad], binding: Binding) -> bool:
    for _ in join(store, list(atoms), binding):
        return True
    return False


def skolem_label(rule_id: int, name: str, vector: tuple[Term, ...]) -> str:
    digest = hashlib.sha1(vector_text(vector).encode("utf-8")).hexdigest()[:12]
    return f"sk_{rule_id}_{name}_{digest}"


@dataclass(frozen=True)
class SkolemMeta:
    blank: Term
    rule_id: int
    var: Term
    index: int
    vector: tuple[Term, ...]
    contexts: frozenset[Term]

    @property
    def children(self) -> frozenset[Term]:
        return frozenset(self.vector)

    def to_report(self) -> dict:
        return {"blank": self.blank, "originRuleId": self.rule_id,
                "originVector": list(self.vector), "originContexts": self.contexts,
                "var": self.var}


@dataclass(frozen=True)
class Step:
    iteration: int
    rule_id: int
    assignment: tuple[tuple[Term, Term], ...]
    body: tuple[Quad, ...]
    added: tuple[Quad, ...]

    def to_report(self) -> dict:
        return {"iteration": self.iteration, "ruleId": self.rule_id,
                "assignment": {str(k): v for k, v in self.assignment},
                "body": list(self.body), "added": list(self.added)}


# A hook sees the match about to be applied; returning (quad, witness) stops the run.
Hook = Callable[["ChaseState", BridgeRule, Binding, tuple], "tuple[Quad, dict] | None"]


@dataclass
class ChaseState:
    rules: list[BridgeRule]
    fuel: Fuel = field(default_factory=Fuel)
    oblivious: bool = False
    hook: Hook | None = None
    halt: frozenset[Quad] = frozenset()
    store: Store = field(default_factory=Store)
    skolems: dict[Term, SkolemMeta] = field(default_factory=dict)
    iteration: int = 0
    status: str = RUNNING
    log: list[Step] = field(default_factory=list)
    witness: dict | None = None

    def __post_init__(self):
        self._pending: list = []
        self._seen: set = set()
        self._fired: set = set()
        self._by_ctx: dict[Term, list[tuple[int, int]]] = defaultdict(list)
        for ri, r in enumerate(self.rules):
            for ai, atom in enumerate(r.body):
                self._by_ctx[atom.c].append((ri, ai))

    # -- views
    @property
    def quads(self) -> set[Quad]:
        return set(self.store.order)

    def level(self, q: Quad) -> int:
        return self.store.level[q]

    def __len__(self) -> int:
        return len(self.store)

    # -- match bookkeeping
    def _register(self, ri: int, binding: Binding) -> None:
        rule = self.rules[ri]
        akey = tuple(sorted(binding.items()))
        if (ri, akey) in self._seen:
            return
        self._seen.add((ri, akey))
        # satisfaction only grows, so a match satisfied now never becomes applicable
        if self.is_satisfied(rule, binding):
            return
        body = tuple(substitute(a, binding) for a in rule.body)
        lvl = max((self.store.level[q] for q in body), default=0)
        head = tuple(sorted(substitute(a, binding) for a in rule.head))
        key = (lvl, graph_key(body), rule.id, head, akey)
        heapq.heappush(self._pending, (key, ri, body))

    def _delta(self, q: Quad) -> None:
        for ri, ai in self._by_ctx.get(q.c, ()):
            body = self.rules[ri].body
            b = unify(body[ai], q, {})
            if b is None:
                continue
            rest = list(body[:ai] + body[ai + 1:])
            for full in list(join(self.store, rest, b)):
                self._register(ri, full)

    def seed(self, graph: Iterable[Quad]) -> None:
        for q in sorted(set(graph)):
            self.store.add(q, 0)
        for ri, r in enumerate(self.rules):
            for b in list(join(self.store, list(r.body), {})):
                self._register(ri, b)

    def is_satisfied(self, rule: BridgeRule, binding: Binding) -> bool:
        if self.oblivious and rule.existential:
            return (rule.id, tuple(binding[x] for x in rule.frontier)) in self._fired
        return satisfiable(self.store, rule.guard_atoms, binding)

    def _add(self, q: Quad, level: int) -> bool:
        if self.store.add(q, level):
            self._delta(q)
            return True
        return False

    def apply(self, rule: BridgeRule, binding: Binding, body: tuple[Quad, ...]) -> tuple[Quad, ...]:
        lvl = 1 + max((self.store.level[q] for q in body), default=0)
        vector = tuple(binding[x] for x in rule.frontier)
        ext = dict(binding)
        ext[VECTOR_VAR] = literal(vector_text(vector))
        fresh = []
        for j, y in enumerate(rule.existential):
            b = bnode(skolem_label(rule.id, y.value, vector))
            ext[y] = b
            fresh.append((j, y, b))
        self._fired.add((rule.id, vector))
        inst = [substitute(a, ext) for a in rule.head]
        guard = [substitute(a, ext) for a in rule.guard_atoms]
        for j, y, b in fresh:
            if b not in self.skolems:
                ctxs = frozenset(q.c for q in guard if b in q.terms())
                self.skolems[b] = SkolemMeta(b, rule.id, y, j, vector, ctxs)
        added = []
        for q in inst:
            if q not in self.store:
                added.append(q)
                self.store.add(q, lvl)
        for q in added:
            self._delta(q)
        self.iteration += 1
        akey = tuple(sorted(binding.items()))
        self.log.append(Step(self.iteration, rule.id, akey, body, tuple(added)))
        return tuple(added)

    def next_applicable(self):
        """Pop pending matches until the least applicable one; None at fixpoint."""
        while self._pending:
            key, ri, body = self._pending[0]
            rule = self.rules[ri]
            binding = dict(key[4])
            if self.is_satisfied(rule, binding):
                heapq.heappop(self._pending)
                continue
            return rule, binding, body
        return None

    def pending_matches(self) -> list[tuple[BridgeRule, Binding, tuple[Quad, ...]]]:
        """Applicable matches in selection order (does not consume them)."""
        out = []
        for key, ri, body in sorted(self._pending):
            rule = self.rules[ri]
            binding = dict(key[4])
            if not self.is_satisfied(rule, binding):
                out.append((rule, binding, body))
        return out

    def step(self) -> bool:
        """Apply one iteration; False when the run has stopped."""
        if self.status != RUNNING:
            return False
        nxt = self.next_applicable()
        if nxt is None:
            self.status = FIXPOINT
            return False
        if self.iteration >= self.fuel.max_iterations or len(self.store) >= self.fuel.max_quads:
            self.status = FUEL
            return False
        rule, binding, body = nxt
        if self.hook is not None:
            hit = self.hook(self, rule, binding, body)
            if hit is not None:
                quad, self.witness = hit
                lvl = 1 + max((self.store.level[q] for q in body), default=0)
                self.store.add(quad, lvl)
                self.status = VIOLATION
                return False
        heapq.heappop(self._pending)
        added = self.apply(rule, binding, body)
        if self.halt and any(q in self.halt for q in added):
            self.status = HALTED
            return False
        return True

    def run(self) -> "ChaseState":
        while self.step():
            pass
        return self

    # -- reports
    def counts_by_context(self) -> dict[str, int]:
        out: dict[str, int] = defaultdict(int)
        for q in self.store.order:
            out[str(q.c)] += 1
        return dict(sorted(out.items()))

    def to_report(self) -> dict:
        return {"status": self.status, "iterations": self.iteration,
                "quads": len(self.store), "quadsPerContext": self.counts_by_context(),
                "skolems": len(self.skolems)}


def run_dchase(graph: Iterable[Quad], rules: Iterable[BridgeRule], fuel: Fuel | None = None,
               **kw) -> ChaseState:
    state = ChaseState(list(rules), fuel or default_fuel(), **kw)
    state.seed(graph)
    return state.run()


def run_system(qs, fuel: Fuel | None = None, **kw) -> ChaseState:
    return run_dchase(qs.graph, qs.rules, fuel, **kw)


def enumerate_matches(state: ChaseState) -> list[tuple[BridgeRule, Binding, tuple[Quad, ...]]]:
    """Applicable matches of the current state, recomputed from scratch."""
    found = []
    for r in state.rules:
        for b in list(join(state.store, list(r.body), {})):
            if state.is_satisfied(r, b):
                continue
            body = tuple(substitute(a, b) for a in r.body)
            lvl = max((state.store.level[q] for q in body), default=0)
            head = tuple(sorted(substitute(a, b) for a in r.head))
            key = (lvl, graph_key(body), r.id, head, tuple(sorted(b.items())))
            found.append((key, r, b, body))
    found.sort(key=lambda t: t[0])
    return [(r, b, body) for _, r, b, body in found]


RDFS = "http://www.w3.org/2000/01/rdf-schema#"
_TYPE = uri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")
_SUBCLASS = uri(RDFS + "subClassOf")
_SUBPROP = uri(RDFS + "subPropertyOf")
_DOMAIN = uri(RDFS + "domain")
_RANGE = uri(RDFS + "range")


def _rdfs_templates():
    a, b, c, s, p, o, x = (var(n) for n in "abcspox")
    return [
        ("scm-sco", [(a, _SUBCLASS, b), (b, _SUBCLASS, c)], [(a, _SUBCLASS, c)]),
        ("cax-sco", [(x, _TYPE, a), (a, _SUBCLASS, b)], [(x, _TYPE, b)]),
        ("scm-spo", [(a, _SUBPROP, b), (b, _SUBPROP, c)], [(a, _SUBPROP, c)]),
        ("prp-spo", [(s, p, o), (p, _SUBPROP, b)], [(s, b, o)]),
        ("prp-dom", [(s, p, o), (p, _DOMAIN, c)], [(s, _TYPE, c)]),
        ("prp-rng", [(s, p, o), (p, _RANGE, c)], [(o, _TYPE, c)]),
    ]


def lclosure_pack(name: str, contexts: Iterable[Term], start_id: int = 1) -> list[BridgeRule]:
    """Local inference rules instantiated once per context."""
    if name == "simple":
        return []
    if name != "rdfs-min":
        raise ValueError(f"unknown inference pack {name!r}")
    out = []
    rid = start_id
    for ctx in sorted(set(contexts)):
        for label, body, head in _rdfs_templates():
            out.append(make_rule(rid, [Quad(ctx, *t) for t in body],
                                 [Quad(ctx, *t) for t in head], name=f"{label}@{ctx.value}"))
            rid += 1
    return out
