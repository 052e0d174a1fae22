"""Contextualized conjunctive queries over a chase."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .chase import FIXPOINT, ChaseState, Fuel, Store, join, run_dchase
from .model import BridgeRule, Quad, Term, normalize_rules, var
from .safety import NO, UNKNOWN, YES
from .textio import QueryDocument


@dataclass(frozen=True)
class AnswerSet:
    bindings: tuple[tuple[Term, ...], ...]
    complete: bool

    def __bool__(self) -> bool:
        return bool(self.bindings)

    def to_report(self) -> dict:
        return {"answers": [list(b) for b in self.bindings], "complete": self.complete,
                "count": len(self.bindings)}


def _store(target) -> tuple[Store, dict, bool]:
    if isinstance(target, ChaseState):
        return target.store, target.skolems, target.status == FIXPOINT
    st = Store()
    for q in target:
        st.add(q, 0)
    return st, {}, True


def homomorphisms(atoms: Iterable[Quad], target):
    store, _, _ = _store(target)
    return join(store, list(atoms), {})


def eval_boolean(query: QueryDocument | Iterable[Quad], target) -> bool:
    atoms = query.atoms if isinstance(query, QueryDocument) else tuple(query)
    store, _, _ = _store(target)
    for _ in join(store, list(atoms), {}):
        return True
    return False


def eval_select(query: QueryDocument, target, allow_skolem: bool = False) -> AnswerSet:
    store, skolems, complete = _store(target)
    rows = set()
    for b in join(store, list(query.atoms), {}):
        row = tuple(b[v] for v in query.free)
        if not allow_skolem and any(t in skolems for t in row):
            continue
        rows.add(row)
    return AnswerSet(tuple(sorted(rows)), complete)


def graph_as_query(g: Iterable[Quad]) -> tuple[Quad, ...]:
    """Blank nodes become quantified variables."""
    def conv(t: Term) -> Term:
        return var("_b_" + t.value) if t.is_blank else t
    return tuple(Quad(*(conv(t) for t in q)) for q in sorted(set(g)))


def entails_quad_graph(graph: Iterable[Quad], rules: Iterable[BridgeRule], g: Iterable[Quad],
                       fuel: Fuel | None = None) -> str:
    st = run_dchase(graph, normalize_rules(rules), fuel)
    if eval_boolean(graph_as_query(g), st):
        return YES
    return NO if st.status == FIXPOINT else UNKNOWN


def entails_quad(graph, rules, q: Quad, fuel: Fuel | None = None) -> str:
    return entails_quad_graph(graph, rules, [q], fuel)
