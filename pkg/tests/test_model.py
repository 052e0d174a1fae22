from itertools import combinations

import pytest

from helpers import B, Q, U, graph_cmp, iso_vectors, quad_cmp
from quadchase.model import (BNODE, URI, Quad, compare_graphs, compare_quads,
                             compare_terms, graph_key, head_components, literal,
                             make_rule, normalize_rules, split_head_pieces,
                             vector_isomorphic, vector_text)


def test_term_kinds_order_iri_before_blank_before_literal():
    assert compare_terms(U("z"), B("a")) < 0
    assert compare_terms(B("z"), literal("a")) < 0
    assert compare_terms(U("a"), U("b")) < 0
    assert compare_terms(U("a"), U("a")) == 0


def test_quad_order_is_lexicographic_from_context():
    assert compare_quads(Q("c1", "z", "z", "z"), Q("c2", "a", "a", "a")) < 0
    assert compare_quads(Q("c1", "a", "b", "c"), Q("c1", "a", "b", "d")) < 0


def _universe():
    terms = [U("a"), B("b")]
    return [Quad(c, s, p, o) for c in (U("c1"), U("c2"))
            for s in terms for p in terms for o in terms]


def test_graph_order_matches_two_clause_definition_exhaustively():
    quads = _universe()
    graphs = [g for k in range(0, 3) for g in combinations(quads, k)]
    # every pair of graphs with at most 2 quads, plus a sample of 3-quad ones
    graphs += list(combinations(quads[:8], 3))
    for g1 in graphs:
        for g2 in graphs[: 120]:
            assert (compare_graphs(g1, g2) < 0) == (graph_cmp(g1, g2) < 0), (g1, g2)


def test_graph_order_is_total_and_strict():
    quads = _universe()[:6]
    graphs = [g for k in range(0, 4) for g in combinations(quads, k)]
    keys = sorted(graphs, key=graph_key)
    for a, b in zip(keys, keys[1:]):
        assert compare_graphs(a, b) < 0


def test_subset_precedes_superset():
    g = {Q("c", "a", "b", "c")}
    assert compare_graphs(g, g | {Q("c", "a", "a", "a")}) < 0


def test_term_oracle_agrees_on_kinds():
    for a in (U("x"), B("x"), literal("x")):
        for b in (U("y"), B("y"), literal("y")):
            assert (compare_terms(a, b) < 0) == (quad_cmp((a,), (b,)) < 0)


@pytest.mark.parametrize("v,w,expected", [
    ((U("a"), B("x")), (U("a"), B("y")), True),
    ((B("x"), B("x")), (B("y"), B("z")), False),
    ((B("x"), B("y")), (B("z"), B("z")), False),
    ((U("a"),), (U("b"),), False),
    ((B("x"), U("a")), (U("a"), B("x")), False),
    ((), (), True),
])
def test_vector_isomorphism(v, w, expected):
    assert vector_isomorphic(v, w) is expected
    assert iso_vectors(v, w) is expected


def test_make_rule_splits_variables():
    r = make_rule(4, [Q("c3", "a", "?z41", "?x41"), Q("c3", "b", "?z42", "?x42")],
                  [Q("c2", "?y4", "?x41", "a"), Q("c2", "?y4", "?x42", "b")])
    assert [v.value for v in r.frontier] == ["x41", "x42"]
    assert [v.value for v in r.existential] == ["y4"]


def test_make_rule_rejects_blank_nodes():
    with pytest.raises(ValueError):
        make_rule(1, [Quad(U("c"), B("x"), U("p"), U("o"))], [Q("c", "a", "b", "c")])


def test_head_components_group_by_shared_existentials():
    r = make_rule(1, [Q("c", "?x", "p", "?z")],
                  [Q("c", "?x", "p", "?y1"), Q("c", "?y1", "q", "?y1"),
                   Q("d", "?x", "p", "?y2"), Q("d", "?x", "r", "?x")])
    comps = head_components(r.head, set(r.existential))
    assert sorted(len(c) for c in comps) == [1, 1, 2]


def test_split_head_pieces_keeps_every_atom():
    r = make_rule(7, [Q("c", "?x", "p", "?z")],
                  [Q("c", "?x", "p", "?y1"), Q("d", "?x", "p", "?y2"),
                   Q("d", "?x", "r", "?x")])
    pieces = split_head_pieces(r)
    assert sorted(a for p in pieces for a in p.head) == sorted(r.head)
    assert all(p.parent == 7 for p in pieces)
    assert len({p.id for p in pieces}) == len(pieces)


def test_normalize_keeps_single_component_rules():
    r = make_rule(1, [Q("c", "?x", "p", "?z")],
                  [Q("c", "?x", "p", "?y"), Q("c", "?x", "q", "?x")])
    assert normalize_rules([r]) == [r]


def test_normalize_splits_independent_existentials():
    r = make_rule(1, [Q("c", "?x", "p", "?z")],
                  [Q("c", "?x", "p", "?y1"), Q("c", "?x", "q", "?y2")])
    out = normalize_rules([r])
    assert len(out) == 2
    assert all(len(p.existential) == 1 for p in out)


def test_vector_text_form():
    assert vector_text((U("a"), B("b"))) == "(<a> _:b)"
    assert U("a").kind == URI and B("b").kind == BNODE
