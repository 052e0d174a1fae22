"""Readers and writers: N-Quads, rule files, query files, JSON reports."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable

from .model import (BNODE, LITERAL, URI, VAR, BridgeRule, Quad, Term, bnode,
                    literal, make_rule, uri, var, variables)

DEFAULT_PREFIXES = {
    "rdf": "http://www.w3.org/1999/02/22-rdf-syntax-ns#",
    "rdfs": "http://www.w3.org/2000/01/rdf-schema#",
    "xsd": "http://www.w3.org/2001/XMLSchema#",
    "qc": "urn:quadchase:",
}


class ParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<iri><[^<>"{}|^`\\\s]*>)
  | (?P<bnode>_:[A-Za-z0-9_](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?)
  | (?P<lit>"(?:[^"\\\n]|\\.)*"(?:@[A-Za-z]+(?:-[A-Za-z0-9]+)*|\^\^<[^<>\s]*>)?)
  | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<arrow>=>|->)
  | (?P<directive>@prefix|PREFIX\b)
  | (?P<name>[A-Za-z_][A-Za-z0-9_\-]*(?::[A-Za-z0-9_\-]*(?:\.[A-Za-z0-9_\-]+)*)?|:[A-Za-z0-9_\-]+)
  | (?P<punct>[(),.\[\]:])
  | (?P<num>[0-9]+)
""", re.VERBOSE)

_ESCAPES = {"n": "\n", "r": "\r", "t": "\t", '"': '"', "\\": "\\", "'": "'",
            "b": "\b", "f": "\f"}


@dataclass
class Token:
    kind: str
    text: str
    line: int


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    pos, line = 0, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            out.append(Token(kind, m.group(), line))
        line += m.group().count("\n")
        pos = m.end()
    return out


def _unescape(body: str, line: int) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        nxt = body[i + 1]
        if nxt in _ESCAPES:
            out.append(_ESCAPES[nxt])
            i += 2
        elif nxt in "uU":
            width = 4 if nxt == "u" else 8
            hexpart = body[i + 2:i + 2 + width]
            if len(hexpart) != width:
                raise ParseError("bad unicode escape", line)
            out.append(chr(int(hexpart, 16)))
            i += 2 + width
        else:
            raise ParseError(f"bad escape \\{nxt}", line)
    return "".join(out)


def _literal_term(text: str, line: int) -> Term:
    end = text.rindex('"')
    lex = _unescape(text[1:end], line)
    rest = text[end + 1:]
    if rest.startswith("@"):
        return literal(lex, lang=rest[1:])
    if rest.startswith("^^"):
        return literal(lex, datatype=rest[3:-1])
    return literal(lex)


class _Cursor:
    def __init__(self, tokens: list[Token], prefixes: dict[str, str] | None = None):
        self.toks = tokens
        self.i = 0
        self.prefixes = dict(DEFAULT_PREFIXES if prefixes is None else prefixes)

    def peek(self, off: int = 0) -> Token | None:
        j = self.i + off
        return self.toks[j] if j < len(self.toks) else None

    def line(self) -> int | None:
        tok = self.peek() or (self.toks[-1] if self.toks else None)
        return tok.line if tok else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input", self.line())
        self.i += 1
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.text == text and tok.kind in ("punct", "arrow")

    def expect(self, text: str) -> Token:
        tok = self.next()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text!r}", tok.line)
        return tok

    def done(self) -> bool:
        return self.i >= len(self.toks)

    def term(self, allow_var: bool = True, allow_bnode: bool = True) -> Term:
        tok = self.next()
        if tok.kind == "iri":
            if len(tok.text) == 2:
                raise ParseError("empty IRI", tok.line)
            return uri(tok.text[1:-1])
        if tok.kind == "bnode":
            if not allow_bnode:
                raise ParseError(f"blank node {tok.text} not allowed here", tok.line)
            return bnode(tok.text[2:])
        if tok.kind == "lit":
            return _literal_term(tok.text, tok.line)
        if tok.kind == "var":
            if not allow_var:
                raise ParseError(f"variable {tok.text} not allowed here", tok.line)
            return var(tok.text[1:])
        if tok.kind == "name":
            return self.expand(tok)
        raise ParseError(f"expected a term, found {tok.text!r}", tok.line)

    def expand(self, tok: Token) -> Term:
        if ":" not in tok.text:
            return uri(tok.text)
        pfx, local = tok.text.split(":", 1)
        if pfx not in self.prefixes:
            raise ParseError(f"unknown prefix {pfx!r}", tok.line)
        return uri(self.prefixes[pfx] + local)

    def directive(self) -> None:
        head = self.next()
        name = self.next()
        if name.kind != "name" or not name.text.endswith(":"):
            raise ParseError("expected prefix label", name.line)
        target = self.next()
        if target.kind != "iri":
            raise ParseError("expected IRI in prefix declaration", target.line)
        self.prefixes[name.text[:-1]] = target.text[1:-1]
        if head.text == "@prefix":
            self.expect(".")


# ---------------------------------------------------------------- N-Quads

def _decode(data: str | bytes) -> str:
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def parse_nquad_line(line: str, lineno: int = 1, generalized: bool = False) -> Quad | None:
    toks = tokenize(line)
    if not toks:
        return None
    for t in toks:
        t.line = lineno
    cur = _Cursor(toks, {})
    terms = []
    while not cur.at("."):
        if cur.done():
            raise ParseError("missing terminating '.'", lineno)
        tok = cur.peek()
        if tok.kind not in ("iri", "bnode", "lit"):
            raise ParseError(f"unexpected token {tok.text!r}", lineno)
        terms.append(cur.term(allow_var=False))
    cur.expect(".")
    if not cur.done():
        raise ParseError("trailing content after '.'", lineno)
    if len(terms) == 3:
        raise ParseError("missing context term (triples are not accepted)", lineno)
    if len(terms) != 4:
        raise ParseError(f"expected 4 terms, found {len(terms)}", lineno)
    s, p, o, c = terms
    if c.kind != URI:
        raise ParseError("context must be an IRI", lineno)
    if not generalized:
        if s.kind == LITERAL:
            raise ParseError("literal subject needs generalized mode", lineno)
        if p.kind != URI:
            raise ParseError("non-IRI predicate needs generalized mode", lineno)
    return Quad(c, s, p, o)


def parse_nquads(data: str | bytes, generalized: bool = False) -> set[Quad]:
    out: set[Quad] = set()
    # only LF ends a line; str.splitlines would also split on separators inside literals
    for n, line in enumerate(_decode(data).split("\n"), start=1):
        q = parse_nquad_line(line.rstrip("\r"), n, generalized)
        if q is not None:
            out.add(q)
    return out


def nquad_line(q: Quad) -> str:
    return f"{q.s} {q.p} {q.o} {q.c} ."


def serialize_nquads(quads: Iterable[Quad]) -> str:
    return "".join(nquad_line(q) + "\n" for q in sorted(set(quads)))


# ---------------------------------------------------------------- rules

@dataclass
class RuleDocument:
    prefixes: dict[str, str] = field(default_factory=dict)
    rules: list[BridgeRule] = field(default_factory=list)


def _atom(cur: _Cursor, where: str) -> Quad:
    tok = cur.next()
    if tok.kind == "iri":
        ctx = uri(tok.text[1:-1])
    elif tok.kind == "name":
        ctx = cur.expand(tok)
    else:
        raise ParseError(f"expected a context name in {where}, found {tok.text!r}", tok.line)
    cur.expect("(")
    args = []
    for k in range(3):
        if k:
            cur.expect(",")
        t = cur.term(allow_bnode=False)
        args.append(t)
    cur.expect(")")
    return Quad(ctx, *args)


def _atoms(cur: _Cursor, stop: tuple[str, ...], where: str) -> list[Quad]:
    out: list[Quad] = []
    if any(cur.at(s) for s in stop):
        return out
    out.append(_atom(cur, where))
    while cur.at(","):
        cur.next()
        out.append(_atom(cur, where))
    return out


def parse_rules(data: str | bytes) -> RuleDocument:
    try:
        toks = tokenize(_decode(data))
    except ParseError:
        raise
    cur = _Cursor(toks)
    doc = RuleDocument()
    seen: set[int] = set()
    position = 0
    while not cur.done():
        tok = cur.peek()
        if tok.kind == "directive":
            cur.directive()
            continue
        position += 1
        line = tok.line
        rid = position
        if cur.at("["):
            cur.next()
            num = cur.next()
            if num.kind != "num":
                raise ParseError("rule id must be a non-negative integer", num.line)
            rid = int(num.text)
            cur.expect("]")
        body = _atoms(cur, ("=>", "->"), "body")
        arrow = cur.next()
        if arrow.kind != "arrow":
            raise ParseError(f"expected '=>', found {arrow.text!r}", arrow.line)
        declared = None
        nxt = cur.peek()
        if nxt is not None and nxt.kind == "name" and nxt.text == "EXISTS":
            cur.next()
            declared = []
            while cur.peek() is not None and cur.peek().kind == "var":
                declared.append(var(cur.next().text[1:]))
            cur.expect(":")
        head = _atoms(cur, (".",), "head")
        cur.expect(".")
        if not head:
            raise ParseError("rule with empty head", line)
        if rid in seen:
            raise ParseError(f"duplicate rule id {rid}", line)
        seen.add(rid)
        rule = make_rule(rid, body, head)
        if declared is not None:
            bvars = set(variables(body))
            clash = [v for v in declared if v in bvars]
            if clash:
                raise ParseError(
                    f"rule {rid}: existential {clash[0]} also occurs in the body", line)
            if set(rule.existential) != set(declared):
                raise ParseError(
                    f"rule {rid}: declared existentials do not match head-only variables", line)
        doc.rules.append(rule)
    doc.prefixes = {k: v for k, v in cur.prefixes.items() if DEFAULT_PREFIXES.get(k) != v}
    return doc


def _pattern_text(q: Quad) -> str:
    return f"{q.c}({q.s}, {q.p}, {q.o})"


def serialize_rules(rules: Iterable[BridgeRule]) -> str:
    lines = []
    for r in rules:
        body = ", ".join(_pattern_text(q) for q in r.body)
        head = ", ".join(_pattern_text(q) for q in r.head)
        lines.append(f"[{r.id}] {body} => {head} .".replace("]  =>", "] =>"))
    return "".join(line + "\n" for line in lines)


# ---------------------------------------------------------------- queries

@dataclass(frozen=True)
class QueryDocument:
    free: tuple[Term, ...]
    atoms: tuple[Quad, ...]

    @property
    def is_boolean(self) -> bool:
        return not self.free


def parse_query(data: str | bytes) -> QueryDocument:
    cur = _Cursor(tokenize(_decode(data)))
    while not cur.done() and cur.peek().kind == "directive":
        cur.directive()
    tok = cur.next()
    free: list[Term] = []
    if tok.text == "ASK":
        pass
    elif tok.text == "SELECT":
        while cur.peek() is not None and cur.peek().kind == "var":
            free.append(var(cur.next().text[1:]))
        if not free:
            raise ParseError("SELECT needs at least one variable", tok.line)
        kw = cur.next()
        if kw.text != "WHERE":
            raise ParseError("expected WHERE", kw.line)
    else:
        raise ParseError("query must start with ASK or SELECT", tok.line)
    atoms = _atoms(cur, (".",), "query")
    cur.expect(".")
    if not cur.done():
        raise ParseError("trailing content after query", cur.line())
    if not atoms:
        raise ParseError("query has no atoms", tok.line)
    qvars = set(variables(atoms))
    for v in free:
        if v not in qvars:
            raise ParseError(f"free variable {v} does not occur in any atom", tok.line)
    if len(set(free)) != len(free):
        raise ParseError("repeated free variable", tok.line)
    return QueryDocument(tuple(free), tuple(atoms))


def serialize_query(q: QueryDocument) -> str:
    atoms = ", ".join(_pattern_text(a) for a in q.atoms)
    if q.free:
        return f"SELECT {' '.join(map(str, q.free))} WHERE {atoms} .\n"
    return f"ASK {atoms} .\n"


# ---------------------------------------------------------------- reports

def to_jsonable(obj):
    if isinstance(obj, Term):
        return str(obj)
    if isinstance(obj, Quad):
        return nquad_line(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (set, frozenset)):
        return sorted((to_jsonable(x) for x in obj), key=lambda x: json.dumps(x, sort_keys=True))
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if hasattr(obj, "to_report"):
        return to_jsonable(obj.to_report())
    return obj


def serialize_report(result) -> str:
    return json.dumps(to_jsonable(result), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
