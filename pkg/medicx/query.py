'''
Copyright (C) 2025 The medicX developers

This program is free software: you can redistribute it and/or modify
it under the terms of the GNU Lesser General Public License as published by
the Free Software Foundation, either version 3 of the License, or
(at your option) any later version.

This program is distributed in the hope that it will be useful,
but WITHOUT ANY WARRANTY; without even the implied warranty of
MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
GNU Lesser General Public License for more details.

You should have received a copy of the GNU Lesser General Public License
along with this program.  If not, see <https://www.gnu.org/licenses/>.
'''
from __future__ import annotations

import argparse
import re
import sys
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Set, Tuple, Union

from rdflib import Literal, URIRef
from rdflib.namespace import XSD

from . import defaults
from .errors import QueryParseError, UnboundProjection, UnknownPrefix
from .graph import QuadStore, Term, term_key
from .rdfio import format_term

console = defaults.console

# -------------------------
# Plan
# -------------------------


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return f'?{self.name}'


@dataclass(frozen=True)
class PrefixedName:
    '''resolved against the declared prefixes at evaluation time'''
    prefix: str
    local: str


Node = Union[Var, PrefixedName, URIRef, Literal]


@dataclass(frozen=True)
class TriplePattern:
    s: Node
    p: Node
    o: Node


@dataclass(frozen=True)
class Values:
    var: Var
    terms: Tuple[Node, ...]


@dataclass(frozen=True)
class Compare:
    op: str  # '=' or '!='
    left: Node
    right: Node


@dataclass(frozen=True)
class InList:
    operand: Node
    options: Tuple[Node, ...]
    negated: bool = False


@dataclass(frozen=True)
class Filter:
    expr: Union[Compare, InList]


@dataclass(frozen=True)
class Group:
    elements: Tuple['Element', ...] = ()


@dataclass(frozen=True)
class OptionalGroup:
    group: Group


Element = Union[TriplePattern, Values, OptionalGroup, Filter]


@dataclass(frozen=True)
class QueryPlan:
    '''
    A parsed SELECT query. ``projection`` is None for ``SELECT *``.
    '''
    prefixes: Tuple[Tuple[str, str], ...]
    projection: Optional[Tuple[Var, ...]]
    distinct: bool
    where: Group
    order_by: Tuple[Var, ...] = ()

    @property
    def empty(self) -> bool:
        return not self.where.elements


# -------------------------
# Lexer
# -------------------------

KEYWORDS = frozenset({
    'PREFIX', 'SELECT', 'DISTINCT', 'WHERE', 'VALUES', 'OPTIONAL', 'FILTER',
    'ORDER', 'BY', 'IN', 'NOT'
})


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    col: int


_TOKEN = re.compile(
    r'''
    (?P<WS>[ \t\r\n]+)
  | (?P<COMMENT>\#[^\n]*)
  | (?P<IRI><[^<>"{}|^`\\\x00-\x20]*>)
  | (?P<VAR>[?$][A-Za-z_][A-Za-z0-9_]*)
  | (?P<STRING>"(?:[^"\\\n\r]|\\.)*"|'(?:[^'\\\n\r]|\\.)*')
  | (?P<LANG>@[a-zA-Z]+(?:-[a-zA-Z0-9]+)*)
  | (?P<NUMBER>[+-]?\d+(?:\.\d+)?)
  | (?P<PNAME>(?:[A-Za-z][A-Za-z0-9_\-]*)?:(?:[A-Za-z0-9_][A-Za-z0-9_\-]*)?)
  | (?P<WORD>[A-Za-z]+)
  | (?P<PUNCT>!=|\^\^|[{}().;,=*])
    ''', re.VERBOSE)

_STRING_ESCAPE = re.compile(r'\\(.)')
_STRING_ESCAPES = {'t': '\t', 'n': '\n', 'r': '\r', '"': '"', "'": "'",
                   '\\': '\\', 'b': '\b', 'f': '\f'}


def tokenize(text: str) -> Iterator[Token]:
    '''
    Split a query into tokens. Keywords are case-insensitive and come
    out upper-cased; ``a`` is its own token kind.
    '''
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise QueryParseError(line, col, 'a token')
        kind, value = m.lastgroup, m.group()
        if kind == 'WORD':
            if value == 'a':
                kind = 'A'
            elif value.upper() in KEYWORDS:
                kind, value = 'KEYWORD', value.upper()
            else:
                raise QueryParseError(line, col, 'a keyword')
        if kind not in ('WS', 'COMMENT'):
            yield Token(kind, value, line, col)
        newlines = value.count('\n')
        if newlines:
            line += newlines
            line_start = pos + value.rindex('\n') + 1
        pos = m.end()
    col = pos - line_start + 1
    yield Token('EOF', '', line, col)


# -------------------------
# Parser
# -------------------------


class _Parser(object):

    def __init__(self, text: str):
        self.tokens = list(tokenize(text))
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def fail(self, expected: str):
        raise QueryParseError(self.tok.line, self.tok.col, expected)

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        return self.tok.kind == kind and (text is None or self.tok.text == text)

    def take(self, kind: str, text: Optional[str] = None,
             expected: Optional[str] = None) -> Token:
        if not self.at(kind, text):
            self.fail(expected or repr(text) if text else expected or kind)
        tok = self.tok
        self.i += 1
        return tok

    def accept(self, kind: str, text: Optional[str] = None) -> bool:
        if self.at(kind, text):
            self.i += 1
            return True
        return False

    # query := prologue select where order? EOF
    def query(self) -> QueryPlan:
        prefixes = []
        while self.accept('KEYWORD', 'PREFIX'):
            name = self.take('PNAME', expected='a prefix name')
            if not name.text.endswith(':'):
                self.fail('a prefix name ending in ":"')
            iri = self.take('IRI', expected='an IRI')
            prefixes.append((name.text[:-1], iri.text[1:-1]))
        self.take('KEYWORD', 'SELECT', expected='SELECT')
        distinct = self.accept('KEYWORD', 'DISTINCT')
        projection: Optional[List[Var]] = []
        if self.accept('PUNCT', '*'):
            projection = None
        else:
            while self.at('VAR'):
                projection.append(Var(self.take('VAR').text[1:]))
            if not projection:
                self.fail('a variable or "*"')
        self.accept('KEYWORD', 'WHERE')
        where = self.group()
        order_by: List[Var] = []
        if self.accept('KEYWORD', 'ORDER'):
            self.take('KEYWORD', 'BY', expected='BY')
            while self.at('VAR'):
                order_by.append(Var(self.take('VAR').text[1:]))
            if not order_by:
                self.fail('a variable')
        self.take('EOF', expected='end of query')
        return QueryPlan(prefixes=tuple(prefixes),
                         projection=None if projection is None else
                         tuple(projection),
                         distinct=distinct,
                         where=where,
                         order_by=tuple(order_by))

    # group := '{' (triples | VALUES | OPTIONAL | FILTER | '.')* '}'
    def group(self) -> Group:
        self.take('PUNCT', '{', expected='"{"')
        elements: List[Element] = []
        while not self.accept('PUNCT', '}'):
            if self.accept('PUNCT', '.'):
                continue
            if self.accept('KEYWORD', 'VALUES'):
                elements.append(self.values())
            elif self.accept('KEYWORD', 'OPTIONAL'):
                elements.append(OptionalGroup(self.group()))
            elif self.accept('KEYWORD', 'FILTER'):
                elements.append(self.filter())
            elif self.at('EOF'):
                self.fail('"}"')
            else:
                elements.extend(self.triples())
        return Group(tuple(elements))

    def values(self) -> Values:
        var = Var(self.take('VAR', expected='a variable').text[1:])
        self.take('PUNCT', '{', expected='"{"')
        terms = []
        while not self.accept('PUNCT', '}'):
            terms.append(self.term(allow_var=False))
        return Values(var, tuple(terms))

    def filter(self) -> Filter:
        self.take('PUNCT', '(', expected='"("')
        left = self.term()
        if self.at('PUNCT', '=') or self.at('PUNCT', '!='):
            op = self.take('PUNCT').text
            expr = Compare(op, left, self.term())
        else:
            negated = self.accept('KEYWORD', 'NOT')
            self.take('KEYWORD', 'IN', expected='"=", "!=" or IN')
            self.take('PUNCT', '(', expected='"("')
            options = [self.term()]
            while self.accept('PUNCT', ','):
                options.append(self.term())
            self.take('PUNCT', ')', expected='")"')
            expr = InList(left, tuple(options), negated)
        self.take('PUNCT', ')', expected='")"')
        return Filter(expr)

    # triples := subject verb objects (';' (verb objects)?)*
    def triples(self) -> List[TriplePattern]:
        s = self.term(allow_literal=False)
        out = []
        while True:
            p = self.verb()
            out.append(TriplePattern(s, p, self.term()))
            while self.accept('PUNCT', ','):
                out.append(TriplePattern(s, p, self.term()))
            if not self.accept('PUNCT', ';'):
                break
            # a dangling ';' before '.' or '}'
            if self.at('PUNCT', '.') or self.at('PUNCT', '}'):
                break
        return out

    def verb(self) -> Node:
        if self.accept('A'):
            return URIRef('http://www.w3.org/1999/02/22-rdf-syntax-ns#type')
        return self.term(allow_literal=False)

    def term(self, allow_var: bool = True, allow_literal: bool = True) -> Node:
        tok = self.tok
        if tok.kind == 'VAR' and allow_var:
            self.i += 1
            return Var(tok.text[1:])
        if tok.kind == 'IRI':
            self.i += 1
            return URIRef(tok.text[1:-1])
        if tok.kind == 'PNAME':
            self.i += 1
            prefix, local = tok.text.split(':', 1)
            return PrefixedName(prefix, local)
        if tok.kind == 'STRING' and allow_literal:
            self.i += 1
            text = _STRING_ESCAPE.sub(
                lambda m: _STRING_ESCAPES.get(m.group(1), m.group(1)),
                tok.text[1:-1])
            if self.at('LANG'):
                return Literal(text, lang=self.take('LANG').text[1:])
            if self.accept('PUNCT', '^^'):
                dt = self.term(allow_var=False, allow_literal=False)
                return _TypedLiteral(text, dt)
            return Literal(text)
        if tok.kind == 'NUMBER' and allow_literal:
            self.i += 1
            dt = XSD.decimal if '.' in tok.text else XSD.integer
            return Literal(tok.text, datatype=dt, normalize=False)
        self.fail('a variable, IRI or literal' if allow_literal else
                  'a variable or IRI' if allow_var else 'an IRI or literal')


@dataclass(frozen=True)
class _TypedLiteral:
    '''a literal whose datatype is a prefixed name, resolved later'''
    text: str
    datatype: Union[URIRef, PrefixedName]


def parse_query(text: str) -> QueryPlan:
    '''
    Parse the supported SELECT subset.

    Raises:
        QueryParseError: with the 1-based line and column of the first
            unexpected token and what was expected there.
    '''
    return _Parser(text).query()


# -------------------------
# Evaluation
# -------------------------

Row = Dict[str, Term]


class ResultTable(NamedTuple):
    header: Tuple[str, ...]
    rows: List[Tuple[Optional[Term], ...]]

    def column(self, var: str) -> List[Optional[Term]]:
        i = self.header.index(var.lstrip('?$'))
        return [row[i] for row in self.rows]

    def to_tsv(self) -> str:
        '''
        Tab separated rows, terms in N-Triples syntax, unbound as empty.
        '''
        lines = ['\t'.join(f'?{h}' for h in self.header)]
        for row in self.rows:
            lines.append('\t'.join('' if t is None else format_term(t)
                                   for t in row))
        return '\n'.join(lines) + '\n'


class _Resolver(object):
    '''replaces prefixed names by IRIs'''

    def __init__(self, prefixes: Iterable[Tuple[str, str]]):
        self.prefixes = dict(prefixes)

    def node(self, n):
        if isinstance(n, PrefixedName):
            if n.prefix not in self.prefixes:
                raise UnknownPrefix(n.prefix)
            return URIRef(self.prefixes[n.prefix] + n.local)
        if isinstance(n, _TypedLiteral):
            dt = self.node(n.datatype)
            if dt == XSD.string:
                return Literal(n.text)
            return Literal(n.text, datatype=dt, normalize=False)
        return n

    def group(self, g: Group) -> Group:
        out = []
        for e in g.elements:
            if isinstance(e, TriplePattern):
                out.append(
                    TriplePattern(self.node(e.s), self.node(e.p),
                                  self.node(e.o)))
            elif isinstance(e, Values):
                out.append(Values(e.var, tuple(self.node(t) for t in e.terms)))
            elif isinstance(e, OptionalGroup):
                out.append(OptionalGroup(self.group(e.group)))
            elif isinstance(e.expr, Compare):
                out.append(
                    Filter(
                        Compare(e.expr.op, self.node(e.expr.left),
                                self.node(e.expr.right))))
            else:
                out.append(
                    Filter(
                        InList(self.node(e.expr.operand),
                               tuple(self.node(t) for t in e.expr.options),
                               e.expr.negated)))
        return Group(tuple(out))


def group_variables(g: Group) -> List[str]:
    '''variables of a group in order of first appearance'''
    seen: Dict[str, None] = {}

    def visit(n):
        if isinstance(n, Var):
            seen.setdefault(n.name)

    for e in g.elements:
        if isinstance(e, TriplePattern):
            for n in (e.s, e.p, e.o):
                visit(n)
        elif isinstance(e, Values):
            visit(e.var)
        elif isinstance(e, OptionalGroup):
            for v in group_variables(e.group):
                seen.setdefault(v)
        elif isinstance(e.expr, Compare):
            visit(e.expr.left)
            visit(e.expr.right)
        else:
            visit(e.expr.operand)
            for n in e.expr.options:
                visit(n)
    return list(seen)


class _Evaluator(object):

    def __init__(self, store: QuadStore):
        self.store = store

    def value(self, n, row: Row) -> Optional[Term]:
        return row.get(n.name) if isinstance(n, Var) else n

    def triple(self, rows: List[Row], t: TriplePattern) -> List[Row]:
        out = []
        for row in rows:
            s, p, o = (self.value(n, row) for n in (t.s, t.p, t.o))
            seen: Set[Tuple[Term, Term, Term]] = set()
            for qs, qp, qo, _ in self.store.match(s, p, o):
                if (qs, qp, qo) in seen:
                    continue
                seen.add((qs, qp, qo))
                new = dict(row)
                ok = True
                for n, term in ((t.s, qs), (t.p, qp), (t.o, qo)):
                    if isinstance(n, Var):
                        if new.setdefault(n.name, term) != term:
                            ok = False
                            break
                if ok:
                    out.append(new)
        return out

    def values(self, rows: List[Row], v: Values) -> List[Row]:
        out = []
        for row in rows:
            bound = row.get(v.var.name)
            for term in v.terms:
                if bound is None:
                    out.append({**row, v.var.name: term})
                elif bound == term:
                    out.append(row)
        return out

    def test(self, expr, row: Row) -> bool:
        if isinstance(expr, Compare):
            a, b = self.value(expr.left, row), self.value(expr.right, row)
            if a is None or b is None:
                return False
            return (a == b) if expr.op == '=' else (a != b)
        a = self.value(expr.operand, row)
        if a is None:
            return False
        options = [self.value(n, row) for n in expr.options]
        found = a in [x for x in options if x is not None]
        return not found if expr.negated else found

    def group(self, rows: List[Row], g: Group) -> List[Row]:
        filters = []
        for e in g.elements:
            if isinstance(e, TriplePattern):
                rows = self.triple(rows, e)
            elif isinstance(e, Values):
                rows = self.values(rows, e)
            elif isinstance(e, OptionalGroup):
                joined = []
                for row in rows:
                    sub = self.group([row], e.group)
                    joined.extend(sub if sub else [row])
                rows = joined
            else:
                filters.append(e.expr)
        for f in filters:
            rows = [r for r in rows if self.test(f, r)]
        return rows


def _sort_key(t: Optional[Term]) -> Tuple:
    return (0, '', '', '') if t is None else term_key(t)


def evaluate(plan: QueryPlan, store: QuadStore) -> ResultTable:
    '''
    Evaluate a plan over the union of all graphs of ``store``.

    Raises:
        UnknownPrefix: a prefixed name uses an undeclared prefix.
        UnboundProjection: no projected variable occurs in a nonempty
            WHERE, or an ORDER BY variable occurs neither there nor in
            the projection.
    '''
    where = _Resolver(plan.prefixes).group(plan.where)
    in_where = group_variables(where)
    header = tuple(v.name for v in plan.projection) \
        if plan.projection is not None else tuple(in_where)
    if plan.empty:
        return ResultTable(header, [])
    if header and not any(h in in_where for h in header):
        raise UnboundProjection(header[0])
    for v in plan.order_by:
        if v.name not in in_where and v.name not in header:
            raise UnboundProjection(v.name)

    rows = _Evaluator(store).group([{}], where)
    if plan.order_by:
        rows = sorted(rows,
                      key=lambda r: tuple(
                          _sort_key(r.get(v.name)) for v in plan.order_by))
    table = [tuple(r.get(h) for h in header) for r in rows]
    if plan.distinct:
        seen = set()
        unique = []
        for row in table:
            if row not in seen:
                seen.add(row)
                unique.append(row)
        table = unique
    return ResultTable(header, table)


def run_query(text: str, store: QuadStore) -> ResultTable:
    return evaluate(parse_query(text), store)


def main(argv: List[str]) -> None:
    '''
    Run a query file against an N-Quads file and print TSV.
    '''
    from .rdfio import read_graph
    parser = argparse.ArgumentParser()
    parser.add_argument('query', type=str)
    parser.add_argument('graph', type=str)
    args = parser.parse_args(argv)
    with open(args.query, 'rt', encoding='utf-8') as f:
        plan = parse_query(f.read())
    sys.stdout.write(evaluate(plan, read_graph(args.graph)).to_tsv())


if __name__ == '__main__':  # pragma: no cover
    main(sys.argv[1:])
