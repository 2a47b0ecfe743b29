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
from typing import Iterable, List, Optional, Union
import argparse
import re
import sys
from rdflib import BNode, Literal, URIRef
from rdflib.namespace import XSD

from . import defaults
from .errors import NQuadsSyntaxError
from .graph import Quad, QuadStore, Term

console = defaults.console

# canonical string escapes; everything else is written as raw UTF-8
_ESCAPE = {'\\': '\\\\', '"': '\\"', '\n': '\\n', '\r': '\\r', '\t': '\\t'}
_UNESCAPE = {
    't': '\t',
    'b': '\b',
    'n': '\n',
    'r': '\r',
    'f': '\f',
    '"': '"',
    "'": "'",
    '\\': '\\',
}
# characters an IRIREF may not hold literally
_IRI_FORBIDDEN = frozenset('<>"{}|^`\\') | frozenset(chr(i) for i in range(0x21))


def _escape_string(text: str) -> str:
    return ''.join(_ESCAPE.get(ch, ch) for ch in text)


def _escape_iri(iri: str) -> str:
    return ''.join(f'\\u{ord(ch):04X}' if ch in _IRI_FORBIDDEN else ch
                   for ch in iri)


def format_term(t: Term) -> str:
    '''N-Quads form of one term.'''
    if isinstance(t, URIRef):
        return f'<{_escape_iri(t)}>'
    if isinstance(t, BNode):
        return f'_:{t}'
    if isinstance(t, Literal):
        out = f'"{_escape_string(str(t))}"'
        if t.language:
            return f'{out}@{t.language}'
        if t.datatype is not None and t.datatype != XSD.string:
            return f'{out}^^<{_escape_iri(t.datatype)}>'
        return out
    raise TypeError(f'not an RDF term: {t!r}')


def _lines(quads: Iterable[Quad], with_graph: bool = True) -> List[str]:
    rows = set()
    for s, p, o, g in quads:
        if with_graph:
            rows.add((format_term(g), format_term(s), format_term(p),
                      format_term(o)))
        else:
            rows.add(('', format_term(s), format_term(p), format_term(o)))
    out = []
    for g, s, p, o in sorted(rows):
        out.append(f'{s} {p} {o} {g} .\n' if g else f'{s} {p} {o} .\n')
    return out


def serialize_nquads(store: Union[QuadStore, Iterable[Quad]]) -> bytes:
    '''
    Canonical N-Quads: one line per quad, sorted by the text of graph,
    subject, predicate and object. Equal stores give equal bytes.
    xsd:string literals are written plain and read back plain.
    '''
    return ''.join(_lines(store)).encode('utf-8')


def serialize_ntriples(store: Union[QuadStore, Iterable[Quad]]) -> bytes:
    '''The union of all graphs as sorted, duplicate-free N-Triples.'''
    return ''.join(_lines(store, with_graph=False)).encode('utf-8')


_UCHAR = r'\\u[0-9A-Fa-f]{4}|\\U[0-9A-Fa-f]{8}'
_IRIREF = re.compile(r'<((?:[^<>"{}|^`\\\x00-\x20]|' + _UCHAR + r')*)>')
_BNODE = re.compile(r'_:([A-Za-z0-9_](?:[A-Za-z0-9_.\-]*[A-Za-z0-9_\-])?)')
_LANGTAG = re.compile(r'@([a-zA-Z]+(?:-[a-zA-Z0-9]+)*)')
_ESCAPE_SEQ = re.compile(r'\\(?:u([0-9A-Fa-f]{4})|U([0-9A-Fa-f]{8})|(.))')
_STRING = re.compile(r'"((?:[^"\\\n\r]|\\.)*)"')


class _LineParser(object):
    '''Scans one N-Quads statement, tracking the column for errors.'''

    def __init__(self, line: str, line_no: int):
        self.line = line
        self.line_no = line_no
        self.pos = 0

    def fail(self, reason: str):
        raise NQuadsSyntaxError(self.line_no, self.pos + 1, reason)

    def skip_ws(self) -> None:
        while self.pos < len(self.line) and self.line[self.pos] in ' \t':
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.line[self.pos] if self.pos < len(self.line) else ''

    def _unescape(self, text: str, iri: bool = False) -> str:

        def repl(m: re.Match) -> str:
            code = m.group(1) or m.group(2)
            if code:
                return chr(int(code, 16))
            if iri or m.group(3) not in _UNESCAPE:
                self.fail(f'bad escape \\{m.group(3)}')
            return _UNESCAPE[m.group(3)]

        return _ESCAPE_SEQ.sub(repl, text)

    def iri(self) -> URIRef:
        self.skip_ws()
        m = _IRIREF.match(self.line, self.pos)
        if not m:
            self.fail('expected an IRI')
        iri = self._unescape(m.group(1), iri=True)
        self.pos = m.end()
        return URIRef(iri)

    def bnode(self) -> BNode:
        m = _BNODE.match(self.line, self.pos)
        if not m:
            self.fail('expected a blank node label')
        self.pos = m.end()
        return BNode(m.group(1))

    def literal(self) -> Literal:
        m = _STRING.match(self.line, self.pos)
        if not m:
            self.fail('unterminated string')
        text = self._unescape(m.group(1))
        self.pos = m.end()
        if self.line.startswith('@', self.pos):
            lang = _LANGTAG.match(self.line, self.pos)
            if not lang:
                self.fail('bad language tag')
            self.pos = lang.end()
            return Literal(text, lang=lang.group(1))
        if self.line.startswith('^^', self.pos):
            self.pos += 2
            dt = self.iri()
            if dt == XSD.string:
                return Literal(text)
            return Literal(text, datatype=dt, normalize=False)
        return Literal(text)

    def term(self, allowed: str, what: str) -> Term:
        ch = self.peek()
        if ch == '<' and 'i' in allowed:
            return self.iri()
        if ch == '_' and 'b' in allowed:
            return self.bnode()
        if ch == '"' and 'l' in allowed:
            return self.literal()
        self.fail(f'expected {what}')

    def statement(self, default_graph: Optional[URIRef]) -> Quad:
        s = self.term('ib', 'a subject')
        p = self.term('i', 'a predicate IRI')
        o = self.term('ibl', 'an object')
        g = default_graph
        if self.peek() in ('<', '_'):
            g = self.term('i', 'a graph IRI')
        if self.peek() != '.':
            self.fail("expected '.'")
        self.pos += 1
        rest = self.peek()
        if rest and rest != '#':
            self.fail('trailing characters after statement')
        if g is None:
            self.fail('missing graph label')
        return (s, p, o, g)


def parse_nquads(data: Union[bytes, str],
                 default_graph: Optional[URIRef] = None) -> QuadStore:
    '''
    Parse N-Quads into a frozen store.

    Args:
        data: the document, bytes are decoded as UTF-8.
        default_graph: graph for statements without a graph label. When
            None, such statements are an error.

    Raises:
        NQuadsSyntaxError: with the 1-based line and column of the
            offending position.
    '''
    if isinstance(data, bytes):
        try:
            data = data.decode('utf-8')
        except UnicodeDecodeError as e:
            line_no = data[:e.start].count(b'\n') + 1
            raise NQuadsSyntaxError(line_no, 1, 'invalid UTF-8')
    store = QuadStore()
    for line_no, line in enumerate(data.split('\n'), start=1):
        line = line.rstrip('\r')
        parser = _LineParser(line, line_no)
        if parser.peek() in ('', '#'):
            continue
        try:
            store.add(*parser.statement(default_graph))
        except ValueError as e:
            if isinstance(e, NQuadsSyntaxError):
                raise
            raise NQuadsSyntaxError(line_no, 1, str(e))
    return store.freeze()


def read_graph(path: str) -> QuadStore:
    with open(path, 'rb') as f:
        return parse_nquads(f.read())


def write_graph(store: QuadStore, path: str, fmt: str = 'nquads') -> None:
    data = serialize_ntriples(store) if fmt == 'ntriples' \
        else serialize_nquads(store)
    with open(path, 'wb') as f:
        f.write(data)


def main(argv: List[str]) -> None:
    '''
    Re-serialize an N-Quads file canonically to stdout.
    '''
    parser = argparse.ArgumentParser()
    parser.add_argument('path', type=str)
    parser.add_argument('--ntriples', action='store_true')
    args = parser.parse_args(argv)
    store = read_graph(args.path)
    out = serialize_ntriples(store) if args.ntriples else serialize_nquads(store)
    sys.stdout.buffer.write(out)


if __name__ == '__main__':  # pragma: no cover
    main(sys.argv[1:])
