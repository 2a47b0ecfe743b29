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
from typing import Optional


class MedicxError(Exception):
    '''
    Base class of every error the pipeline raises on purpose.

    Attributes:
        code (str): stable machine-parseable identifier, printed by the
            command line as ``error[<code>]: <message>``.
        exit_status (int): process exit status used by the command line.
            1 for runtime errors, 2 for parse and usage errors.
    '''
    code: str = 'medicx'
    exit_status: int = 1


class MedicxParseError(MedicxError, ValueError):
    exit_status = 2


# ingest


class MalformedLine(MedicxParseError):
    code = 'malformed-line'

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f'line {line_no}: {reason}')


class MissingField(MedicxParseError):
    code = 'missing-field'

    def __init__(self, line_no: int, field: str):
        self.line_no = line_no
        self.field = field
        super().__init__(f'line {line_no}: missing field {field!r}')


class MalformedDocument(MedicxParseError):
    '''A whole-file JSON document (mappings, references) did not validate.'''
    code = 'malformed-document'

    def __init__(self, source: str, reason: str):
        self.source = source
        self.reason = reason
        super().__init__(f'{source}: {reason}')


# normalize


class EmptyInput(MedicxParseError):
    code = 'empty-input'

    def __init__(self, raw: Optional[str] = None):
        self.raw = raw
        super().__init__(f'nothing left to normalize in {raw!r}')


# resolve / graph


class DanglingDdiPartner(MedicxError):
    code = 'dangling-ddi-partner'

    def __init__(self, drugbank_id: str, partner_id: str):
        self.drugbank_id = drugbank_id
        self.partner_id = partner_id
        super().__init__(
            f'{drugbank_id} lists an interaction with unknown entry {partner_id}')


class InconsistentMapping(MedicxError):
    code = 'inconsistent-mapping'

    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


# rdfio


class NQuadsSyntaxError(MedicxParseError):
    code = 'nquads-syntax'

    def __init__(self, line_no: int, column: int, reason: str):
        self.line_no = line_no
        self.column = column
        self.reason = reason
        super().__init__(f'line {line_no}, column {column}: {reason}')


# query


class QueryParseError(MedicxParseError):
    code = 'query-parse'

    def __init__(self, line: int, col: int, expected: str):
        self.line = line
        self.col = col
        self.expected = expected
        super().__init__(f'line {line}, column {col}: expected {expected}')


class UnknownPrefix(MedicxParseError):
    code = 'unknown-prefix'

    def __init__(self, prefix: str):
        self.prefix = prefix
        super().__init__(f'prefix {prefix!r} is not declared')


class UnboundProjection(MedicxParseError):
    code = 'unbound-projection'

    def __init__(self, variable: str):
        self.variable = variable
        super().__init__(f'?{variable} does not occur in the WHERE clause')


class UnknownCq(MedicxError):
    code = 'unknown-cq'

    def __init__(self, cq_id: str):
        self.cq_id = cq_id
        super().__init__(f'no competency question named {cq_id!r}')


# graph


class FrozenStore(MedicxError):
    code = 'frozen-store'

    def __init__(self):
        super().__init__('the quad store is frozen')
