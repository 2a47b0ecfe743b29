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
import concurrent.futures
import json
import os
import re
import sys
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from rich.progress import track

from . import defaults
from . import vocab
from .errors import MalformedDocument, UnknownCq
from .graph import QuadStore
from .normalize import normalize_name, slugify
from .query import evaluate, parse_query

console = defaults.console

QUESTIONS: Dict[str, str] = {
    'CQ1': 'What is the recommended dosage of <drug x>?',
    'CQ2': 'Which authorised products contain <active ingredient x>?',
    'CQ3': 'Are there known interactions between <drug x> and a set of drugs?',
    'CQ4': 'Which adverse drug reactions are associated with <drug x>?',
    'CQ5': 'For which conditions or diseases is <drug x> indicated?',
    'CQ6': 'Which other drugs share the same therapeutic class as <drug x>?',
    'CQ7': 'Can <drug x> be used during pregnancy or breastfeeding?',
}


class Classification(str, Enum):
    FULLY_MET = 'FullyMet'
    PARTIALLY_MET = 'PartiallyMet'
    NOT_MET = 'NotMet'


class CqReference(BaseModel):
    '''
    Hand-checked answers for one competency question.

    ``column`` names the result variable holding the answer, the first
    projected one by default. ``optional_answers`` are acceptable but not
    required.
    '''

    cq_id: str
    params: Dict[str, str] = Field(default_factory=dict)
    column: Optional[str] = None
    required_answers: Tuple[str, ...] = ()
    optional_answers: Tuple[str, ...] = ()
    manual_count: Optional[int] = None

    model_config = ConfigDict(frozen=True, extra='forbid')

    @model_validator(mode='after')
    def check_disjoint(self) -> 'CqReference':
        both = set(self.required_answers) & set(self.optional_answers)
        if both:
            raise ValueError(f'answers both required and optional: {sorted(both)}')
        return self


class CqOutcome(BaseModel):
    cq_id: str
    question: str
    classification: Classification
    returned: List[str]
    returned_count: int
    manual_count: Optional[int] = None
    missing: List[str]
    extra: List[str]


def template_path(cq_id: str) -> str:
    return os.path.join(defaults.CQ_TEMPLATES, f'{cq_id}.rq')


def load_template(cq_id: str) -> str:
    '''
    Raises:
        UnknownCq: no bundled template of that name.
    '''
    if cq_id not in QUESTIONS or not os.path.exists(template_path(cq_id)):
        raise UnknownCq(cq_id)
    with open(template_path(cq_id), 'rt', encoding='utf-8') as f:
        return f.read()


def param_term(value: str) -> str:
    '''
    Query syntax for a parameter value. IRIs and quoted literals pass
    through; a bare name becomes the IRI of that ingredient.
    '''
    value = value.strip()
    if value.startswith('<') or value.startswith('"'):
        return value
    if re.match(r'^https?://', value):
        return f'<{value}>'
    return f'<{vocab.INGREDIENT[slugify(normalize_name(value).canonical)]}>'


def instantiate(template: str, params: Dict[str, str]) -> str:
    '''replace the ``mdx:<slot>`` tokens named in ``params``'''

    def repl(m: re.Match) -> str:
        slot = m.group(1)
        return param_term(params[slot]) if slot in params else m.group(0)

    return re.sub(r'\bmdx:([A-Za-z_][A-Za-z0-9_]*)', repl, template)


def classify(answers: Iterable[str],
             reference: CqReference) -> Tuple[Classification, List[str], List[str]]:
    '''
    FullyMet when every required answer came back and nothing outside
    required and optional did. NotMet when answers were required and none
    came back. PartiallyMet otherwise.
    '''
    returned = set(answers)
    required = set(reference.required_answers)
    allowed = required | set(reference.optional_answers)
    missing = sorted(required - returned)
    extra = sorted(returned - allowed)
    if not missing and not extra:
        return Classification.FULLY_MET, missing, extra
    if required and not (required & returned):
        return Classification.NOT_MET, missing, extra
    return Classification.PARTIALLY_MET, missing, extra


def run_cq(cq_id: str,
           params: Dict[str, str],
           store: QuadStore,
           reference: Optional[CqReference] = None,
           verbose: bool = False) -> CqOutcome:
    '''
    Instantiate one competency question, run it, and grade the answers
    against ``reference``.

    Raises:
        UnknownCq: ``cq_id`` has no template.
    '''
    reference = reference or CqReference(cq_id=cq_id, params=params)
    plan = parse_query(instantiate(load_template(cq_id), params))
    table = evaluate(plan, store)
    column = reference.column or table.header[0]
    answers: List[str] = []
    for term in table.column(column):
        if term is not None and str(term) not in answers:
            answers.append(str(term))
    classification, missing, extra = classify(answers, reference)
    if verbose:
        console.log(f'{cq_id}: {len(table.rows)} rows, '
                    f'{classification.value}')
    return CqOutcome(cq_id=cq_id,
                     question=QUESTIONS[cq_id],
                     classification=classification,
                     returned=answers,
                     returned_count=len(table.rows),
                     manual_count=reference.manual_count,
                     missing=missing,
                     extra=extra)


def load_references(path: str) -> List[CqReference]:
    '''
    Read the hand-checked answers, a JSON list of references.

    Raises:
        MalformedDocument: bad JSON, or an entry that does not validate.
    '''
    with open(path, 'rt', encoding='utf-8') as f:
        try:
            doc = json.load(f)
        except ValueError as e:
            raise MalformedDocument(path, f'invalid JSON: {e}')
    if not isinstance(doc, list):
        raise MalformedDocument(path,
                                f'expected a list, got {type(doc).__name__}')
    refs = []
    for i, x in enumerate(doc):
        try:
            refs.append(CqReference.model_validate(x))
        except ValidationError as e:
            err = e.errors()[0]
            loc = '.'.join(str(y) for y in (i, *err['loc']))
            raise MalformedDocument(path, f'{loc}: {err["msg"]}')
    return refs


def run_all(store: QuadStore,
            references: Iterable[CqReference],
            parallelism: int = 4,
            verbose: bool = False) -> List[CqOutcome]:
    '''Run every referenced question, outcomes in reference order.'''
    references = list(references)

    def worker(ref: CqReference) -> CqOutcome:
        return run_cq(ref.cq_id, ref.params, store, ref, verbose=verbose)

    with concurrent.futures.ThreadPoolExecutor(
            max_workers=max(1, parallelism)) as ex:
        return list(
            track(ex.map(worker, references),
                  total=len(references),
                  description=f'CQ[{parallelism}]:',
                  console=console,
                  transient=True,
                  disable=not verbose))


def main(argv: List[str]) -> None:
    '''
    Grade the references of a JSON file against an N-Quads graph.
    '''
    from .rdfio import read_graph
    parser = argparse.ArgumentParser()
    parser.add_argument('reference', type=str)
    parser.add_argument('graph', type=str)
    args = parser.parse_args(argv)
    store = read_graph(args.graph)
    for outcome in run_all(store, load_references(args.reference)):
        print(outcome.cq_id, outcome.classification.value,
              outcome.returned_count, sep='\t')


if __name__ == '__main__':  # pragma: no cover
    main(sys.argv[1:])
