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
import json

import pytest

from medicx import cq
from medicx import graph
from medicx import report
from medicx import resolve
from medicx import vocab
from medicx.cq import Classification, CqOutcome


@pytest.fixture(scope='module')
def mapping(mappings, index):
    return resolve.mapping_report(mappings, index)


def test_strategy_counts(mapping):
    assert report.strategy_counts(mapping) == {
        'direct': 18,
        'synonym-salt': 9,
        'decomposition': 5,
        'full-name': 1,
        'chemical-fallback': 3,
        'unmatched': 2,
    }
    assert sum(report.strategy_counts(mapping).values()) == mapping.total


def test_source_tables(mapping):
    tables = report.source_tables(mapping)
    assert [n for _, n in tables['bnf']] == [18, 12, 2, 1, 6, 6]
    assert [n for _, n in tables['drugbank']] == [3, 5, 3, 1]
    assert [n for _, n in tables['pubchem']] == [3, 2]
    assert tables['pubchem'][1][0] == \
        'No match in PubChem (exhausted all mapping tiers)'


def test_source_tables_empty():
    tables = report.source_tables(resolve.mapping_report([]))
    assert all(n == 0 for rows in tables.values() for _, n in rows)


def test_render_mapping_report(mapping):
    text, doc = report.render_mapping_report(mapping)
    assert 'Mapping tiers' in text
    assert 'BnfViaSynonymSalt' in text
    assert 'Direct match to BNF entry' in text
    assert '38 subjects, 0 ambiguous keys' in text
    # plain text, no terminal escapes
    assert '\x1b[' not in text
    parsed = json.loads(doc)
    assert parsed['total'] == 38
    assert parsed['strategies']['direct'] == 18
    assert parsed['sources']['drugbank'][0]['count'] == 3
    assert parsed['tier_counts']['Unmatched'] == 2


def test_kg_stats(store):
    doc = report.kg_stats(store)
    entities = {r.label: r.count for r in doc.entities}
    relations = {r.label: r.count for r in doc.relations}
    assert len(doc.entities) == len(vocab.CLASSES)
    assert len(doc.relations) == len(vocab.PREDICATES)
    assert entities['Product'] == 35
    assert entities['Drug-Drug Interaction'] == 6
    assert entities['Excipient'] == 0
    assert relations['has_active_ingredient'] == 40
    assert relations['has_drug_interaction'] == 12
    assert doc.total_quads == len(store)
    assert sum(doc.graphs.values()) == len(store)
    assert doc.graphs['mma'] > 0


def test_kg_stats_empty():
    doc = report.kg_stats(graph.build_graph([], [], [], [], []))
    assert all(r.count == 0 for r in doc.entities + doc.relations)
    assert doc.graphs['ontology'] == doc.total_quads


def test_render_stats(store):
    text = report.render_stats(report.kg_stats(store))
    assert 'Entity statistics' in text
    assert 'Relation statistics' in text
    assert f'{len(store)} quads' in text
    line = next(x for x in text.splitlines() if '| Product ' in x)
    assert line.split('|')[2].strip() == '35'


def _outcome(cq_id, classification, manual=None):
    return CqOutcome(cq_id=cq_id,
                     question=cq.QUESTIONS[cq_id],
                     classification=classification,
                     returned=['x'],
                     returned_count=1,
                     manual_count=manual,
                     missing=[],
                     extra=[])


def test_render_outcomes():
    outcomes = [
        _outcome('CQ1', Classification.NOT_MET, 5),
        _outcome('CQ5', Classification.PARTIALLY_MET),
    ]
    text = report.render_outcomes(outcomes)
    assert 'Competency questions' in text
    assert 'NotMet' in text and 'PartiallyMet' in text
    doc = json.loads(report.outcomes_document(outcomes))
    assert [d['cq_id'] for d in doc] == ['CQ1', 'CQ5']
    assert doc[1]['manual_count'] is None
