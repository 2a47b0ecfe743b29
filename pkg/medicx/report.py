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
from typing import Dict, Iterable, List, Optional, Tuple
import io
import json
import sys
from pydantic import BaseModel
from rich import box
from rich.console import Console
from rich.table import Table

from . import defaults
from . import vocab
from .cq import CqOutcome
from .graph import QuadStore, class_counts, predicate_counts
from .resolve import MappingReport, Tier

console = defaults.console

# mapping tiers aggregated by reconciliation strategy
STRATEGIES: Dict[str, Tuple[Tier, ...]] = {
    'direct': (Tier.BNF_DIRECT, ),
    'synonym-salt': (Tier.BNF_VIA_SYNONYM_SALT, Tier.DRUGBANK_DIRECT),
    'decomposition': (Tier.BNF_VIA_COMPONENTS, Tier.DRUGBANK_COMPONENT),
    'full-name': (Tier.FULL_PRODUCT_NAME_ONLY, ),
    'chemical-fallback': (Tier.PUBCHEM_DIRECT, ),
    'unmatched': (Tier.UNMATCHED, ),
}


class StatRow(BaseModel):
    label: str
    iri: str
    count: int


class StatsDocument(BaseModel):
    '''Entity and relation statistics of a built graph.'''
    total_quads: int
    graphs: Dict[str, int]
    entities: List[StatRow]
    relations: List[StatRow]


def kg_stats(store: QuadStore) -> StatsDocument:
    '''
    One row per vocabulary class and per vocabulary predicate, zeros
    included, counted outside the ontology graph.
    '''
    classes = class_counts(store)
    predicates = predicate_counts(store)
    graphs = {}
    for name, g in vocab.GRAPHS.items():
        graphs[name] = len(store.match(g=g))
    entities = [
        StatRow(label=vocab.class_label(vocab.MDX[c]),
                iri=str(vocab.MDX[c]),
                count=classes[vocab.MDX[c]]) for c in vocab.CLASSES
    ]
    relations = [
        StatRow(label=p, iri=str(vocab.MDX[p]), count=predicates[vocab.MDX[p]])
        for p in vocab.PREDICATES
    ]
    return StatsDocument(total_quads=len(store),
                         graphs=graphs,
                         entities=entities,
                         relations=relations)


def _capture(*renderables) -> str:
    '''render to plain text, independent of the terminal'''
    buf = io.StringIO()
    out = Console(file=buf, width=100, color_system=None, highlight=False)
    for r in renderables:
        out.print(r)
    return buf.getvalue()


def _table(title: str, header: Tuple[str, str], rows: Iterable[Tuple[str, int]],
           footer: Optional[str] = None) -> Table:
    table = Table(title=title, box=box.ASCII, title_justify='left',
                  show_footer=footer is not None)
    rows = list(rows)
    table.add_column(header[0], footer=footer or '')
    table.add_column(header[1],
                     justify='right',
                     footer=str(sum(n for _, n in rows)) if footer else '')
    for label, n in rows:
        table.add_row(label, str(n))
    return table


def render_stats(doc: StatsDocument) -> str:
    return _capture(
        _table('Entity statistics', ('Entity Class', 'Instances'),
               ((r.label, r.count) for r in doc.entities)),
        _table('Relation statistics', ('Relation Type', 'Instances'),
               ((r.label, r.count) for r in doc.relations)),
        f'{doc.total_quads} quads')


def strategy_counts(r: MappingReport) -> Dict[str, int]:
    return {
        name: sum(r.tier_counts.get(t.value, 0) for t in tiers)
        for name, tiers in STRATEGIES.items()
    }


def source_tables(r: MappingReport) -> Dict[str, List[Tuple[str, int]]]:
    '''Outcome rows per reference source.'''
    t = r.tier_counts
    bnf_hits = sum(t[x.value] for x in (Tier.BNF_DIRECT,
                                        Tier.BNF_VIA_COMPONENTS,
                                        Tier.BNF_VIA_SYNONYM_SALT))
    return {
        'bnf': [
            ('Direct match to BNF entry', t[Tier.BNF_DIRECT.value]),
            ('No match to BNF (even after normalisation)',
             r.total - bnf_hits),
            ('Mapped via component decomposition',
             t[Tier.BNF_VIA_COMPONENTS.value]),
            ('Component-level mapping failed', r.failed_combinations),
            ('Mapped via synonym/salt (from DrugBank) to BNF',
             t[Tier.BNF_VIA_SYNONYM_SALT.value]),
            ('Synonym-based mapping failed (BNF entry still missing)',
             t[Tier.DRUGBANK_DIRECT.value] + t[Tier.DRUGBANK_COMPONENT.value]),
        ],
        'drugbank': [
            ('Mapped via direct match, synonym, or salt normalisation',
             t[Tier.DRUGBANK_DIRECT.value]),
            ('No match to DrugBank (after synonym/salt attempt)',
             t[Tier.PUBCHEM_DIRECT.value] + t[Tier.UNMATCHED.value]),
            ('Component-level mapping to DrugBank',
             t[Tier.DRUGBANK_COMPONENT.value]),
            ('Mapped via full product name only',
             t[Tier.FULL_PRODUCT_NAME_ONLY.value]),
        ],
        'pubchem': [
            ('Direct match to PubChem compound', t[Tier.PUBCHEM_DIRECT.value]),
            ('No match in PubChem (exhausted all mapping tiers)',
             t[Tier.UNMATCHED.value]),
        ],
    }


def mapping_document(r: MappingReport) -> dict:
    doc = r.model_dump(mode='json')
    doc['strategies'] = strategy_counts(r)
    doc['sources'] = {
        k: [{'outcome': label, 'count': n} for label, n in rows]
        for k, rows in source_tables(r).items()
    }
    return doc


def render_mapping_report(r: MappingReport) -> Tuple[str, str]:
    '''
    Returns:
        Tuple[str, str]: the aligned text rendering and the JSON document.
    '''
    tables = source_tables(r)
    text = _capture(
        _table('Mapping tiers', ('Tier', 'Subjects'),
               r.tier_counts.items(), footer='Total'),
        _table('Mapping strategies', ('Strategy', 'Subjects'),
               strategy_counts(r).items(), footer='Total'),
        _table('BNF mapping outcomes', ('Mapping Outcome', 'Count'),
               tables['bnf']),
        _table('DrugBank mapping outcomes', ('Mapping Outcome', 'Count'),
               tables['drugbank']),
        _table('PubChem mapping outcomes', ('Mapping Outcome', 'Count'),
               tables['pubchem']),
        f'{r.total} subjects, {len(r.ambiguities)} ambiguous keys',
    )
    return text, json.dumps(mapping_document(r), indent=2, ensure_ascii=False)


def render_outcomes(outcomes: Iterable[CqOutcome]) -> str:
    '''the competency question evaluation, one row per question'''
    table = Table(title='Competency questions', box=box.ASCII,
                  title_justify='left')
    for col in ('CQ', 'Question', 'Manual', 'Returned', 'Outcome'):
        table.add_column(col, justify='right' if col in ('Manual', 'Returned')
                         else 'left')
    for o in outcomes:
        table.add_row(o.cq_id, o.question,
                      '-' if o.manual_count is None else str(o.manual_count),
                      str(o.returned_count), o.classification.value)
    return _capture(table)


def outcomes_document(outcomes: Iterable[CqOutcome]) -> str:
    return json.dumps([o.model_dump(mode='json') for o in outcomes],
                      indent=2,
                      ensure_ascii=False)


if __name__ == '__main__':  # pragma: no cover
    from .rdfio import read_graph
    print(render_stats(kg_stats(read_graph(sys.argv[1]))))
