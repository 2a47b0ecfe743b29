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
import pytest
from rdflib import BNode, Literal, URIRef
from rdflib.namespace import OWL, RDF, RDFS, XSD

from medicx import graph
from medicx import resolve
from medicx import vocab
from medicx.errors import FrozenStore, InconsistentMapping
from medicx.records import BnfMonograph, DrugBankEntry, MmaProduct


def _iri(x: str) -> URIRef:
    return URIRef(f'http://example.org/{x}')


G = vocab.MMA_GRAPH


def test_store_add_and_match():
    s = graph.QuadStore()
    assert s.add(_iri('b'), _iri('p'), Literal('x'), G)
    assert s.add(_iri('a'), _iri('p'), _iri('c'), G)
    assert not s.add(_iri('a'), _iri('p'), _iri('c'), G)
    assert len(s) == 2
    assert [q[0] for q in s.match(p=_iri('p'))] == [_iri('a'), _iri('b')]
    assert s.match(s=_iri('a'), o=Literal('x')) == []
    assert s.match(o=_iri('c')) == [(_iri('a'), _iri('p'), _iri('c'), G)]
    assert graph.match(s, g=G) == s.quads()
    assert (_iri('a'), _iri('p'), _iri('c'), G) in s


def test_store_term_order():
    # blank nodes, then IRIs, then literals
    s = graph.QuadStore()
    for o in (Literal('a'), _iri('z'), BNode('b0')):
        s.add(_iri('s'), _iri('p'), o, G)
    kinds = [type(q[2]) for q in s.quads()]
    assert kinds == [BNode, URIRef, Literal]


@pytest.mark.parametrize('quad', [
    (Literal('x'), _iri('p'), _iri('o'), G),
    (_iri('s'), Literal('p'), _iri('o'), G),
    (_iri('s'), _iri('p'), _iri('o'), Literal('g')),
    (URIRef('http://example.org/a b'), _iri('p'), _iri('o'), G),
])
def test_store_rejects(quad):
    with pytest.raises(ValueError):
        graph.QuadStore().add(*quad)


def test_store_frozen():
    s = graph.QuadStore([(_iri('s'), _iri('p'), _iri('o'), G)]).freeze()
    assert s.frozen
    with pytest.raises(FrozenStore):
        s.add(_iri('s'), _iri('p'), _iri('x'), G)
    assert len(s) == 1


def test_store_equality():
    q = (_iri('s'), _iri('p'), _iri('o'), G)
    assert graph.QuadStore([q]) == graph.QuadStore([q, q])
    assert graph.QuadStore([q]) != graph.QuadStore()


def test_build_is_frozen(store):
    assert store.frozen
    with pytest.raises(FrozenStore):
        store.add(_iri('s'), _iri('p'), _iri('o'), G)


def test_build_graphs_and_terms(store):
    assert set(store.graphs()) <= set(vocab.GRAPHS.values())
    assert vocab.MMA_GRAPH in store.graphs()
    for s, p, o, g in store.quads():
        assert not isinstance(s, BNode)
        assert not isinstance(o, BNode)
        assert str(p).startswith(vocab.BASE) or p in (RDF.type,
                                                      RDFS.label)


def test_build_products(store):
    counts = graph.class_counts(store)
    assert counts[vocab.Product] == 35
    for s, _, _, g in store.match(p=RDF.type, o=vocab.Product):
        assert g == vocab.MMA_GRAPH
        assert store.match(s=s, p=vocab.has_active_ingredient)
        assert store.match(s=s, p=vocab.authorisationStatus,
                           o=Literal(vocab.AUTHORIZED))


def test_build_dosages(store):
    preds = graph.predicate_counts(store)
    assert preds[vocab.has_active_ingredient] == 40
    assert preds[vocab.has_active_ingredient_dosage] == 40
    for _, _, dosage, _ in store.match(p=vocab.has_active_ingredient_dosage):
        assert len(store.match(s=dosage, p=vocab.value)) == 1
        assert len(store.match(s=dosage, p=vocab.unit)) == 1
        assert len(store.match(s=dosage, p=vocab.ingredient)) == 1


def test_build_dosage_literal(store):
    amox = vocab.INGREDIENT['amoxicillin']
    dosages = [q[0] for q in store.match(p=vocab.ingredient, o=amox)]
    assert dosages
    for d in dosages:
        (value,) = [q[2] for q in store.match(s=d, p=vocab.value)]
        assert value.datatype == XSD.decimal


def test_build_interactions(store):
    counts = graph.class_counts(store)
    preds = graph.predicate_counts(store)
    assert counts[vocab.DrugDrugInteraction] == 6
    assert preds[vocab.has_drug_interaction] == 12
    for s, _, _, _ in store.match(p=RDF.type, o=vocab.DrugDrugInteraction):
        members = {q[0] for q in store.match(p=vocab.has_drug_interaction, o=s)}
        assert len(members) == 2


def test_build_formulary_interaction_wins(store):
    node = vocab.DDI['ibuprofen/warfarin']
    (src,) = [q[2] for q in store.match(s=node, p=vocab.evidence_source)]
    assert src == vocab.BNF_GRAPH
    assert store.match(s=node, p=vocab.interactionSeverity,
                       o=Literal('severe'))
    lorazepam = vocab.DDI['lorazepam/warfarin']
    assert store.match(s=lorazepam, p=vocab.evidence_source,
                       o=vocab.DRUGBANK_GRAPH)


def test_build_nodes_converge(store):
    warfarin = vocab.INGREDIENT['warfarin']
    graphs = {q[3] for q in store.match(s=warfarin, p=RDF.type)}
    assert graphs == {vocab.BNF_GRAPH, vocab.DRUGBANK_GRAPH, vocab.MMA_GRAPH}


def test_build_mentioned_ingredient(store):
    # named only as an interaction partner
    node = vocab.INGREDIENT['methotrexate']
    assert store.match(s=node, p=RDF.type, o=vocab.ActiveIngredient)
    assert store.match(s=node, p=vocab.name, o=Literal('Methotrexate'))


def test_build_advisories(store):
    valproate = vocab.INGREDIENT['sodium-valproate']
    contexts = set()
    for _, _, adv, _ in store.match(s=valproate, p=vocab.has_safety_advisory):
        contexts |= {str(q[2]) for q in store.match(s=adv,
                                                    p=vocab.advisory_context)}
    assert contexts == {'pregnancy', 'hepatic_impairment'}


def test_build_pubchem(store):
    node = vocab.INGREDIENT['ivermectin']
    assert store.match(s=node, p=vocab.has_compound,
                       o=vocab.COMPOUND['6321424'], g=vocab.PUBCHEM_GRAPH)
    assert store.match(s=vocab.COMPOUND['6321424'], p=RDF.type,
                       o=vocab.Compound)


def test_build_ontology(store):
    for local in vocab.CLASSES:
        assert (vocab.MDX[local], RDF.type, OWL.Class,
                vocab.ONTOLOGY_GRAPH) in store
    # the schema graph is excluded from the counts
    counts = graph.class_counts(store)
    assert counts[vocab.MDX['Excipient']] == 0
    assert set(vocab.MDX[c] for c in vocab.CLASSES) <= set(counts)


def test_predicate_counts_zeros(store):
    preds = graph.predicate_counts(store)
    assert set(vocab.MDX[p] for p in vocab.PREDICATES) <= set(preds)
    assert all(v >= 0 for v in preds.values())
    assert preds[RDF.type] > 0


def test_build_deterministic(bundle, mappings, store):
    again = graph.build_graph(reversed(bundle.mma), reversed(bundle.bnf),
                              reversed(bundle.drugbank),
                              reversed(bundle.pubchem), mappings)
    assert again == store
    assert again.quads() == store.quads()


def test_build_unknown_product(bundle, mappings):
    with pytest.raises(InconsistentMapping, match='unknown product'):
        graph.build_graph(bundle.mma[1:], bundle.bnf, bundle.drugbank,
                          bundle.pubchem, mappings)


def test_build_missing_mapping(bundle, mappings):
    first = bundle.mma[0].authorisation_number
    rest = [r for r in mappings if r.subject.authorisation_number != first]
    with pytest.raises(InconsistentMapping, match='no mapping'):
        graph.build_graph(bundle.mma, bundle.bnf, bundle.drugbank,
                          bundle.pubchem, rest)


def test_build_unknown_target(bundle, mappings):
    with pytest.raises(InconsistentMapping, match='unknown mapping target'):
        graph.build_graph(bundle.mma, bundle.bnf, [], bundle.pubchem,
                          mappings)


def test_empty_build():
    store = graph.build_graph([], [], [], [], [])
    assert store.graphs() == [vocab.ONTOLOGY_GRAPH]
    assert graph.class_counts(store)[vocab.Product] == 0


def test_main(capsys, fixtures_dir):
    graph.main([fixtures_dir])
    out = capsys.readouterr().out
    assert 'Product\t35' in out
    assert 'has_drug_interaction\t12' in out


def _product_node(store, name: str) -> URIRef:
    (node,) = [q[0] for q in store.match(p=vocab.name, o=Literal(name),
                                         g=vocab.MMA_GRAPH)
               if (q[0], RDF.type, vocab.Product, vocab.MMA_GRAPH) in store]
    return node


@pytest.mark.parametrize('name', ('Augmentin 500mg/125mg tablets',
                                  'Augmentin-Duo 400mg/57mg/5ml powder for '
                                  'oral suspension'))
def test_build_combined_target_reachable(store, name):
    node = _product_node(store, name)
    combined = vocab.INGREDIENT['co-amoxiclav']
    assert store.match(s=node, p=vocab.mapped_to) == [
        (node, vocab.mapped_to, combined, vocab.MMA_GRAPH)
    ]
    # the combined monograph's own statements hang off the target
    assert store.match(s=combined, p=vocab.has_indication)
    assert store.match(s=combined, p=vocab.has_side_effect)
    # the components stay the active ingredients
    parts = {q[2] for q in store.match(s=node, p=vocab.has_active_ingredient)}
    assert combined not in parts
    assert len(parts) == 2


def test_build_mapped_to_only_for_product_level(store):
    preds = graph.predicate_counts(store)
    assert preds[vocab.mapped_to] == 2
    # a single-ingredient brand match is its ingredient edge already
    plavix = _product_node(store, 'Plavix 75mg film-coated tablets')
    assert store.match(s=plavix, p=vocab.mapped_to) == []
    assert store.match(s=plavix, p=vocab.has_active_ingredient,
                       o=vocab.INGREDIENT['clopidogrel'])


def test_build_dosage_per_registry_ingredient():
    mono = BnfMonograph.model_validate({'name': 'Esomeprazole'})
    product = MmaProduct.model_validate({
        'medicine_name': 'Esomax duo',
        'active_ingredients': [
            {'name': 'Esomeprazole', 'dosage_value': 20, 'dosage_unit': 'mg'},
            {'name': 'Esomeprazole Magnesium', 'dosage_value': 40,
             'dosage_unit': 'mg'},
        ],
        'pharmaceutical_form': 'tablet',
        'classification': 'pom',
        'status': 'authorised',
        'authorisation_number': 'MA900/00001',
        'authorisation_date': '2020-01-01',
        'authorisation_holder': 'Holder',
        'holder_address': 'Address',
    })
    entry = DrugBankEntry.model_validate({
        'drugbank_id': 'DB00736',
        'primary_name': 'Esomeprazole',
        'salts': [{'salt_name': 'Esomeprazole magnesium'}],
    })
    idx = resolve.build_indexes([mono], [entry], [])
    mappings = resolve.resolve_all([product], idx)
    assert {r.target for r in mappings} == {'bnf:esomeprazole'}
    store = graph.build_graph([product], [mono], [entry], [], mappings)

    ing = vocab.INGREDIENT['esomeprazole']
    node = URIRef(resolve.assign_uri(product))
    assert [q[2] for q in store.match(s=node, p=vocab.has_active_ingredient)
            ] == [ing]
    dosages = [q[2] for q in store.match(s=node,
                                         p=vocab.has_active_ingredient_dosage)]
    assert len(dosages) == 2
    seen = set()
    for d in dosages:
        (value,) = [q[2] for q in store.match(s=d, p=vocab.value)]
        (label,) = [q[2] for q in store.match(s=d, p=vocab.name)]
        assert store.match(s=d, p=vocab.ingredient) == [
            (d, vocab.ingredient, ing, vocab.MMA_GRAPH)
        ]
        seen.add((str(label), str(value)))
    assert seen == {('Esomeprazole', '20'), ('Esomeprazole Magnesium', '40')}
