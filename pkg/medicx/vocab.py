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
from typing import Dict, Iterator, Tuple
from rdflib import Literal, Namespace, URIRef
from rdflib.namespace import OWL, RDF, RDFS, XSD

BASE = 'http://medicX.org/'
MDX = Namespace(BASE)
GRAPH = Namespace(BASE + 'graph/')

# named graphs, one per source plus the schema
MMA_GRAPH = GRAPH['mma']
BNF_GRAPH = GRAPH['bnf']
DRUGBANK_GRAPH = GRAPH['drugbank']
PUBCHEM_GRAPH = GRAPH['pubchem']
ONTOLOGY_GRAPH = GRAPH['ontology']
GRAPHS: Dict[str, URIRef] = {
    'mma': MMA_GRAPH,
    'bnf': BNF_GRAPH,
    'drugbank': DRUGBANK_GRAPH,
    'pubchem': PUBCHEM_GRAPH,
    'ontology': ONTOLOGY_GRAPH,
}
SOURCE_GRAPHS = frozenset(g for k, g in GRAPHS.items() if k != 'ontology')

# --------------------------------------------------------------
# CLASSES: local name -> statistics label

CLASSES: Dict[str, str] = {
    'ActiveIngredient': 'Active Ingredient',
    'ATCCode': 'ATC Code',
    'AdverseDrugReaction': 'ADR',
    'Contraindication': 'Contraindication',
    'DrugDrugInteraction': 'Drug-Drug Interaction',
    'Indication': 'Indication',
    'Product': 'Product',
    'TherapeuticClass': 'Therapeutic Class',
    # declared, populated only when a source supplies the data
    'Compound': 'Compound',
    'Excipient': 'Excipient',
    'Storage': 'Storage',
    'MarketingAuthorisation': 'Marketing Authorisation',
    'MethodOfAdministration': 'Method of Administration',
}

Product = MDX['Product']
ActiveIngredient = MDX['ActiveIngredient']
Compound = MDX['Compound']
Indication = MDX['Indication']
Contraindication = MDX['Contraindication']
AdverseDrugReaction = MDX['AdverseDrugReaction']
TherapeuticClass = MDX['TherapeuticClass']
ATCCode = MDX['ATCCode']
MarketingAuthorisation = MDX['MarketingAuthorisation']
DrugDrugInteraction = MDX['DrugDrugInteraction']

# --------------------------------------------------------------
# PREDICATES

# relations between nodes. the first eight are the headline relations.
OBJECT_PROPERTIES: Tuple[str, ...] = (
    'has_active_ingredient',
    'has_active_ingredient_dosage',
    'has_atc',
    'has_contraindication',
    'has_drug_interaction',
    'has_indication',
    'has_side_effect',
    'has_therapeutic_class',
    'has_marketing_authorisation',
    'has_safety_advisory',
    'has_component',
    'has_compound',
    'mapped_to',
    'ingredient',
    'evidence_source',
)

# literal-valued attributes
DATATYPE_PROPERTIES: Tuple[str, ...] = (
    'name',
    'authorisationStatus',
    'value',
    'unit',
    'interactionType',
    'interactionSeverity',
    'severity',
    'frequency',
    'advisory_context',
    'safety_note',
    'pharmaceutical_form',
    'classification',
    'therapeutic_class_label',
    'authorisation_number',
    'authorisation_date',
    'authorisation_holder',
    'holder_address',
    'mapping_tier',
    'pubchem_cid',
    'drugbank_id',
    'synonym',
    'description',
    'mechanism',
    'note',
    'caution',
    'allergy',
    'drug_action',
    'patient_advice',
    'safety_information',
    'narrow_therapeutic_index',
    'food_interaction',
    'target',
    'enzyme',
    'transporter',
    'carrier',
)

PREDICATES: Tuple[str, ...] = OBJECT_PROPERTIES + DATATYPE_PROPERTIES

has_active_ingredient = MDX['has_active_ingredient']
has_active_ingredient_dosage = MDX['has_active_ingredient_dosage']
has_atc = MDX['has_atc']
has_contraindication = MDX['has_contraindication']
has_drug_interaction = MDX['has_drug_interaction']
has_indication = MDX['has_indication']
has_side_effect = MDX['has_side_effect']
has_therapeutic_class = MDX['has_therapeutic_class']
has_marketing_authorisation = MDX['has_marketing_authorisation']
has_safety_advisory = MDX['has_safety_advisory']
has_component = MDX['has_component']
has_compound = MDX['has_compound']
mapped_to = MDX['mapped_to']
ingredient = MDX['ingredient']
evidence_source = MDX['evidence_source']

name = MDX['name']
authorisationStatus = MDX['authorisationStatus']
value = MDX['value']
unit = MDX['unit']
interactionType = MDX['interactionType']
interactionSeverity = MDX['interactionSeverity']
severity = MDX['severity']
frequency = MDX['frequency']
advisory_context = MDX['advisory_context']
safety_note = MDX['safety_note']

# the status every cleaned product carries
AUTHORIZED = 'Authorized'

# safety advisory contexts, in emission order
ADVISORY_CONTEXTS: Tuple[str, ...] = (
    'pregnancy',
    'breastfeeding',
    'hepatic_impairment',
    'renal_impairment',
)

# --------------------------------------------------------------
# NODE IRIs

PRODUCT = Namespace(BASE + 'product/')
INGREDIENT = Namespace(BASE + 'ingredient/')
DOSAGE = Namespace(BASE + 'dosage/')
DDI = Namespace(BASE + 'ddi/')
ADR = Namespace(BASE + 'adr/')
INDICATION = Namespace(BASE + 'indication/')
CONTRAINDICATION = Namespace(BASE + 'contraindication/')
THERAPEUTIC_CLASS = Namespace(BASE + 'therapeutic-class/')
ATC = Namespace(BASE + 'atc/')
ADVISORY = Namespace(BASE + 'advisory/')
AUTHORISATION = Namespace(BASE + 'authorisation/')
COMPOUND = Namespace(BASE + 'compound/')


def class_label(iri: URIRef) -> str:
    return CLASSES.get(iri[len(BASE):], str(iri))


def predicate_label(iri: URIRef) -> str:
    if iri == RDF.type:
        return 'rdf:type'
    local = iri[len(BASE):] if iri.startswith(BASE) else str(iri)
    return local


def ontology_quads() -> Iterator[Tuple[URIRef, URIRef, object, URIRef]]:
    '''
    Schema declarations: every class and predicate, typed and labelled.
    '''
    g = ONTOLOGY_GRAPH
    for local, label in CLASSES.items():
        yield (MDX[local], RDF.type, OWL.Class, g)
        yield (MDX[local], RDFS.label, Literal(label), g)
    for local in OBJECT_PROPERTIES:
        yield (MDX[local], RDF.type, OWL.ObjectProperty, g)
        yield (MDX[local], RDFS.label, Literal(local), g)
    for local in DATATYPE_PROPERTIES:
        yield (MDX[local], RDF.type, OWL.DatatypeProperty, g)
        yield (MDX[local], RDFS.label, Literal(local), g)


def typed(lexical: str, datatype: URIRef) -> Literal:
    '''A typed literal that keeps its lexical form verbatim.'''
    return Literal(lexical, datatype=datatype, normalize=False)


def decimal_literal(x) -> Literal:
    return typed(str(x), XSD.decimal)
