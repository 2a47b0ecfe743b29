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
from typing import Dict, Iterable, Iterator, List, Optional, Set, Tuple, Union
import argparse
import functools as ft
import sys
from rdflib import BNode, Literal, URIRef
from rdflib.namespace import RDF, XSD

from . import defaults
from . import vocab
from .errors import FrozenStore, InconsistentMapping
from .normalize import SaltLexicon, default_lexicon, normalize_name, slugify
from .records import (BnfMonograph, DrugBankEntry, MmaProduct,
                      PubChemCompound)
from .resolve import MappingResult, Tier, assign_uri

console = defaults.console

Term = Union[URIRef, Literal, BNode]
Quad = Tuple[Union[URIRef, BNode], URIRef, Term, URIRef]

# order of term kinds; 0 is reserved for an unbound query variable
_KIND = {BNode: 1, URIRef: 2, Literal: 3}


@ft.lru_cache(maxsize=65536)
def term_key(t: Term) -> Tuple[int, str, str, str]:
    '''
    Total order on terms: blank nodes, then IRIs, then literals, each by
    lexical form. Literals tie-break on datatype, then language.
    '''
    if isinstance(t, Literal):
        return (3, str(t), str(t.datatype or ''), t.language or '')
    return (_KIND[type(t)], str(t), '', '')


def quad_key(q: Quad) -> Tuple:
    return tuple(term_key(t) for t in q)


def _check_iri(t: URIRef) -> None:
    if any(ch.isspace() for ch in t):
        raise ValueError(f'IRI with whitespace: {t!r}')


def _plain(t):
    # xsd:string literals are kept plain, the form the parsers produce
    if isinstance(t, Literal) and t.datatype == XSD.string:
        return Literal(str(t))
    return t


class QuadStore(object):
    '''
    A set of (subject, predicate, object, graph) quads with SPO, POS, OSP
    and per-graph indexes. Call ``freeze()`` once built; a frozen store
    rejects ``add``.
    '''

    def __init__(self, quads: Iterable[Quad] = ()):
        self._quads: Set[Quad] = set()
        self._spo: Dict[Term, Dict[Term, Set[Tuple[Term, Term]]]] = {}
        self._pos: Dict[Term, Dict[Term, Set[Tuple[Term, Term]]]] = {}
        self._osp: Dict[Term, Dict[Term, Set[Tuple[Term, Term]]]] = {}
        self._graph: Dict[Term, Set[Quad]] = {}
        self._frozen = False
        for q in quads:
            self.add(*q)

    def add(self, s: Term, p: URIRef, o: Term, g: URIRef) -> bool:
        '''
        Insert one quad. Returns False when it was already present.
        An xsd:string literal is stored as the equal plain literal.

        Raises:
            FrozenStore: after ``freeze()``.
            ValueError: for a literal subject, a non-IRI predicate or
                graph, or an IRI with whitespace.
        '''
        if self._frozen:
            raise FrozenStore()
        if not isinstance(s, (URIRef, BNode)):
            raise ValueError(f'bad subject {s!r}')
        if not isinstance(p, URIRef) or not isinstance(g, URIRef):
            raise ValueError(f'predicate and graph must be IRIs: {p!r} {g!r}')
        if not isinstance(o, (URIRef, BNode, Literal)):
            raise ValueError(f'bad object {o!r}')
        for t in (s, p, o, g):
            if isinstance(t, URIRef):
                _check_iri(t)
        o = _plain(o)
        quad = (s, p, o, g)
        if quad in self._quads:
            return False
        self._quads.add(quad)
        self._spo.setdefault(s, {}).setdefault(p, set()).add((o, g))
        self._pos.setdefault(p, {}).setdefault(o, set()).add((s, g))
        self._osp.setdefault(o, {}).setdefault(s, set()).add((p, g))
        self._graph.setdefault(g, set()).add(quad)
        return True

    def freeze(self) -> 'QuadStore':
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    def _candidates(self, s, p, o, g) -> Iterator[Quad]:
        if s is not None:
            for p2, rest in self._spo.get(s, {}).items():
                if p is None or p == p2:
                    for o2, g2 in rest:
                        yield (s, p2, o2, g2)
        elif p is not None:
            for o2, rest in self._pos.get(p, {}).items():
                if o is None or o == o2:
                    for s2, g2 in rest:
                        yield (s2, p, o2, g2)
        elif o is not None:
            for s2, rest in self._osp.get(o, {}).items():
                for p2, g2 in rest:
                    yield (s2, p2, o, g2)
        elif g is not None:
            yield from self._graph.get(g, ())
        else:
            yield from self._quads

    def match(self,
              s: Optional[Term] = None,
              p: Optional[URIRef] = None,
              o: Optional[Term] = None,
              g: Optional[URIRef] = None) -> List[Quad]:
        '''
        All quads unifying with the pattern, None being a wildcard,
        sorted by subject, predicate, object, graph.
        '''
        o = _plain(o)
        found = [
            q for q in self._candidates(s, p, o, g)
            if (p is None or q[1] == p) and (o is None or q[2] == o) and
            (g is None or q[3] == g)
        ]
        return sorted(found, key=quad_key)

    def quads(self) -> List[Quad]:
        return sorted(self._quads, key=quad_key)

    def triples(self) -> Set[Tuple[Term, URIRef, Term]]:
        '''distinct triples over the union of all graphs'''
        return {(s, p, o) for s, p, o, _ in self._quads}

    def graphs(self) -> List[URIRef]:
        return sorted(self._graph.keys(), key=term_key)

    def __len__(self) -> int:
        return len(self._quads)

    def __iter__(self) -> Iterator[Quad]:
        return iter(self.quads())

    def __contains__(self, quad: Quad) -> bool:
        s, p, o, g = quad
        return (s, p, _plain(o), g) in self._quads

    def __eq__(self, other) -> bool:
        return isinstance(other, QuadStore) and self._quads == other._quads

    def __repr__(self) -> str:
        return f'QuadStore(quads={len(self)}, graphs={len(self._graph)}, frozen={self._frozen})'


def match(store: QuadStore,
          s: Optional[Term] = None,
          p: Optional[URIRef] = None,
          o: Optional[Term] = None,
          g: Optional[URIRef] = None) -> List[Quad]:
    return store.match(s, p, o, g)


def class_counts(store: QuadStore) -> Dict[URIRef, int]:
    '''
    Distinct typed subjects per class outside the ontology graph.
    Every vocabulary class is present, with zero when unpopulated.
    '''
    typed: Dict[URIRef, Set[Term]] = {vocab.MDX[c]: set() for c in vocab.CLASSES}
    for s, _, o, g in store.match(p=RDF.type):
        if g == vocab.ONTOLOGY_GRAPH:
            continue
        typed.setdefault(o, set()).add(s)
    return {k: len(v) for k, v in typed.items()}


def predicate_counts(store: QuadStore) -> Dict[URIRef, int]:
    '''
    Quads per predicate outside the ontology graph. Every vocabulary
    predicate is present, with zero when unused.
    '''
    counts: Dict[URIRef, int] = {vocab.MDX[p]: 0 for p in vocab.PREDICATES}
    counts[RDF.type] = 0
    for s, p, o, g in store.quads():
        if g == vocab.ONTOLOGY_GRAPH:
            continue
        counts[p] = counts.get(p, 0) + 1
    return counts


# --------------------------------------------------------------
# A-Box construction


def _local(iri: URIRef, ns: str) -> str:
    return iri[len(ns):]


class _Builder(object):
    '''
    Accumulates quads for one build. Node IRIs are skolemized from
    normalized names, so equal names converge on one node.
    '''

    def __init__(self, lexicon: SaltLexicon, verbose: bool = False):
        self.lexicon = lexicon
        self.verbose = verbose
        self.store = QuadStore()
        # ingredient IRIs typed so far, and names merely mentioned
        self.declared: Set[URIRef] = set()
        self.mentioned: Dict[URIRef, str] = {}

    def emit(self, s, p, o, g) -> None:
        self.store.add(s, p, o, g)

    def slug(self, text: str) -> str:
        return slugify(normalize_name(text, self.lexicon).canonical)

    def ingredient(self, text: str) -> URIRef:
        return vocab.INGREDIENT[self.slug(text)]

    def declare_ingredient(self, text: str, g: URIRef,
                           named: bool = True) -> URIRef:
        node = self.ingredient(text)
        self.emit(node, RDF.type, vocab.ActiveIngredient, g)
        if named:
            self.emit(node, vocab.name, Literal(text), g)
        self.declared.add(node)
        return node

    def mention(self, text: str) -> URIRef:
        node = self.ingredient(text)
        self.mentioned.setdefault(node, text)
        return node

    def named_node(self, ns, cls: URIRef, text: str, g: URIRef) -> URIRef:
        node = ns[self.slug(text)]
        self.emit(node, RDF.type, cls, g)
        self.emit(node, vocab.name, Literal(text), g)
        return node

    def atc(self, code: str, g: URIRef) -> URIRef:
        node = vocab.ATC[slugify(code.strip())]
        self.emit(node, RDF.type, vocab.ATCCode, g)
        self.emit(node, vocab.name, Literal(code.strip()), g)
        return node

    # ---------------- sources

    def ontology(self) -> None:
        for q in vocab.ontology_quads():
            self.emit(*q)

    def monograph(self, m: BnfMonograph) -> None:
        g = vocab.BNF_GRAPH
        node = self.declare_ingredient(m.name, g)
        for text in m.indications:
            self.emit(node, vocab.has_indication,
                      self.named_node(vocab.INDICATION, vocab.Indication,
                                      text, g), g)
        for text in m.contraindications:
            self.emit(
                node, vocab.has_contraindication,
                self.named_node(vocab.CONTRAINDICATION, vocab.Contraindication,
                                text, g), g)
        for se in m.side_effects:
            adr = self.named_node(vocab.ADR, vocab.AdverseDrugReaction,
                                  se.name, g)
            self.emit(node, vocab.has_side_effect, adr, g)
            if se.frequency:
                self.emit(adr, vocab.frequency, Literal(se.frequency), g)
            if se.severity:
                self.emit(adr, vocab.severity, Literal(se.severity), g)
        if m.therapeutic_class:
            self.emit(
                node, vocab.has_therapeutic_class,
                self.named_node(vocab.THERAPEUTIC_CLASS, vocab.TherapeuticClass,
                                m.therapeutic_class, g), g)
        for text in m.constituents:
            self.emit(node, vocab.has_component, self.mention(text), g)
        for text in m.cautions:
            self.emit(node, vocab.MDX['caution'], Literal(text), g)
        for text in m.allergies:
            self.emit(node, vocab.MDX['allergy'], Literal(text), g)
        for field, pred in (('drug_action', 'drug_action'),
                            ('patient_advice', 'patient_advice'),
                            ('safety_info', 'safety_information')):
            if (text := getattr(m, field)):
                self.emit(node, vocab.MDX[pred], Literal(text), g)
        for context in vocab.ADVISORY_CONTEXTS:
            if not (text := getattr(m, context)):
                continue
            advisory = vocab.ADVISORY[f'{_local(node, vocab.INGREDIENT)}/{context}']
            self.emit(node, vocab.has_safety_advisory, advisory, g)
            self.emit(advisory, vocab.advisory_context, Literal(context), g)
            self.emit(advisory, vocab.safety_note, Literal(text), g)

    def drugbank_entry(self, e: DrugBankEntry) -> None:
        g = vocab.DRUGBANK_GRAPH
        node = self.declare_ingredient(e.primary_name, g)
        self.emit(node, vocab.MDX['drugbank_id'], Literal(e.drugbank_id), g)
        for text in e.synonyms:
            self.emit(node, vocab.MDX['synonym'], Literal(text), g)
        if e.description:
            self.emit(node, vocab.MDX['description'], Literal(e.description),
                      g)
        for code in e.atc_codes:
            self.emit(node, vocab.has_atc, self.atc(code, g), g)
        self.emit(node, vocab.MDX['narrow_therapeutic_index'],
                  vocab.typed('true' if e.narrow_therapeutic_index else 'false',
                              XSD.boolean), g)
        for field, pred in (('food_interactions', 'food_interaction'),
                            ('targets', 'target'), ('enzymes', 'enzyme'),
                            ('transporters', 'transporter'),
                            ('carriers', 'carrier')):
            for text in getattr(e, field):
                self.emit(node, vocab.MDX[pred], Literal(text), g)

    def compound(self, c: PubChemCompound) -> URIRef:
        g = vocab.PUBCHEM_GRAPH
        node = vocab.COMPOUND[str(c.cid)]
        self.emit(node, RDF.type, vocab.Compound, g)
        self.emit(node, vocab.name, Literal(c.name), g)
        self.emit(node, vocab.MDX['pubchem_cid'],
                  vocab.typed(str(c.cid), XSD.integer), g)
        return node

    def target(self, target: str, entity_name,
               pubchem: Dict[int, PubChemCompound], g: URIRef) -> URIRef:
        '''The ingredient node of a mapping target, typed in ``g``.'''
        node = self.declare_ingredient(entity_name(target), g, named=False)
        if target.startswith('pubchem:'):
            c = pubchem[int(target.split(':', 1)[1])]
            self.emit(node, vocab.name, Literal(c.name), vocab.PUBCHEM_GRAPH)
            self.emit(node, vocab.has_compound, vocab.COMPOUND[str(c.cid)],
                      vocab.PUBCHEM_GRAPH)
        return node

    def product(self, p: MmaProduct,
                pairs: List[Tuple[object, MappingResult, Tier]],
                whole: Optional[str],
                entity_name, pubchem: Dict[int, PubChemCompound]) -> None:
        g = vocab.MMA_GRAPH
        node = URIRef(assign_uri(p, self.lexicon))
        pslug = _local(node, vocab.PRODUCT)
        self.emit(node, RDF.type, vocab.Product, g)
        self.emit(node, vocab.name, Literal(p.medicine_name), g)
        self.emit(node, vocab.authorisationStatus, Literal(vocab.AUTHORIZED),
                  g)
        self.emit(node, vocab.MDX['pharmaceutical_form'],
                  Literal(p.pharmaceutical_form), g)
        self.emit(node, vocab.MDX['classification'],
                  Literal(p.classification.value), g)
        if p.therapeutic_class:
            self.emit(node, vocab.MDX['therapeutic_class_label'],
                      Literal(p.therapeutic_class), g)
        if p.atc_code:
            self.emit(node, vocab.has_atc, self.atc(p.atc_code, g), g)
        auth = vocab.AUTHORISATION[slugify(p.authorisation_number)]
        self.emit(node, vocab.has_marketing_authorisation, auth, g)
        self.emit(auth, RDF.type, vocab.MarketingAuthorisation, g)
        self.emit(auth, vocab.MDX['authorisation_number'],
                  Literal(p.authorisation_number), g)
        self.emit(auth, vocab.MDX['authorisation_date'],
                  vocab.typed(p.authorisation_date.isoformat(), XSD.date), g)
        self.emit(auth, vocab.MDX['authorisation_holder'],
                  Literal(p.authorisation_holder), g)
        self.emit(auth, vocab.MDX['holder_address'], Literal(p.holder_address),
                  g)

        if whole is not None:
            self.emit(node, vocab.mapped_to,
                      self.target(whole, entity_name, pubchem, g), g)
        for pos, (ing, result, tier) in enumerate(pairs, start=1):
            if result.target is None:
                ing_node = self.declare_ingredient(ing.name, g)
            else:
                ing_node = self.target(result.target, entity_name, pubchem, g)
            # one node per registry ingredient, even when two share a target
            dosage = vocab.DOSAGE[f'{pslug}/{pos}-{self.slug(ing.name)}']
            self.emit(node, vocab.has_active_ingredient, ing_node, g)
            self.emit(node, vocab.has_active_ingredient_dosage, dosage, g)
            self.emit(dosage, vocab.value, vocab.decimal_literal(ing.dosage_value),
                      g)
            self.emit(dosage, vocab.unit, Literal(ing.dosage_unit), g)
            self.emit(dosage, vocab.ingredient, ing_node, g)
            self.emit(dosage, vocab.name, Literal(ing.name), g)
            self.emit(dosage, vocab.MDX['mapping_tier'], Literal(tier.value), g)

    def interactions(self, bnf: List[BnfMonograph],
                     db: List[DrugBankEntry]) -> int:
        '''
        One reified node per unordered pair. Formulary statements are
        collected first and win over DrugBank ones.
        '''
        pairs: Dict[Tuple[URIRef, URIRef], Dict[str, object]] = {}
        for m in bnf:
            a = self.ingredient(m.name)
            for x in m.interactions:
                b = self.mention(x.partner_name)
                if a == b:
                    continue
                pair = tuple(sorted((a, b), key=str))
                pairs.setdefault(
                    pair, {
                        'graph': vocab.BNF_GRAPH,
                        'interactionType': x.interaction_type,
                        'interactionSeverity': x.severity,
                        'note': x.note,
                    })
        names = {e.drugbank_id: e.primary_name for e in db}
        for e in db:
            a = self.ingredient(e.primary_name)
            for x in e.ddis:
                b = self.ingredient(names[x.partner_drugbank_id])
                if a == b:
                    continue
                pair = tuple(sorted((a, b), key=str))
                pairs.setdefault(
                    pair, {
                        'graph': vocab.DRUGBANK_GRAPH,
                        'interactionType': x.mechanism or 'drug-drug interaction',
                        'interactionSeverity': x.severity,
                        'mechanism': x.mechanism,
                        'description': x.description,
                    })
        for (a, b), attrs in pairs.items():
            g = attrs.pop('graph')
            node = vocab.DDI[
                f'{_local(a, vocab.INGREDIENT)}/{_local(b, vocab.INGREDIENT)}']
            self.emit(node, RDF.type, vocab.DrugDrugInteraction, g)
            self.emit(a, vocab.has_drug_interaction, node, g)
            self.emit(b, vocab.has_drug_interaction, node, g)
            self.emit(node, vocab.evidence_source, g, g)
            for pred, text in attrs.items():
                if text:
                    self.emit(node, vocab.MDX[pred], Literal(text), g)
        return len(pairs)

    def mentions(self) -> None:
        for node, text in sorted(self.mentioned.items()):
            if node not in self.declared:
                self.declare_ingredient(text, vocab.BNF_GRAPH)


def _pair_ingredients(p: MmaProduct, results: List[MappingResult]):
    '''
    Line the mapping results up with the product's ingredients, yielding
    (ingredient, result giving its identity, tier recorded on the dosage),
    plus the target of a product-level result that no single ingredient
    stands for (a combined monograph, or a brand matched by full name).
    '''
    ings = list(p.active_ingredients)
    if len(results) == 1 and results[0].subject.ingredient is None:
        top = results[0]
        if top.tier == Tier.FULL_PRODUCT_NAME_ONLY and len(ings) == 1:
            return [(ings[0], top, top.tier)], None
        parts = list(top.components)
        if len(parts) != len(ings):
            raise InconsistentMapping(
                f'{p.authorisation_number}: {len(parts)} component results '
                f'for {len(ings)} ingredients')
        return [(i, r, top.tier) for i, r in zip(ings, parts)], top.target
    if [r.subject.ingredient for r in results] != [i.name for i in ings]:
        raise InconsistentMapping(
            f'{p.authorisation_number}: mapping results do not cover the '
            'active ingredients')
    return [(i, r, r.tier) for i, r in zip(ings, results)], None


def build_graph(mma: Iterable[MmaProduct],
                bnf: Iterable[BnfMonograph],
                db: Iterable[DrugBankEntry],
                pc: Iterable[PubChemCompound],
                mappings: Iterable[MappingResult],
                lexicon: Optional[SaltLexicon] = None,
                verbose: bool = False) -> QuadStore:
    '''
    Assemble the knowledge graph from the cleaned sources and the
    mapping results.

    Every assertion lands in the named graph of the source it came from;
    the schema goes to the ontology graph. The returned store is frozen.

    Raises:
        InconsistentMapping: a mapping names an unknown product or target,
            or a product has no mapping.
    '''
    lexicon = lexicon or default_lexicon()
    mma = list(mma)
    bnf = sorted(bnf, key=lambda m: m.monograph_id)
    db = sorted(db, key=lambda e: e.drugbank_id)
    pc = sorted(pc, key=lambda c: c.cid)
    targets = {f'bnf:{m.monograph_id}': m.name for m in bnf}
    targets.update({f'drugbank:{e.drugbank_id}': e.primary_name for e in db})
    targets.update({f'pubchem:{c.cid}': c.name for c in pc})
    pubchem = {c.cid: c for c in pc}

    def entity_name(target: str) -> str:
        if target not in targets:
            raise InconsistentMapping(f'unknown mapping target {target}')
        return targets[target]

    by_product: Dict[str, List[MappingResult]] = {}
    for r in mappings:
        by_product.setdefault(r.subject.authorisation_number, []).append(r)
    known = {p.authorisation_number for p in mma}
    for number in by_product:
        if number not in known:
            raise InconsistentMapping(f'mapping for unknown product {number}')

    b = _Builder(lexicon, verbose)
    b.ontology()
    for m in bnf:
        b.monograph(m)
    for e in db:
        b.drugbank_entry(e)
    for c in pc:
        b.compound(c)
    for p in mma:
        if p.authorisation_number not in by_product:
            raise InconsistentMapping(
                f'no mapping for product {p.authorisation_number}')
        pairs, whole = _pair_ingredients(p, by_product[p.authorisation_number])
        b.product(p, pairs, whole, entity_name, pubchem)
    n_ddi = b.interactions(bnf, db)
    b.mentions()
    if verbose:
        console.log(f'graph: {len(b.store)} quads, {len(mma)} products, '
                    f'{n_ddi} interactions')
    return b.store.freeze()


def main(argv: List[str]) -> None:
    '''
    Build the graph of a data directory and print the statistics.
    '''
    from .ingest import load_sources
    from .resolve import build_indexes, resolve_all
    parser = argparse.ArgumentParser()
    parser.add_argument('data_dir', type=str, nargs='?', default='fixtures')
    args = parser.parse_args(argv)
    bundle = load_sources(args.data_dir)
    idx = build_indexes(bundle.bnf, bundle.drugbank, bundle.pubchem)
    store = build_graph(bundle.mma, bundle.bnf, bundle.drugbank,
                        bundle.pubchem, resolve_all(bundle.mma, idx),
                        verbose=True)
    for k, v in class_counts(store).items():
        print(vocab.class_label(k), v, sep='\t')
    for k, v in predicate_counts(store).items():
        print(vocab.predicate_label(k), v, sep='\t')


if __name__ == '__main__':  # pragma: no cover
    main(sys.argv[1:])
