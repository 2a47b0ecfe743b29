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
import functools as ft
import json
import sys
from enum import Enum
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, ValidationError, model_validator
from rich.progress import track

from . import defaults
from . import vocab
from .errors import DanglingDdiPartner, EmptyInput, MalformedDocument
from .normalize import (SaltLexicon, default_lexicon,
                        normalize_name, strip_descriptors, strip_salt)
from .records import (ActiveIngredientDosage, BnfMonograph, DrugBankEntry,
                      MmaProduct, PubChemCompound)

console = defaults.console

# -------------------------
# Enums
# -------------------------


class Stage(str, Enum):
    '''Pipeline stages, in the order they run.'''

    COMBINED_MONOGRAPH = 'combined_monograph'
    BNF_DIRECT = 'bnf_direct'
    DRUGBANK_SYNONYM_SALT = 'drugbank_synonym_salt'
    BNF_VIA_DRUGBANK = 'bnf_via_drugbank'
    PUBCHEM_DIRECT = 'pubchem_direct'
    FULL_PRODUCT_NAME = 'full_product_name'


STAGE_ORDER: Dict[Stage, int] = {s: i for i, s in enumerate(Stage)}


class Tier(str, Enum):
    BNF_DIRECT = 'BnfDirect'
    BNF_VIA_COMPONENTS = 'BnfViaComponents'
    BNF_VIA_SYNONYM_SALT = 'BnfViaSynonymSalt'
    DRUGBANK_DIRECT = 'DrugBankDirectOrSynonymSalt'
    DRUGBANK_COMPONENT = 'DrugBankComponent'
    FULL_PRODUCT_NAME_ONLY = 'FullProductNameOnly'
    PUBCHEM_DIRECT = 'PubChemDirect'
    UNMATCHED = 'Unmatched'


BNF_TIERS = frozenset(
    {Tier.BNF_DIRECT, Tier.BNF_VIA_COMPONENTS, Tier.BNF_VIA_SYNONYM_SALT})


class Outcome(str, Enum):
    HIT = 'hit'
    MISS = 'miss'
    SKIPPED = 'skipped'


# flag set on every component of a product whose components only
# partly reach the formulary
PARTIAL_COMPONENTS = 'partial-components'

# -------------------------
# Models
# -------------------------


class TrailEntry(BaseModel):
    '''One lookup attempt, kept for audit.'''

    stage: Stage
    source: str  # 'bnf', 'drugbank' or 'pubchem'
    key: str
    outcome: Outcome
    candidate: Optional[str] = None
    ambiguous: bool = False

    model_config = ConfigDict(frozen=True, extra='forbid')


class Subject(BaseModel):
    authorisation_number: Optional[str] = None
    ingredient: Optional[str] = None

    model_config = ConfigDict(frozen=True, extra='forbid')


class MappingResult(BaseModel):
    '''
    The resolution of one subject: an ingredient of a product, or a whole
    product when it was matched as one (combined monograph, full name).

    ``target`` is ``bnf:<monograph id>``, ``drugbank:<id>`` or
    ``pubchem:<cid>``. Product-level results carry the per-ingredient
    results in ``components``; those are not counted in reports.
    '''

    subject: Subject
    tier: Tier
    target: Optional[str] = None
    trail: Tuple[TrailEntry, ...]
    component: bool = False
    components: Tuple[MappingResult, ...] = ()
    flags: Tuple[str, ...] = ()

    model_config = ConfigDict(frozen=True, extra='forbid')

    @model_validator(mode='after')
    def check_invariants(self) -> 'MappingResult':
        if (self.tier == Tier.UNMATCHED) != (self.target is None):
            raise ValueError(f'tier {self.tier.value} with target {self.target!r}')
        if not self.trail:
            raise ValueError('empty trail')
        order = [STAGE_ORDER[x.stage] for x in self.trail]
        if order != sorted(order):
            raise ValueError('trail stages out of order')
        return self

    @property
    def target_source(self) -> Optional[str]:
        return None if self.target is None else self.target.split(':', 1)[0]


class Ambiguity(BaseModel):
    index: str
    key: str
    candidates: Tuple[str, ...]
    chosen: str

    model_config = ConfigDict(frozen=True, extra='forbid')


class SourceCount(BaseModel):
    success: int = 0
    failure: int = 0


class MappingReport(BaseModel):
    total: int
    # multi-ingredient products with no component in the formulary
    failed_combinations: int = 0
    tier_counts: Dict[str, int]
    source_counts: Dict[str, SourceCount]
    ambiguities: List[Ambiguity]
    unmatched: List[Subject]


# -------------------------
# Index
# -------------------------


def _freeze(d: dict) -> Mapping:
    return MappingProxyType(dict(sorted(d.items())))


class ResolutionIndex(object):
    '''
    Exact-match lookup tables over the three reference sources.

    Attributes:
        bnf_by_name: salt-inclusive and salt-stripped monograph names.
        bnf_combined_by_constituents: sorted tuples of salt-stripped
            constituent names of combined monographs.
        drugbank_by_key: primary names, synonyms and salt names.
        pubchem_by_key: compound names and synonyms.
        ambiguities: keys claimed by more than one record. The smallest
            id wins; cids compare numerically.
    '''

    def __init__(self,
                 bnf_by_name: Mapping[str, str],
                 bnf_combined_by_constituents: Mapping[Tuple[str, ...], str],
                 drugbank_by_key: Mapping[str, str],
                 pubchem_by_key: Mapping[str, int],
                 bnf: Mapping[str, BnfMonograph],
                 drugbank: Mapping[str, DrugBankEntry],
                 pubchem: Mapping[int, PubChemCompound],
                 ambiguities: Tuple[Ambiguity, ...],
                 lexicon: SaltLexicon):
        self.bnf_by_name = bnf_by_name
        self.bnf_combined_by_constituents = bnf_combined_by_constituents
        self.drugbank_by_key = drugbank_by_key
        self.pubchem_by_key = pubchem_by_key
        self.bnf = bnf
        self.drugbank = drugbank
        self.pubchem = pubchem
        self.ambiguities = ambiguities
        self.lexicon = lexicon
        self._ambiguous = frozenset((a.index, a.key) for a in ambiguities)

    def is_ambiguous(self, index: str, key) -> bool:
        return (index, str(key)) in self._ambiguous

    def entity_name(self, target: str) -> str:
        '''Display name of a resolution target.'''
        source, ident = target.split(':', 1)
        if source == 'bnf':
            return self.bnf[ident].name
        if source == 'drugbank':
            return self.drugbank[ident].primary_name
        if source == 'pubchem':
            return self.pubchem[int(ident)].name
        raise KeyError(target)

    def __contains__(self, target: str) -> bool:
        try:
            self.entity_name(target)
        except (KeyError, ValueError):
            return False
        return True


class _KeyTable(object):
    '''Collects key -> candidate ids before collisions are settled.'''

    def __init__(self, index: str, sort_key=lambda x: x):
        self.index = index
        self.sort_key = sort_key
        self.candidates: Dict[object, set] = {}

    def add(self, key, ident) -> None:
        self.candidates.setdefault(key, set()).add(ident)

    def settle(self, ambiguities: List[Ambiguity],
               verbose: bool = False) -> Mapping:
        table = {}
        for key, idents in self.candidates.items():
            ordered = sorted(idents, key=self.sort_key)
            table[key] = ordered[0]
            if len(ordered) > 1:
                shown = ' + '.join(key) if isinstance(key, tuple) else key
                ambiguities.append(
                    Ambiguity(index=self.index,
                              key=shown,
                              candidates=tuple(str(x) for x in ordered),
                              chosen=str(ordered[0])))
                if verbose:
                    console.log(f'[yellow]ambiguous[/yellow] {self.index} key '
                                f'{shown!r}: {ordered}, chose {ordered[0]}')
        return _freeze(table)


def _keys_of(text: str, lexicon: SaltLexicon) -> List[str]:
    '''the normalized name and, when it differs, its salt-stripped base'''
    try:
        n = normalize_name(text, lexicon)
    except EmptyInput:
        return []
    base = strip_salt(n, lexicon).base
    return [n.canonical] if base == n else [n.canonical, base.canonical]


def combined_key(names: Iterable[str],
                 lexicon: SaltLexicon) -> Tuple[str, ...]:
    '''sorted salt-stripped bases of a set of constituent names'''
    return tuple(
        sorted(
            strip_salt(normalize_name(x, lexicon), lexicon).base.canonical
            for x in names))


def build_indexes(bnf: Iterable[BnfMonograph] = (),
                  db: Iterable[DrugBankEntry] = (),
                  pc: Iterable[PubChemCompound] = (),
                  lexicon: Optional[SaltLexicon] = None,
                  verbose: bool = False) -> ResolutionIndex:
    '''
    Build the lookup tables used by the tiered matcher.

    Args:
        bnf: cleaned formulary monographs.
        db: cleaned DrugBank entries.
        pc: cleaned PubChem compounds.
        lexicon: salt lexicon, the bundled one when omitted.
        verbose: log every key collision.

    Returns:
        ResolutionIndex: immutable, key-sorted lookup tables.

    Raises:
        DanglingDdiPartner: a DrugBank interaction names an unknown entry.
    '''
    lexicon = lexicon or default_lexicon()
    bnf_records = {m.monograph_id: m for m in bnf}
    db_records = {e.drugbank_id: e for e in db}
    pc_records = {c.cid: c for c in pc}

    for entry in db_records.values():
        for ddi in entry.ddis:
            if ddi.partner_drugbank_id not in db_records:
                raise DanglingDdiPartner(entry.drugbank_id,
                                         ddi.partner_drugbank_id)

    by_name = _KeyTable('bnf')
    combined = _KeyTable('bnf_combined')
    for ident, mono in bnf_records.items():
        for key in _keys_of(mono.name, lexicon):
            by_name.add(key, ident)
        if mono.constituents:
            combined.add(combined_key(mono.constituents, lexicon), ident)

    drugbank = _KeyTable('drugbank')
    for ident, entry in db_records.items():
        names = [entry.primary_name, *entry.synonyms]
        names.extend(s.salt_name for s in entry.salts)
        for text in names:
            try:
                drugbank.add(normalize_name(text, lexicon).canonical, ident)
            except EmptyInput:
                continue

    pubchem = _KeyTable('pubchem', sort_key=int)
    for cid, compound in pc_records.items():
        for text in (compound.name, *compound.synonyms):
            try:
                pubchem.add(normalize_name(text, lexicon).canonical, cid)
            except EmptyInput:
                continue

    ambiguities: List[Ambiguity] = []
    idx = ResolutionIndex(
        bnf_by_name=by_name.settle(ambiguities, verbose),
        bnf_combined_by_constituents=combined.settle(ambiguities, verbose),
        drugbank_by_key=drugbank.settle(ambiguities, verbose),
        pubchem_by_key=pubchem.settle(ambiguities, verbose),
        bnf=_freeze(bnf_records),
        drugbank=_freeze(db_records),
        pubchem=_freeze(pc_records),
        ambiguities=tuple(ambiguities),
        lexicon=lexicon,
    )
    if verbose:
        console.log(f'index: {len(idx.bnf_by_name)} BNF keys, '
                    f'{len(idx.bnf_combined_by_constituents)} combined, '
                    f'{len(idx.drugbank_by_key)} DrugBank keys, '
                    f'{len(idx.pubchem_by_key)} PubChem keys')
    return idx


# -------------------------
# Matching
# -------------------------

STAGE_SOURCE = {
    Stage.COMBINED_MONOGRAPH: 'bnf',
    Stage.BNF_DIRECT: 'bnf',
    Stage.DRUGBANK_SYNONYM_SALT: 'drugbank',
    Stage.BNF_VIA_DRUGBANK: 'bnf',
    Stage.PUBCHEM_DIRECT: 'pubchem',
}


def _probe(stage: Stage,
           table: Mapping,
           keys: List,
           idx: ResolutionIndex,
           source: Optional[str] = None) -> Tuple[TrailEntry, Optional[str]]:
    '''try the keys in order; one trail entry for the whole stage'''
    source = source or STAGE_SOURCE[stage]
    for key in keys:
        if key in table:
            ident = table[key]
            shown = ' + '.join(key) if isinstance(key, tuple) else key
            target = f'{source}:{ident}'
            return TrailEntry(stage=stage,
                              source=source,
                              key=shown,
                              outcome=Outcome.HIT,
                              candidate=target,
                              ambiguous=idx.is_ambiguous(
                                  'bnf_combined' if isinstance(key, tuple)
                                  else source, shown)), target
    last = keys[-1]
    shown = ' + '.join(last) if isinstance(last, tuple) else last
    return TrailEntry(stage=stage, source=source, key=shown,
                      outcome=Outcome.MISS), None


def resolve_ingredient(ing: Union[ActiveIngredientDosage, str],
                       idx: ResolutionIndex,
                       subject: Optional[Subject] = None) -> MappingResult:
    '''
    Map one ingredient name through the stages, stopping at the first hit.

    1. bnf_direct: the canonical name against formulary names.
    2. drugbank_synonym_salt: the canonical name, then its salt-stripped
       base, against DrugBank names, synonyms and salts.
    3. bnf_via_drugbank: the formulary again, with the DrugBank primary
       name. Skipped when stage 2 found nothing.
    4. pubchem_direct: the canonical name, then the base.
    '''
    raw = ing if isinstance(ing, str) else ing.name
    subject = subject or Subject(ingredient=raw)
    name = normalize_name(raw, idx.lexicon)
    base = strip_salt(name, idx.lexicon).base
    keys = [name.canonical] if base == name else [name.canonical,
                                                  base.canonical]
    trail: List[TrailEntry] = []

    entry, target = _probe(Stage.BNF_DIRECT, idx.bnf_by_name,
                           [name.canonical], idx)
    trail.append(entry)
    if target is not None:
        return MappingResult(subject=subject,
                             tier=Tier.BNF_DIRECT,
                             target=target,
                             trail=tuple(trail))

    entry, db_target = _probe(Stage.DRUGBANK_SYNONYM_SALT, idx.drugbank_by_key,
                              keys, idx)
    trail.append(entry)
    if db_target is not None:
        primary = idx.drugbank[db_target.split(':', 1)[1]].primary_name
        entry, target = _probe(Stage.BNF_VIA_DRUGBANK, idx.bnf_by_name,
                               [normalize_name(primary, idx.lexicon).canonical],
                               idx)
        trail.append(entry)
        if target is not None:
            return MappingResult(subject=subject,
                                 tier=Tier.BNF_VIA_SYNONYM_SALT,
                                 target=target,
                                 trail=tuple(trail))
        return MappingResult(subject=subject,
                             tier=Tier.DRUGBANK_DIRECT,
                             target=db_target,
                             trail=tuple(trail))
    trail.append(
        TrailEntry(stage=Stage.BNF_VIA_DRUGBANK,
                   source='bnf',
                   key=name.canonical,
                   outcome=Outcome.SKIPPED))

    entry, target = _probe(Stage.PUBCHEM_DIRECT, idx.pubchem_by_key, keys, idx)
    trail.append(entry)
    if target is not None:
        return MappingResult(subject=subject,
                             tier=Tier.PUBCHEM_DIRECT,
                             target=target,
                             trail=tuple(trail))
    return MappingResult(subject=subject,
                         tier=Tier.UNMATCHED,
                         trail=tuple(trail))


def _full_name_attempts(p: MmaProduct,
                        idx: ResolutionIndex) -> Tuple[List[TrailEntry], Optional[str]]:
    # brand name: descriptors go, salt-like tokens stay
    full = strip_descriptors(normalize_name(p.medicine_name, idx.lexicon))
    attempts = []
    for table, source in ((idx.drugbank_by_key, 'drugbank'),
                          (idx.pubchem_by_key, 'pubchem')):
        entry, target = _probe(Stage.FULL_PRODUCT_NAME, table,
                               [full.canonical], idx, source=source)
        attempts.append(entry)
        if target is not None:
            return attempts, target
    return attempts, None


def resolve_product(p: MmaProduct,
                    idx: ResolutionIndex) -> List[MappingResult]:
    '''
    Map every active ingredient of a product.

    A multi-ingredient product whose salt-stripped ingredient set equals
    the constituents of a combined monograph maps as one BnfViaComponents
    result. Otherwise each ingredient is mapped on its own; DrugBank hits
    become DrugBankComponent. When no ingredient maps at all, the product
    name itself is tried against DrugBank and PubChem.
    '''
    subjects = [
        Subject(authorisation_number=p.authorisation_number,
                ingredient=ing.name) for ing in p.active_ingredients
    ]
    product = Subject(authorisation_number=p.authorisation_number)
    multi = len(p.active_ingredients) > 1
    prefix: List[TrailEntry] = []

    if multi:
        key = combined_key((x.name for x in p.active_ingredients), idx.lexicon)
        entry, target = _probe(Stage.COMBINED_MONOGRAPH,
                               idx.bnf_combined_by_constituents, [key], idx)
        if target is not None:
            parts = tuple(
                resolve_ingredient(ing, idx, s).model_copy(
                    update={'component': True})
                for ing, s in zip(p.active_ingredients, subjects))
            return [
                MappingResult(subject=product,
                              tier=Tier.BNF_VIA_COMPONENTS,
                              target=target,
                              trail=(entry, ),
                              components=parts)
            ]
        prefix.append(entry)

    results = []
    for ing, s in zip(p.active_ingredients, subjects):
        r = resolve_ingredient(ing, idx, s)
        update = {'trail': tuple(prefix) + r.trail, 'component': multi}
        if multi and r.tier == Tier.DRUGBANK_DIRECT:
            update['tier'] = Tier.DRUGBANK_COMPONENT
        results.append(r.model_copy(update=update))

    if multi:
        reached = [r.tier in BNF_TIERS for r in results]
        if any(reached) and not all(reached):
            results = [
                r.model_copy(update={'flags': r.flags + (PARTIAL_COMPONENTS, )})
                for r in results
            ]

    if all(r.tier == Tier.UNMATCHED for r in results):
        attempts, target = _full_name_attempts(p, idx)
        if target is not None:
            return [
                MappingResult(subject=product,
                              tier=Tier.FULL_PRODUCT_NAME_ONLY,
                              target=target,
                              trail=tuple(attempts),
                              components=tuple(results))
            ]
        results = [
            r.model_copy(update={'trail': r.trail + tuple(attempts)})
            for r in results
        ]
    # model_copy skips validation
    return [MappingResult.model_validate(r.model_dump()) for r in results]


def resolve_all(products: Iterable[MmaProduct],
                idx: ResolutionIndex,
                parallelism: int = 4,
                verbose: bool = False) -> List[MappingResult]:
    '''
    Resolve every product, flattening the results in product order.
    '''
    products = list(products)
    worker = ft.partial(resolve_product, idx=idx)
    with concurrent.futures.ThreadPoolExecutor(
            max_workers=max(1, parallelism)) as ex:
        nested = list(
            track(ex.map(worker, products),
                  total=len(products),
                  description=f'Resolve[{parallelism}]:',
                  console=console,
                  transient=True,
                  disable=not verbose))
    results = [r for rs in nested for r in rs]
    if verbose:
        console.log(f'resolved {len(products)} products into '
                    f'{len(results)} mapping results')
    return results


def assign_uri(p: MmaProduct, lexicon: Optional[SaltLexicon] = None) -> str:
    '''
    Product IRI from the normalized name, the form and the
    authorisation number.
    '''
    return str(vocab.PRODUCT[p.product_slug(lexicon or default_lexicon())])


def mapping_report(results: Iterable[MappingResult],
                   idx: Optional[ResolutionIndex] = None) -> MappingReport:
    '''
    Count tiers (zeros included) and per-source outcomes.

    A source succeeds for a subject when one of its lookups hit, and fails
    when it was tried without a hit.
    '''
    results = list(results)
    tiers = {t.value: 0 for t in Tier}
    sources = {s: SourceCount() for s in ('bnf', 'drugbank', 'pubchem')}
    unmatched = []
    combos: Dict[str, bool] = {}
    for r in results:
        if r.component:
            number = r.subject.authorisation_number or ''
            combos[number] = combos.get(number, False) or r.tier in BNF_TIERS
        tiers[r.tier.value] += 1
        entries = list(r.trail)
        if r.tier == Tier.FULL_PRODUCT_NAME_ONLY:
            # the name was tried only after every ingredient lookup failed
            entries.extend(e for c in r.components for e in c.trail)
        tried = {e.source for e in entries if e.outcome != Outcome.SKIPPED}
        hit = {e.source for e in entries if e.outcome == Outcome.HIT}
        for s in tried:
            if s in hit:
                sources[s].success += 1
            else:
                sources[s].failure += 1
        if r.tier == Tier.UNMATCHED:
            unmatched.append(r.subject)
    return MappingReport(total=len(results),
                         failed_combinations=sum(not x for x in combos.values()),
                         tier_counts=tiers,
                         source_counts=sources,
                         ambiguities=list(idx.ambiguities) if idx else [],
                         unmatched=unmatched)


def dump_mappings(results: Iterable[MappingResult]) -> str:
    return json.dumps([r.model_dump(mode='json') for r in results],
                      indent=1,
                      ensure_ascii=False)


def load_mappings(text: Union[str, bytes],
                  source: str = 'mappings') -> List[MappingResult]:
    '''
    Read a document written by ``dump_mappings``.

    Raises:
        MalformedDocument: the text is not a JSON list of mapping results.
    '''
    try:
        doc = json.loads(text)
    except ValueError as e:
        raise MalformedDocument(source, f'invalid JSON: {e}')
    if not isinstance(doc, list):
        raise MalformedDocument(source,
                                f'expected a list, got {type(doc).__name__}')
    results = []
    for i, x in enumerate(doc):
        try:
            results.append(MappingResult.model_validate(x))
        except ValidationError as e:
            err = e.errors()[0]
            loc = '.'.join(str(y) for y in (i, *err['loc']))
            raise MalformedDocument(source, f'{loc}: {err["msg"]}')
    return results


def main(argv: List[str]) -> None:
    '''
    Resolve the products of a data directory and print the tiers.
    '''
    from .ingest import load_sources
    parser = argparse.ArgumentParser()
    parser.add_argument('data_dir', type=str, nargs='?', default='fixtures')
    args = parser.parse_args(argv)
    bundle = load_sources(args.data_dir)
    idx = build_indexes(bundle.bnf, bundle.drugbank, bundle.pubchem,
                        verbose=True)
    for r in resolve_all(bundle.mma, idx):
        print(r.subject.authorisation_number, r.subject.ingredient or '*',
              r.tier.value, r.target or '-', sep='\t')


if __name__ == '__main__':  # pragma: no cover
    main(sys.argv[1:])
