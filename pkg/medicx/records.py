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

import datetime
from decimal import Decimal
from enum import Enum
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict

from .errors import EmptyInput
from .normalize import SaltLexicon, normalize_name, slugify


def _has_content(name: str) -> bool:
    try:
        normalize_name(name)
    except EmptyInput:
        return False
    return True

# -------------------------
# MMA product registry
# -------------------------


class Classification(str, Enum):
    OTC = 'otc'
    POM = 'pom'


class AuthorisationStatus(str, Enum):
    AUTHORISED = 'authorised'
    WITHDRAWN = 'withdrawn'
    SUSPENDED = 'suspended'


class ActiveIngredientDosage(BaseModel):
    '''One active ingredient of a registered product, with its strength.'''

    name: str
    dosage_value: Decimal
    dosage_unit: str

    model_config = ConfigDict(frozen=True, extra='forbid')


class MmaProduct(BaseModel):
    '''A product entry of the national medicines registry.'''

    medicine_name: str
    active_ingredients: Tuple[ActiveIngredientDosage, ...]
    pharmaceutical_form: str
    therapeutic_class: Optional[str] = None
    classification: Classification
    atc_code: Optional[str] = None
    status: AuthorisationStatus
    authorisation_number: str
    authorisation_date: datetime.date
    authorisation_holder: str
    holder_address: str

    model_config = ConfigDict(frozen=True, extra='forbid')

    def product_slug(self, lexicon: Optional[SaltLexicon] = None) -> str:
        '''IRI slug: normalized name, form and authorisation number.'''
        return slugify(
            normalize_name(self.medicine_name, lexicon).canonical,
            normalize_name(self.pharmaceutical_form, lexicon).canonical,
            self.authorisation_number)

    def invariant_violations(self) -> List[str]:
        problems = []
        if not _has_content(self.medicine_name):
            problems.append(f'unusable medicine_name {self.medicine_name!r}')
        if not _has_content(self.pharmaceutical_form):
            problems.append(
                f'unusable pharmaceutical_form {self.pharmaceutical_form!r}')
        if not self.active_ingredients:
            problems.append('no active ingredient')
        for ing in self.active_ingredients:
            if not _has_content(ing.name):
                problems.append(f'unusable ingredient name {ing.name!r}')
            if ing.dosage_value <= 0:
                problems.append(f'non-positive dosage for {ing.name!r}')
        if not self.authorisation_number.strip():
            problems.append('empty authorisation_number')
        return problems


# -------------------------
# BNF monographs
# -------------------------

Frequency = Literal['very_common', 'common', 'uncommon', 'rare', 'very_rare']


class SideEffect(BaseModel):
    name: str
    frequency: Optional[Frequency] = None
    severity: Optional[str] = None

    model_config = ConfigDict(frozen=True, extra='forbid')


class BnfInteraction(BaseModel):
    partner_name: str
    interaction_type: str
    severity: Optional[str] = None
    note: Optional[str] = None

    model_config = ConfigDict(frozen=True, extra='forbid')


class BnfMonograph(BaseModel):
    '''
    A formulary monograph. Combined preparations (e.g. co-amoxiclav)
    list their constituent drugs in ``constituents``.
    '''

    name: str
    constituents: Tuple[str, ...] = ()
    indications: Tuple[str, ...] = ()
    side_effects: Tuple[SideEffect, ...] = ()
    interactions: Tuple[BnfInteraction, ...] = ()
    contraindications: Tuple[str, ...] = ()
    cautions: Tuple[str, ...] = ()
    pregnancy: Optional[str] = None
    breastfeeding: Optional[str] = None
    allergies: Tuple[str, ...] = ()
    therapeutic_class: Optional[str] = None
    drug_action: Optional[str] = None
    hepatic_impairment: Optional[str] = None
    renal_impairment: Optional[str] = None
    patient_advice: Optional[str] = None
    safety_info: Optional[str] = None

    model_config = ConfigDict(frozen=True, extra='forbid')

    @property
    def monograph_id(self) -> str:
        return slugify(normalize_name(self.name).canonical)

    def invariant_violations(self) -> List[str]:
        problems = []
        if not _has_content(self.name):
            problems.append(f'unusable name {self.name!r}')
        # each of these becomes a node named after its text
        noded = [*self.constituents, *self.indications,
                 *self.contraindications,
                 *(x.name for x in self.side_effects),
                 *(x.partner_name for x in self.interactions)]
        if self.therapeutic_class is not None:
            noded.append(self.therapeutic_class)
        problems.extend(f'unusable name {text!r}' for text in noded
                        if not _has_content(text))
        if len(self.constituents) == 1:
            problems.append('a combined monograph needs two constituents')
        names = [x.name.casefold() for x in self.side_effects]
        if len(names) != len(set(names)):
            problems.append('duplicate side effect')
        return problems


# -------------------------
# DrugBank entries
# -------------------------


class DrugBankSalt(BaseModel):
    salt_name: str

    model_config = ConfigDict(frozen=True, extra='forbid')


class DrugBankDdi(BaseModel):
    partner_drugbank_id: str
    description: str
    mechanism: Optional[str] = None
    severity: Optional[str] = None

    model_config = ConfigDict(frozen=True, extra='forbid')


class DrugBankEntry(BaseModel):
    drugbank_id: str
    primary_name: str
    synonyms: Tuple[str, ...] = ()
    salts: Tuple[DrugBankSalt, ...] = ()
    description: Optional[str] = None
    atc_codes: Tuple[str, ...] = ()
    ddis: Tuple[DrugBankDdi, ...] = ()
    targets: Tuple[str, ...] = ()
    enzymes: Tuple[str, ...] = ()
    transporters: Tuple[str, ...] = ()
    carriers: Tuple[str, ...] = ()
    narrow_therapeutic_index: bool = False
    food_interactions: Tuple[str, ...] = ()

    model_config = ConfigDict(frozen=True, extra='forbid')

    def invariant_violations(self) -> List[str]:
        problems = []
        if not self.drugbank_id.strip():
            problems.append('empty drugbank_id')
        if not _has_content(self.primary_name):
            problems.append(f'unusable primary_name {self.primary_name!r}')
        return problems


# -------------------------
# PubChem compounds
# -------------------------


class PubChemCompound(BaseModel):
    cid: int
    name: str
    synonyms: Tuple[str, ...] = ()

    model_config = ConfigDict(frozen=True, extra='forbid')

    def invariant_violations(self) -> List[str]:
        problems = []
        if self.cid <= 0:
            problems.append(f'non-positive cid {self.cid}')
        if not _has_content(self.name):
            problems.append(f'unusable name {self.name!r}')
        return problems
