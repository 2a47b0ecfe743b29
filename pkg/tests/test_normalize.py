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
import locale
import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from medicx import normalize
from medicx.errors import EmptyInput
from medicx.normalize import NormalizedName, SaltLexicon


@pytest.fixture
def lexicon():
    return normalize.default_lexicon()


@pytest.mark.parametrize('raw, canonical', (
    ('  Esomeprazole   Magnesium ', 'esomeprazole magnesium'),
    ('Co-Amoxiclav', 'co-amoxiclav'),
    ('Amoxicillin Sulphate 500 MG', 'amoxicillin sulfate 500mg'),
    ('Salbutamol 100 micrograms', 'salbutamol 100mcg'),
    ('Fentanyl 12 µg/h', 'fentanyl 12mcg h'),
    ('Fentanyl 12 μg/h', 'fentanyl 12mcg h'),
    ('Difflam 0.15% w/v', 'difflam 0.15 w v'),
    ('Calpol 2,5 ml', 'calpol 2.5ml'),
    ('Paracetamol+Caffeine', 'paracetamol + caffeine'),
    ('--Aspirin--', 'aspirin'),
    ('Amlodipine (as besylate)', 'amlodipine as besilate'),
))
def test_normalize_name(raw, canonical):
    n = normalize.normalize_name(raw)
    assert n.canonical == canonical
    assert n.original == raw


@pytest.mark.parametrize('raw', ('', '   ', '()', '.,;', '---'))
def test_normalize_name_empty(raw):
    with pytest.raises(EmptyInput):
        normalize.normalize_name(raw)
    # parse errors are also ValueErrors
    with pytest.raises(ValueError):
        normalize.normalize_name(raw)


@pytest.mark.parametrize('raw, stripped', (
    ('Zyrtec 10mg tablets', 'zyrtec'),
    ('Augmentin 500mg/125mg tablets', 'augmentin'),
    ('Difflam 0.15% w/v oromucosal spray', 'difflam'),
    ('Plavix 75mg film-coated tablets', 'plavix'),
    ('Tablets', 'tablets'),
    ('Zestril', 'zestril'),
))
def test_strip_descriptors(raw, stripped):
    n = normalize.normalize_name(raw)
    assert normalize.strip_descriptors(n).canonical == stripped


@pytest.mark.parametrize('raw, base, salt', (
    ('esomeprazole magnesium', 'esomeprazole', 'magnesium'),
    ('cetirizine hydrochloride', 'cetirizine', 'hydrochloride'),
    ('atorvastatin calcium trihydrate', 'atorvastatin', 'calcium trihydrate'),
    ('magnesium', 'magnesium', None),
    ('sodium valproate', 'sodium valproate', None),
    ('paracetamol', 'paracetamol', None),
))
def test_strip_salt(lexicon, raw, base, salt):
    split = normalize.strip_salt(normalize.normalize_name(raw), lexicon)
    assert split.base.canonical == base
    assert split.salt == salt


def test_strip_salt_brand(lexicon, capsys):
    n = normalize.normalize_name('Nexium Magnesium')
    split = normalize.strip_salt(n, lexicon, brand=True, verbose=True)
    assert split.base == n
    assert split.salt is None
    assert 'flagged' in capsys.readouterr().err


def test_synonym_keys():
    index = {'adrenaline': 'DB00668', 'epinephrine': 'DB00668',
             'caffeine': ['DB00201', 'DB99999']}
    keys = normalize.synonym_keys
    assert keys(normalize.normalize_name('Adrenaline'), index) == {'DB00668'}
    assert keys(normalize.normalize_name('EPINEPHRINE'), index) == {'DB00668'}
    assert keys(normalize.normalize_name('Caffeine'), index) == {'DB00201',
                                                                 'DB99999'}
    assert keys(normalize.normalize_name('unobtainium'), index) == set()


@pytest.mark.parametrize('parts, slug', (
    (('co-amoxiclav',), 'co-amoxiclav'),
    (('panadol 500mg tablets', 'tablet', 'MA014/00301'),
     'panadol-500mg-tablets-tablet-ma014-00301'),
    (('difflam 0.15',), 'difflam-0%2E15'),
    (('crème',), 'cr%C3%A8me'),
))
def test_slugify(parts, slug):
    assert normalize.slugify(*parts) == slug


def test_lexicon_load(tmp_path):
    salts = tmp_path / 'salts.txt'
    salts.write_text('# comment\nHydrochloride\n\nsodium\n')
    spelling = tmp_path / 'spelling.tsv'
    spelling.write_text('sulphate\tsulfate\n')
    lex = SaltLexicon.load(str(salts), str(spelling))
    assert lex.entries == frozenset({'hydrochloride', 'sodium'})
    assert 'hydrochloride' in lex
    assert lex.spelling_map['sulphate'] == 'sulfate'
    with pytest.raises(TypeError):
        lex.spelling_map['x'] = 'y'


def test_lexicon_rejects_chains():
    with pytest.raises(ValueError):
        SaltLexicon(['sodium'], {'a': 'b', 'b': 'c'})


def test_custom_lexicon_spelling():
    lex = SaltLexicon([], {'paracetamol': 'acetaminophen'})
    assert normalize.normalize_name('Paracetamol 500mg',
                                    lex).canonical == 'acetaminophen 500mg'


def test_spelling_applies_to_joined_strengths():
    lex = SaltLexicon([], {'0.5mg': '500mcg', 'sulphate': 'sulfate'})
    for raw in ('Salbutamol Sulphate 0.5 mg', 'salbutamol sulphate 0.5MG',
                'Salbutamol sulphate 0.5 milligrams'):
        n = normalize.normalize_name(raw, lex)
        assert n.canonical == 'salbutamol sulfate 500mcg'
        assert normalize.normalize_name(n.canonical,
                                        lex).canonical == n.canonical


def test_main(capsys):
    normalize.main(['Esomeprazole Magnesium 20 mg tablets'])
    assert 'esomeprazole' in capsys.readouterr().out


########################
# Properties
########################

_WORDS = ('amoxicillin', 'clavulanic', 'acid', 'sodium', 'valproate',
          'hydrochloride', 'magnesium', 'co-amoxiclav', 'tablets', 'film-coated',
          'Sulphate', 'Besylate', 'oral', 'suspension', 'Ëpoetin', 'crème')
_UNITS = ('mg', 'MG', 'g', 'mcg', 'µg', 'μg', 'ug', 'micrograms', 'ml', 'iu', '%')
_SEPARATORS = (' ', '  ', '\t', '/', ',', '+', '-', '(', ')', '.', ' , ')


@st.composite
def drug_names(draw):
    '''product-like names: words, strengths and punctuation'''
    pieces = []
    for _ in range(draw(st.integers(min_value=1, max_value=6))):
        kind = draw(st.sampled_from(('word', 'word', 'strength', 'noise')))
        if kind == 'word':
            word = draw(st.sampled_from(_WORDS))
            pieces.append(draw(st.sampled_from(
                (word, word.upper(), word.title()))))
        elif kind == 'strength':
            number = draw(st.sampled_from(('5', '10', '0.5', '2,5', '125')))
            pieces.append(number + draw(st.sampled_from(('', ' ')))
                          + draw(st.sampled_from(_UNITS)))
        else:
            pieces.append(draw(st.text(
                alphabet=string.ascii_letters + string.digits + '-',
                min_size=1, max_size=8)))
        pieces.append(draw(st.sampled_from(_SEPARATORS)))
    return ''.join(pieces)


_ALLOWED = set(string.ascii_lowercase + string.digits + '-+. ')


@given(drug_names())
@settings(max_examples=500, deadline=None)
def test_normalize_properties(raw):
    try:
        n = normalize.normalize_name(raw)
    except EmptyInput:
        return
    c = n.canonical
    assert c == c.strip() and '  ' not in c
    assert c == c.lower()
    assert set(c) - _ALLOWED <= set('ëè')
    # idempotent
    assert normalize.normalize_name(c).canonical == c
    # deterministic
    assert normalize.normalize_name(raw) == n


@given(drug_names())
@settings(max_examples=500, deadline=None)
def test_strip_descriptors_idempotent(raw):
    try:
        n = normalize.normalize_name(raw)
    except EmptyInput:
        return
    once = normalize.strip_descriptors(n)
    assert normalize.strip_descriptors(once) == once
    assert once.canonical


@given(st.lists(st.sampled_from(('paracetamol', 'warfarin', 'co-amoxiclav',
                                 'clavulanic', 'acid', 'valproate', '500mg')),
                min_size=1, max_size=4))
@settings(max_examples=200, deadline=None)
def test_strip_salt_noop_without_salt(tokens):
    lexicon = normalize.default_lexicon()
    n = normalize.normalize_name(' '.join(tokens))
    split = normalize.strip_salt(n, lexicon)
    assert split.base == n
    assert split.salt is None


@given(drug_names())
@settings(max_examples=200, deadline=None)
def test_strip_salt_keeps_a_token(raw):
    lexicon = normalize.default_lexicon()
    try:
        n = normalize.normalize_name(raw)
    except EmptyInput:
        return
    split = normalize.strip_salt(n, lexicon)
    assert split.base.canonical
    if split.salt is not None:
        assert f'{split.base.canonical} {split.salt}' == n.canonical


def test_normalize_locale_independent():
    names = ['ISTIN 5MG', 'Ëpoetin Alfa', 'İbuprofen']
    before = [normalize.normalize_name(x) for x in names]
    saved = locale.setlocale(locale.LC_ALL)
    try:
        locale.setlocale(locale.LC_ALL, 'C')
        assert [normalize.normalize_name(x) for x in names] == before
    finally:
        locale.setlocale(locale.LC_ALL, saved)


def test_normalized_name_is_tuple():
    n = NormalizedName('aspirin', 'Aspirin')
    assert n == ('aspirin', 'Aspirin')
