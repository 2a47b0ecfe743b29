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
from typing import Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional, Set, Union
from types import MappingProxyType
import argparse
import functools as ft
import re
import string
import sys
import unicodedata
from . import defaults
from .errors import EmptyInput

console = defaults.console


class NormalizedName(NamedTuple):
    '''
    A drug or product name in canonical matching form.

    ``canonical`` is lowercase, single-spaced, and free of punctuation
    except intra-word hyphens, the '+' combination separator and decimal
    points inside numbers. ``original`` is the raw text it came from.
    '''
    canonical: str
    original: str


class SaltSplit(NamedTuple):
    base: NormalizedName
    salt: Optional[str]


class SaltLexicon(object):
    '''
    Salt tokens plus the orthographic spelling map, both loaded from
    editable data files shipped with the package.

    Attributes:
        entries (FrozenSet[str]): lowercase salt tokens.
        spelling_map (Mapping[str, str]): variant -> canonical token.
    '''

    def __init__(self,
                 entries: Iterable[str] = (),
                 spelling_map: Optional[Mapping[str, str]] = None):
        self.entries: FrozenSet[str] = frozenset(x.strip().lower()
                                                 for x in entries
                                                 if x.strip())
        spelling = {
            k.strip().lower(): v.strip().lower()
            for k, v in (spelling_map or {}).items()
        }
        # a value that is also a key would make normalization non-idempotent
        for variant, canonical in spelling.items():
            if canonical in spelling:
                raise ValueError(
                    f'spelling map chains {variant!r} -> {canonical!r} -> {spelling[canonical]!r}'
                )
        self.spelling_map: Mapping[str, str] = MappingProxyType(spelling)

    @classmethod
    def load(cls,
             salts: str = defaults.SALTS,
             spelling: Optional[str] = defaults.SPELLING) -> 'SaltLexicon':
        '''
        Load a lexicon from a salt token file and an optional spelling file.

        Args:
            salts (str): one token per line, '#' starts a comment line.
            spelling (Optional[str]): tab separated variant/canonical pairs.

        Returns:
            SaltLexicon: the loaded lexicon.
        '''
        with open(salts, 'rt', encoding='utf-8') as f:
            entries = [
                line for line in f.read().splitlines()
                if line.strip() and not line.lstrip().startswith('#')
            ]
        pairs: Dict[str, str] = {}
        if spelling is not None:
            with open(spelling, 'rt', encoding='utf-8') as f:
                for line in f.read().splitlines():
                    if not line.strip() or line.lstrip().startswith('#'):
                        continue
                    variant, canonical = line.split('\t')
                    pairs[variant] = canonical
        return cls(entries, pairs)

    def __contains__(self, token: str) -> bool:
        return token in self.entries

    def __repr__(self) -> str:
        return f'SaltLexicon(entries={len(self.entries)}, spelling_map={len(self.spelling_map)})'


@ft.lru_cache(maxsize=None)
def default_lexicon() -> SaltLexicon:
    return SaltLexicon.load()


# unit spellings -> canonical unit token
UNITS: Mapping[str, str] = MappingProxyType({
    'mg': 'mg',
    'milligram': 'mg',
    'milligrams': 'mg',
    'g': 'g',
    'gm': 'g',
    'gram': 'g',
    'grams': 'g',
    'mcg': 'mcg',
    'µg': 'mcg',  # micro sign
    'μg': 'mcg',  # greek small letter mu
    'ug': 'mcg',
    'microgram': 'mcg',
    'micrograms': 'mcg',
    'ml': 'ml',
    'millilitre': 'ml',
    'millilitres': 'ml',
    'milliliter': 'ml',
    'milliliters': 'ml',
    'l': 'l',
    'litre': 'l',
    'litres': 'l',
    'liter': 'l',
    'liters': 'l',
    'iu': 'iu',
})

_NUMBER = re.compile(r'^\d+(?:\.\d+)?$')
_NUMBER_UNIT = re.compile(r'^(\d+(?:\.\d+)?)([^\W\d_]+)$')
_HYPHENS = re.compile(r'-{2,}')


def _scrub(text: str) -> str:
    '''
    keep letters, digits, hyphens, '+' and decimal points between digits;
    everything else becomes a space.
    '''
    out: List[str] = []
    for i, ch in enumerate(text):
        if ch.isalnum() or ch == '-':
            out.append(ch)
        elif ch == '+':
            out.append(' + ')
        elif ch in '.,' and 0 < i < len(text) - 1 \
                and text[i - 1].isdigit() and text[i + 1].isdigit():
            out.append('.')
        else:
            out.append(' ')
    return ''.join(out)


def _join_units(tokens: List[str]) -> List[str]:
    out: List[str] = []
    for tok in tokens:
        if tok in UNITS and out and _NUMBER.match(out[-1]):
            out[-1] = out[-1] + UNITS[tok]
            continue
        m = _NUMBER_UNIT.match(tok)
        if m and m.group(2) in UNITS:
            tok = m.group(1) + UNITS[m.group(2)]
        out.append(tok)
    return out


def normalize_name(raw: str,
                   lexicon: Optional[SaltLexicon] = None) -> NormalizedName:
    '''
    Canonicalize a drug or product name for exact matching.

    Args:
        raw (str): the name as found in a source record.
        lexicon (Optional[SaltLexicon]): provides the spelling map.
            The bundled lexicon is used when omitted.

    Returns:
        NormalizedName: the canonical form together with ``raw``.

    Raises:
        EmptyInput: if nothing but whitespace or punctuation is left.
    '''
    if lexicon is None:
        lexicon = default_lexicon()
    text = unicodedata.normalize('NFC', raw)
    text = unicodedata.normalize('NFC', text.lower())
    tokens: List[str] = []
    for tok in _scrub(text).split():
        tok = _HYPHENS.sub('-', tok).strip('-')
        if not tok:
            continue
        tokens.append(tok)
    spelling = lexicon.spelling_map
    tokens = [spelling.get(tok, tok) for tok in _join_units(tokens)]
    if not tokens:
        raise EmptyInput(raw)
    return NormalizedName(' '.join(tokens), raw)


# pharmaceutical form and packaging words found in product names
FORM_TOKENS: FrozenSet[str] = frozenset('''
    tablet tablets caplet caplets capsule capsules hard soft
    film-coated coated dispersible effervescent chewable orodispersible
    gastro-resistant prolonged-release modified-release extended-release
    suspension solution injection infusion emulsion concentrate
    cream ointment gel paste lotion
    syrup elixir drops spray inhaler inhalation pressurised evohaler
    powder granules lozenge lozenges pastille pessary suppository
    patch patches oral oromucosal cutaneous nasal
    for in pre-filled pen syringe vial ampoule sachet sachets
    w v unit units dose doses
'''.split())

_STRENGTH = re.compile(r'^\d+(?:\.\d+)?(?:mg|g|mcg|ml|l|iu)?$')


def strip_descriptors(name: NormalizedName) -> NormalizedName:
    '''
    Drop strength tokens (10mg, 0.15) and pharmaceutical form tokens
    (tablets, suspension, ...) from a normalized product name.
    Returns the input unchanged when nothing would be left.
    '''
    kept = [
        tok for tok in name.canonical.split(' ')
        if not _STRENGTH.match(tok) and tok not in FORM_TOKENS
    ]
    if not kept or len(kept) == len(name.canonical.split(' ')):
        return name
    return NormalizedName(' '.join(kept), name.original)


def strip_salt(name: NormalizedName,
               lexicon: SaltLexicon,
               brand: bool = False,
               verbose: bool = False) -> SaltSplit:
    '''
    Split trailing salt tokens off an ingredient name.

    Args:
        name (NormalizedName): a normalized ingredient name.
        lexicon (SaltLexicon): the salt tokens to recognise.
        brand (bool): brand names are never stripped, since a trailing
            salt-like token is part of the trade name.
        verbose (bool): log brand names that look salted.

    Returns:
        SaltSplit: ``base`` without the salt tokens and the stripped
        ``salt`` (space joined), or ``name`` itself and None.
    '''
    tokens = name.canonical.split(' ')
    if brand:
        if verbose and len(tokens) > 1 and tokens[-1] in lexicon:
            console.log(f'[yellow]flagged[/yellow]: brand name {name.original!r} '
                        'ends in a salt token, left unstripped')
        return SaltSplit(name, None)
    stripped: List[str] = []
    while len(tokens) > 1 and tokens[-1] in lexicon:
        stripped.insert(0, tokens.pop())
    if not stripped:
        return SaltSplit(name, None)
    return SaltSplit(NormalizedName(' '.join(tokens), name.original),
                     ' '.join(stripped))


def synonym_keys(
        name: NormalizedName,
        synonym_index: Mapping[str, Union[str, Iterable[str]]]) -> Set[str]:
    '''
    All canonical ids whose synonym set contains ``name``.
    '''
    hit = synonym_index.get(name.canonical)
    if hit is None:
        return set()
    if isinstance(hit, str):
        return {hit}
    return set(hit)


_SLUG_SAFE = frozenset(string.ascii_lowercase + string.digits + '-')
_SLUG_SPLIT = re.compile(r'[\s/]+')


def slugify(*parts: str) -> str:
    '''
    Hyphen-join the parts into an IRI path segment. Whitespace and '/'
    become hyphens; any byte outside [a-z0-9-] is percent-encoded.
    '''
    tokens: List[str] = []
    for part in parts:
        tokens.extend(t for t in _SLUG_SPLIT.split(part.lower()) if t)
    slug = _HYPHENS.sub('-', '-'.join(tokens))
    return ''.join(
        ch if ch in _SLUG_SAFE else ''.join(f'%{b:02X}'
                                            for b in ch.encode('utf-8'))
        for ch in slug)


def main(argv: List[str]) -> None:
    '''
    Print the canonical, descriptor-stripped and salt-stripped forms.
    '''
    parser = argparse.ArgumentParser()
    parser.add_argument('names', type=str, nargs='+', help='names to normalize')
    parser.add_argument('--lexicon', type=str, default=defaults.SALTS)
    args = parser.parse_args(argv)
    lexicon = SaltLexicon.load(args.lexicon)
    for raw in args.names:
        n = normalize_name(raw, lexicon)
        split = strip_salt(n, lexicon)
        print(f'{raw!r}', n.canonical, strip_descriptors(n).canonical,
              split.base.canonical, split.salt or '-', sep='\t')


if __name__ == '__main__':  # pragma: no cover
    main(sys.argv[1:])
