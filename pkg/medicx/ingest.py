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
from typing import Any, BinaryIO, Callable, Dict, Iterable, List, NamedTuple, Tuple, Type, TypeVar, Union
import argparse
import concurrent.futures
import functools as ft
import io
import json
import os
import sys
from decimal import Decimal

from pydantic import BaseModel, ValidationError
from rich.progress import track

from . import defaults
from .errors import MalformedLine, MissingField
from .normalize import slugify
from .records import (AuthorisationStatus, BnfMonograph, DrugBankEntry,
                      MmaProduct, PubChemCompound)

console = defaults.console

Record = TypeVar('Record', bound=BaseModel)

# reasons a record can be dropped by the cleaning pass
INVALID = 'invalid'
WITHDRAWN = 'withdrawn'
DUPLICATE = 'duplicate'


class Dropped(NamedTuple):
    record: Any
    reason: str


class CleanResult(NamedTuple):
    kept: List[Any]
    dropped: List[Dropped]


class SourceBundle(NamedTuple):
    '''The four cleaned corpora, plus the cleaning report of each.'''
    mma: List[MmaProduct]
    bnf: List[BnfMonograph]
    drugbank: List[DrugBankEntry]
    pubchem: List[PubChemCompound]
    cleaning: Dict[str, CleanResult]


def _read_all(data: Union[bytes, BinaryIO]) -> bytes:
    if isinstance(data, (bytes, bytearray)):
        return bytes(data)
    return data.read()


def _parse_jsonl(data: Union[bytes, BinaryIO],
                 model: Type[Record]) -> List[Record]:
    '''
    Parse JSON-Lines into records of ``model``, stopping at the first
    structural problem. Domain invariants are not checked here.
    '''
    records: List[Record] = []
    for line_no, raw in enumerate(_read_all(data).splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            text = raw.decode('utf-8')
        except UnicodeDecodeError as e:
            raise MalformedLine(line_no, f'invalid UTF-8: {e.reason}')
        try:
            obj = json.loads(text, parse_float=Decimal)
        except json.JSONDecodeError as e:
            raise MalformedLine(line_no, f'invalid JSON: {e.msg}')
        if not isinstance(obj, dict):
            raise MalformedLine(line_no,
                                f'expected an object, got {type(obj).__name__}')
        try:
            records.append(model.model_validate(obj))
        except ValidationError as e:
            err = e.errors()[0]
            loc = '.'.join(str(x) for x in err['loc'])
            if err['type'] == 'missing':
                raise MissingField(line_no, loc)
            raise MalformedLine(line_no, f'{loc}: {err["msg"]}')
    return records


def parse_mma(data: Union[bytes, BinaryIO]) -> List[MmaProduct]:
    '''
    Parse the medicines registry fixture.

    Args:
        data: UTF-8 JSON-Lines content, as bytes or a binary stream.

    Returns:
        List[MmaProduct]: one record per non-blank line, in file order.

    Raises:
        MalformedLine: bad JSON, a non-object line, a wrong field type
            or an unknown field.
        MissingField: a required field is absent.
    '''
    return _parse_jsonl(data, MmaProduct)


def parse_bnf(data: Union[bytes, BinaryIO]) -> List[BnfMonograph]:
    return _parse_jsonl(data, BnfMonograph)


def parse_drugbank(data: Union[bytes, BinaryIO]) -> List[DrugBankEntry]:
    return _parse_jsonl(data, DrugBankEntry)


def parse_pubchem(data: Union[bytes, BinaryIO]) -> List[PubChemCompound]:
    return _parse_jsonl(data, PubChemCompound)


def serialize_fixture(records: Iterable[BaseModel]) -> bytes:
    '''
    Write records back as compact JSON-Lines, one object per line.
    '''
    out = io.StringIO()
    for record in records:
        out.write(
            json.dumps(record.model_dump(mode='json', exclude_defaults=True),
                       ensure_ascii=False,
                       separators=(',', ':')))
        out.write('\n')
    return out.getvalue().encode('utf-8')


def _clean(records: Iterable[Any],
           keys: Callable[[Any], Tuple[Any, ...]],
           describe: Callable[[Any], str],
           verbose: bool = False) -> CleanResult:
    kept: List[Any] = []
    dropped: List[Dropped] = []
    seen = set()
    for record in records:
        problems = record.invariant_violations()
        if problems:
            reason = INVALID
        elif getattr(record, 'status',
                     AuthorisationStatus.AUTHORISED) != AuthorisationStatus.AUTHORISED:
            reason = WITHDRAWN
        elif seen.intersection(keys(record)):
            reason = DUPLICATE
        else:
            seen.update(keys(record))
            kept.append(record)
            continue
        dropped.append(Dropped(record, reason))
        if verbose:
            detail = f' ({"; ".join(problems)})' if problems else ''
            console.log(f'dropped {describe(record)} as {reason}{detail}')
    return CleanResult(kept, dropped)


def clean_mma(records: Iterable[MmaProduct],
              verbose: bool = False) -> CleanResult:
    '''
    Drop invalid, non-authorised and duplicate registry entries.

    The checks run in that order, so a withdrawn duplicate is reported as
    withdrawn. The first occurrence of an authorisation number is kept.
    Numbers that differ only in separators (``MA1/01``, ``MA1-01``) count
    as the same number, and so does a product whose IRI slug another
    product already claimed. Suspended products are reported as withdrawn.
    '''
    return _clean(records,
                  keys=lambda r: (('number', slugify(r.authorisation_number)),
                                  ('slug', r.product_slug())),
                  describe=lambda r: repr(r.medicine_name),
                  verbose=verbose)


def clean_bnf(records: Iterable[BnfMonograph],
              verbose: bool = False) -> CleanResult:
    '''
    Monographs whose names slug to the same id (``Co-amoxiclav`` and
    ``Co amoxiclav``) are duplicates; the first one is kept.
    '''
    return _clean(records,
                  keys=lambda r: (r.monograph_id,),
                  describe=lambda r: f'monograph {r.name!r}',
                  verbose=verbose)


def clean_drugbank(records: Iterable[DrugBankEntry],
                   verbose: bool = False) -> CleanResult:
    return _clean(records,
                  keys=lambda r: (r.drugbank_id,),
                  describe=lambda r: r.drugbank_id or repr(r.primary_name),
                  verbose=verbose)


def clean_pubchem(records: Iterable[PubChemCompound],
                  verbose: bool = False) -> CleanResult:
    return _clean(records,
                  keys=lambda r: (r.cid,),
                  describe=lambda r: f'CID {r.cid}',
                  verbose=verbose)


PARSERS = {
    'mma': (parse_mma, clean_mma),
    'bnf': (parse_bnf, clean_bnf),
    'drugbank': (parse_drugbank, clean_drugbank),
    'pubchem': (parse_pubchem, clean_pubchem),
}


def load_source(source: str,
                path: str,
                verbose: bool = False) -> CleanResult:
    '''
    Parse and clean one source file. A missing file is an empty source.
    '''
    parse, clean = PARSERS[source]
    if not os.path.exists(path):
        if verbose:
            console.log(f'{source}: {path} not found, treated as empty')
        return CleanResult([], [])
    with open(path, 'rb') as f:
        records = parse(f)
    result = clean(records, verbose=verbose)
    if verbose:
        console.log(f'{source}: {len(records)} parsed, '
                    f'{len(result.kept)} kept, {len(result.dropped)} dropped')
    return result


def load_sources(data_dir: str,
                 parallelism: int = 4,
                 verbose: bool = False) -> SourceBundle:
    '''
    Read the four fixture files of ``data_dir`` concurrently and clean them.
    '''
    sources = list(defaults.SOURCE_FILES.keys())
    paths = [os.path.join(data_dir, defaults.SOURCE_FILES[s]) for s in sources]
    worker = ft.partial(load_source, verbose=verbose)
    with concurrent.futures.ThreadPoolExecutor(
            max_workers=max(1, parallelism)) as ex:
        results = list(
            track(ex.map(worker, sources, paths),
                  total=len(sources),
                  description=f'Ingest[{parallelism}]:',
                  console=console,
                  transient=True,
                  disable=not verbose))
    cleaning = dict(zip(sources, results))
    return SourceBundle(mma=cleaning['mma'].kept,
                        bnf=cleaning['bnf'].kept,
                        drugbank=cleaning['drugbank'].kept,
                        pubchem=cleaning['pubchem'].kept,
                        cleaning=cleaning)


def main(argv: List[str]) -> None:
    '''
    Parse and clean one fixture file, then summarize it.
    '''
    parser = argparse.ArgumentParser()
    parser.add_argument('source', choices=list(PARSERS.keys()))
    parser.add_argument('path', type=str)
    args = parser.parse_args(argv)
    result = load_source(args.source, args.path, verbose=True)
    for item in result.dropped:
        console.print(item.reason, repr(item.record))


if __name__ == '__main__':  # pragma: no cover
    main(sys.argv[1:])
