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
from typing import List
import sys

from . import arguments
from . import version
from . import cq
from . import defaults
from . import graph
from . import ingest
from . import rdfio
from . import report
from . import resolve
from .errors import MedicxError
from .normalize import SaltLexicon

console = defaults.console


def _lexicon(ag) -> SaltLexicon:
    return SaltLexicon.load(ag.lexicon, ag.spelling)


def _write(path: str, data) -> None:
    mode = 'wb' if isinstance(data, bytes) else 'wt'
    encoding = None if isinstance(data, bytes) else 'utf-8'
    with open(path, mode, encoding=encoding) as f:
        f.write(data)
    console.log(f'wrote {path}')


def _resolve(ag, bundle: ingest.SourceBundle, lexicon: SaltLexicon):
    idx = resolve.build_indexes(bundle.bnf, bundle.drugbank, bundle.pubchem,
                                lexicon=lexicon, verbose=ag.verbose)
    results = resolve.resolve_all(bundle.mma, idx,
                                  parallelism=ag.parallelism,
                                  verbose=ag.verbose)
    return idx, results


def subcmd_ingest(ag) -> None:
    result = ingest.load_source(ag.source, ag.input, verbose=ag.verbose)
    for item in result.dropped:
        console.log(f'dropped ({item.reason}):', repr(item.record))
    if ag.out is not None:
        _write(ag.out, ingest.serialize_fixture(result.kept))
    defaults.stdout.print(f'{ag.source}\tkept {len(result.kept)}\t'
                          f'dropped {len(result.dropped)}')


def subcmd_map(ag) -> None:
    lexicon = _lexicon(ag)
    bundle = ingest.load_sources(ag.data_dir, ag.parallelism, ag.verbose)
    idx, results = _resolve(ag, bundle, lexicon)
    text, doc = report.render_mapping_report(
        resolve.mapping_report(results, idx))
    print(text, end='')
    if ag.report is not None:
        _write(ag.report, doc + '\n')
    if ag.mappings is not None:
        _write(ag.mappings, resolve.dump_mappings(results) + '\n')


def subcmd_build(ag) -> None:
    lexicon = _lexicon(ag)
    bundle = ingest.load_sources(ag.data_dir, ag.parallelism, ag.verbose)
    if ag.mappings is not None:
        with open(ag.mappings, 'rb') as f:
            results = resolve.load_mappings(f.read(), ag.mappings)
    else:
        _, results = _resolve(ag, bundle, lexicon)
    store = graph.build_graph(bundle.mma, bundle.bnf, bundle.drugbank,
                              bundle.pubchem, results,
                              lexicon=lexicon, verbose=ag.verbose)
    out = ag.out or ag.graph_out
    rdfio.write_graph(store, out)
    console.log(f'wrote {len(store)} quads to {out}')


def subcmd_export(ag) -> None:
    store = rdfio.read_graph(ag.input or ag.graph_out)
    rdfio.write_graph(store, ag.out, ag.fmt)
    if ag.verbose:
        console.log(f'exported {len(store)} quads as {ag.fmt} to {ag.out}')


def subcmd_query(ag) -> None:
    with open(ag.file, 'rt', encoding='utf-8') as f:
        text = cq.instantiate(f.read(), ag.params)
    if ag.verbose:
        console.log('query:', text)
    from .query import run_query
    table = run_query(text, rdfio.read_graph(ag.graph or ag.graph_out))
    print(table.to_tsv(), end='')


def subcmd_cq_run(ag) -> None:
    store = rdfio.read_graph(ag.graph or ag.graph_out)
    outcomes = cq.run_all(store, cq.load_references(ag.reference),
                          parallelism=ag.parallelism, verbose=ag.verbose)
    print(report.render_outcomes(outcomes), end='')
    if ag.report is not None:
        _write(ag.report, report.outcomes_document(outcomes) + '\n')


def subcmd_stats(ag) -> None:
    doc = report.kg_stats(rdfio.read_graph(ag.graph or ag.graph_out))
    print(report.render_stats(doc), end='')
    if ag.out is not None:
        _write(ag.out, doc.model_dump_json(indent=2) + '\n')


def subcmd_genconfig(ag) -> None:
    '''
    special task: generate config template, print and quit
    '''
    print(ag.config_template)  # should go to stdout


def _dispatch_subcommand(ag) -> None:
    if ag.subparser_name == 'ingest':
        subcmd_ingest(ag)
    elif ag.subparser_name == 'map':
        subcmd_map(ag)
    elif ag.subparser_name == 'build':
        subcmd_build(ag)
    elif ag.subparser_name == 'export':
        subcmd_export(ag)
    elif ag.subparser_name == 'query':
        subcmd_query(ag)
    elif ag.subparser_name == 'cq':
        if ag.cq_command == 'run':
            subcmd_cq_run(ag)
    elif ag.subparser_name == 'stats':
        subcmd_stats(ag)
    elif ag.subparser_name in ('genconfig', 'config.toml'):
        subcmd_genconfig(ag)
    else:
        raise NotImplementedError(
            f'Subcommand {ag.subparser_name} seems unimplemented.')


def main(argv: List[str] = sys.argv[1:]) -> int:
    '''
    Entry point of the medicx command. Returns the process exit status.
    '''
    ag = arguments.parse_args(argv)
    if ag.verbose:
        console.log('Arguments:', {k: v for (k, v) in vars(ag).items()
                                   if k != 'config_template'})

    # process --version (if any) and exit normally.
    if ag.version:
        version()
        return 0
    if ag.subparser_name is None:
        console.print('error[usage]: a subcommand is required, see --help',
                      markup=False, highlight=False, soft_wrap=True)
        return 2

    try:
        _dispatch_subcommand(ag)
    except MedicxError as e:
        console.print(f'error[{e.code}]: {e}', markup=False, highlight=False,
                      soft_wrap=True)
        return e.exit_status
    except OSError as e:
        name = e.filename if e.filename is not None else ''
        console.print(f'error[io]: {e.strerror or e}: {name}'.rstrip(': '),
                      markup=False, highlight=False, soft_wrap=True)
        return 1
    return 0


if __name__ == '__main__':  # pragma: no cover
    sys.exit(main())
