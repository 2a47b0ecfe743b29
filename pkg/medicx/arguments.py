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
import argparse
import sys
import textwrap

from . import defaults

console = defaults.console


class _ArgumentParser(argparse.ArgumentParser):
    '''
    usage errors are reported the same way as every other error, and
    exit with status 2.
    '''

    def error(self, message: str):
        console.print(f'error[usage]: {message}', markup=False,
                      highlight=False)
        sys.exit(2)


def _key_value(text: str) -> List[str]:
    if '=' not in text:
        raise argparse.ArgumentTypeError(f'expected key=value, got {text!r}')
    key, value = text.split('=', 1)
    return [key.strip(), value]


def parse_args(argv: List[str]) -> argparse.Namespace:
    '''
    argparse with subparsers. Generate a config.toml template as byproduct.
    '''

    # helper functions
    def __add_arg_to_config(template,
                            parser,
                            argname,
                            formatter=repr):
        '''
        The config.toml template is written from the help messages of the
        argument parser, so that every option is documented once.
        '''
        template += '\n'.join('# ' + x for x in textwrap.wrap(
            parser._option_string_actions['--' + argname.replace('_', '-')].help))
        template += f'''\n{argname} = {formatter(getattr(conf, argname))}\n'''
        return template

    def _toml(value):
        if isinstance(value, str):
            return '"' + value.replace('\\', '\\\\').replace('"', '\\"') + '"'
        return repr(value)

    # if ~/.medicx/config.toml exists, parse it to override the built-in defaults.
    _verbose = any(x in argv for x in ('-v', '--verbose'))
    conf = defaults.Config(verbose=_verbose)

    # override the loaded configurations again with command line arguments
    ag = _ArgumentParser(
        prog='medicx',
        description='Build and query a pharmaceutical knowledge graph.')

    # Pipeline inputs
    config_template = '''\
#######################
# Pipeline inputs
#######################
\n'''
    _g = ag.add_argument_group('Pipeline inputs')
    _g.add_argument('--data-dir',
                    '-d',
                    dest='data_dir',
                    type=str,
                    default=conf['data_dir'],
                    help='directory holding mma.jsonl, bnf.jsonl, \
drugbank.jsonl and pubchem.jsonl. MEDICX_DATA_DIR overrides this setting.')
    config_template = __add_arg_to_config(config_template, ag, 'data_dir',
                                          _toml)
    _g.add_argument('--lexicon',
                    type=str,
                    default=conf['lexicon'],
                    help='salt lexicon, one salt name per line. \
MEDICX_LEXICON overrides this setting.')
    config_template = __add_arg_to_config(config_template, ag, 'lexicon',
                                          _toml)
    _g.add_argument('--spelling',
                    type=str,
                    default=conf['spelling'],
                    help='spelling map, one tab-separated variant and \
canonical spelling per line.')
    config_template = __add_arg_to_config(config_template, ag, 'spelling',
                                          _toml)

    # Pipeline behavior
    config_template += '''\n
#######################
# Pipeline behavior
#######################
\n'''
    _g = ag.add_argument_group('Pipeline behavior')
    _g.add_argument('--parallelism',
                    '-j',
                    type=int,
                    default=conf['parallelism'],
                    help='number of worker threads used to parse sources, \
resolve products and run competency questions.')
    config_template = __add_arg_to_config(config_template, ag, 'parallelism')
    _g.add_argument('--graph-out',
                    dest='graph_out',
                    type=str,
                    default=conf['graph_out'],
                    help='default N-Quads file written by build and read by \
export, query, cq and stats.')
    config_template = __add_arg_to_config(config_template, ag, 'graph_out',
                                          _toml)
    _g.add_argument('--verbose',
                    '-v',
                    action='store_true',
                    help='verbose mode. log stage progress to stderr')
    _g.add_argument('--version',
                    action='store_true',
                    help='show the version and quit')

    # -- subparsers
    subps = ag.add_subparsers(help='subcommands', dest='subparser_name')

    ps = subps.add_parser('ingest',
                          help='parse and clean one source file')
    ps.add_argument('--source',
                    '-s',
                    required=True,
                    choices=list(defaults.SOURCE_FILES.keys()),
                    help='which source the file holds')
    ps.add_argument('--in',
                    dest='input',
                    type=str,
                    required=True,
                    help='JSON-Lines file to read')
    ps.add_argument('--out',
                    '-o',
                    type=str,
                    default=None,
                    help='write the kept records as JSON-Lines')

    ps = subps.add_parser('map', help='resolve every product ingredient')
    ps.add_argument('--report',
                    type=str,
                    default=None,
                    help='write the mapping report as JSON')
    ps.add_argument('--mappings',
                    type=str,
                    default=None,
                    help='write the mapping results as JSON')

    ps = subps.add_parser('build', help='build the knowledge graph')
    ps.add_argument('--mappings',
                    type=str,
                    default=None,
                    help='read mapping results from JSON instead of \
resolving the products again')
    ps.add_argument('--out',
                    '-o',
                    type=str,
                    default=None,
                    help='N-Quads file to write (default: graph_out)')

    ps = subps.add_parser('export', help='convert the graph')
    ps.add_argument('--format',
                    '-f',
                    dest='fmt',
                    choices=('nquads', 'ntriples'),
                    default='nquads',
                    help='output serialization')
    ps.add_argument('--in',
                    dest='input',
                    type=str,
                    default=None,
                    help='N-Quads file to read (default: graph_out)')
    ps.add_argument('--out',
                    '-o',
                    type=str,
                    required=True,
                    help='file to write')

    ps = subps.add_parser('query', help='run a query and print TSV')
    ps.add_argument('--file',
                    '-f',
                    type=str,
                    required=True,
                    help='query file to run')
    ps.add_argument('--param',
                    '-p',
                    type=_key_value,
                    action='append',
                    default=[],
                    help='substitute mdx:<key> with the given value, \
can be repeated')
    ps.add_argument('--graph',
                    '-g',
                    type=str,
                    default=None,
                    help='N-Quads file to query (default: graph_out)')

    ps = subps.add_parser('cq', help='competency question harness')
    cq_subps = ps.add_subparsers(help='cq commands', dest='cq_command')
    cq_subps.required = True
    ps_run = cq_subps.add_parser('run', help='grade the competency questions')
    ps_run.add_argument('--reference',
                        '-r',
                        type=str,
                        required=True,
                        help='JSON file of reference answer sets')
    ps_run.add_argument('--report',
                        type=str,
                        default=None,
                        help='write the outcomes as JSON')
    ps_run.add_argument('--graph',
                        '-g',
                        type=str,
                        default=None,
                        help='N-Quads file to query (default: graph_out)')

    ps = subps.add_parser('stats', help='knowledge graph statistics')
    ps.add_argument('--out',
                    '-o',
                    type=str,
                    default=None,
                    help='write the statistics as JSON')
    ps.add_argument('--graph',
                    '-g',
                    type=str,
                    default=None,
                    help='N-Quads file to read (default: graph_out)')

    subps.add_parser('genconfig',
                     aliases=['config.toml'],
                     help='print a config.toml template to stdout')

    # -- parse the cli
    ag = ag.parse_args(argv)
    ag.config_template = config_template
    ag.params = dict(getattr(ag, 'param', None) or [])
    return ag


def main(argv: List[str] = sys.argv[1:]):
    '''
    Print the parsed arguments.
    '''
    args = parse_args(argv)
    console.print('args:', vars(args))


if __name__ == '__main__':  # pragma: no cover
    main()
