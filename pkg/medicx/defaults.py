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
import os
from rich.console import Console
from rich.traceback import install

try:
    import tomllib
except ImportError:  # pragma: no cover
    import tomli as tomllib  # python < 3.11

install()

# default console that writes to stderr
console = Console(stderr=True)

# tables and TSV go to stdout. no colors, no soft wrapping, so that the
# output stays byte-stable when redirected to a file.
stdout = Console(color_system=None, soft_wrap=True, highlight=False)

########################
# Bundled data files
########################

DATA = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data')
SALTS = os.path.join(DATA, 'salts.txt')
SPELLING = os.path.join(DATA, 'spelling.tsv')
CQ_TEMPLATES = os.path.join(DATA, 'cq')

# fixture file names under --data-dir
SOURCE_FILES = {
    'mma': 'mma.jsonl',
    'bnf': 'bnf.jsonl',
    'drugbank': 'drugbank.jsonl',
    'pubchem': 'pubchem.jsonl',
}

########################
# Configuration handling
########################

HOME = os.path.expanduser(os.getenv('MEDICX_HOME', '~/.medicx'))
CONFIG = os.path.join(HOME, 'config.toml')


class Config(object):

    def __init__(self,
                 home: str = HOME,
                 config: str = CONFIG,
                 verbose: bool = False):
        # The built-in defaults will be overridden by config file
        self.toml = {
            # Pipeline inputs
            'data_dir': 'fixtures',
            'lexicon': SALTS,
            'spelling': SPELLING,
            # Pipeline behavior
            'parallelism': 4,
            'graph_out': 'kg.nq',
        }
        # the home directory is never created. no config file, no overrides.
        if os.path.exists(config):
            if verbose:
                console.log(f'Loading configuration from {config}')
            with open(config, 'rb') as f:
                content = tomllib.load(f)
                self.toml.update(content)
        # some arguments will be overridden by environment variables
        if (data_dir := os.getenv('MEDICX_DATA_DIR', None)) is not None:
            if verbose:
                console.log('Found environment variable MEDICX_DATA_DIR.')
            self.toml['data_dir'] = data_dir
        if (lexicon := os.getenv('MEDICX_LEXICON', None)) is not None:
            if verbose:
                console.log('Found environment variable MEDICX_LEXICON.')
            self.toml['lexicon'] = lexicon
        # all the above will be overridden by command line arguments
        self.home = home

    def __getitem__(self, index):
        return self.toml.__getitem__(index)

    def __getattr__(self, index):
        if index == 'toml':
            raise AttributeError(index)
        return self.toml.__getitem__(index)
