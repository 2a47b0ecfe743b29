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

import pytest

from medicx import graph
from medicx import ingest
from medicx import resolve

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), '..',
                        'fixtures')


@pytest.fixture(scope='session')
def fixtures_dir() -> str:
    return FIXTURES


@pytest.fixture(scope='session')
def bundle():
    return ingest.load_sources(FIXTURES, parallelism=2)


@pytest.fixture(scope='session')
def index(bundle):
    return resolve.build_indexes(bundle.bnf, bundle.drugbank, bundle.pubchem)


@pytest.fixture(scope='session')
def mappings(bundle, index):
    return resolve.resolve_all(bundle.mma, index, parallelism=2)


@pytest.fixture(scope='session')
def store(bundle, mappings):
    return graph.build_graph(bundle.mma, bundle.bnf, bundle.drugbank,
                             bundle.pubchem, mappings)
