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
import json
import os

import pytest

from medicx import cq
from medicx.cli import main
from medicx.rdfio import read_graph


@pytest.fixture
def fx(fixtures_dir):
    return lambda name: os.path.join(fixtures_dir, name)


@pytest.fixture(scope='module')
def built(tmp_path_factory, fixtures_dir):
    path = str(tmp_path_factory.mktemp('kg') / 'kg.nq')
    assert main(['-d', fixtures_dir, '-j', '2', 'build', '-o', path]) == 0
    return path


def test_version(capsys):
    assert main(['--version']) == 0
    assert capsys.readouterr().out.startswith('medicX ')


def test_no_subcommand(capsys):
    assert main([]) == 2
    assert 'error[usage]' in capsys.readouterr().err


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as e:
        main(['build', '--no-such-flag'])
    assert e.value.code == 2


def test_genconfig(capsys):
    assert main(['genconfig']) == 0
    out = capsys.readouterr().out
    assert 'data_dir = ' in out
    assert 'graph_out = ' in out


def test_ingest(tmp_path, fx, capsys):
    out = str(tmp_path / 'mma.jsonl')
    assert main(['ingest', '-s', 'mma', '--in', fx('mma.jsonl'), '-o', out]) == 0
    assert 'mma\tkept 35\tdropped 3' in capsys.readouterr().out
    with open(out, 'rb') as f:
        assert len(f.read().splitlines()) == 35
    # the cleaned file is a fixed point
    again = str(tmp_path / 'again.jsonl')
    assert main(['ingest', '-s', 'mma', '--in', out, '-o', again]) == 0
    with open(out, 'rb') as a, open(again, 'rb') as b:
        assert a.read() == b.read()


def test_ingest_malformed(tmp_path, capsys):
    bad = tmp_path / 'bnf.jsonl'
    bad.write_text('{not json\n')
    assert main(['ingest', '-s', 'bnf', '--in', str(bad)]) == 2
    err = capsys.readouterr().err
    assert 'error[malformed-line]' in err


def test_map(tmp_path, fixtures_dir, capsys):
    report = str(tmp_path / 'report.json')
    mappings = str(tmp_path / 'mappings.json')
    assert main(['-d', fixtures_dir, 'map', '--report', report, '--mappings',
                 mappings]) == 0
    out = capsys.readouterr().out
    assert 'Mapping tiers' in out
    assert 'PubChem mapping outcomes' in out
    with open(report) as f:
        doc = json.load(f)
    assert doc['total'] == 38
    assert doc['tier_counts']['BnfDirect'] == 18
    with open(mappings) as f:
        assert len(json.load(f)) == 38


def test_build_deterministic(tmp_path, fixtures_dir, built):
    again = str(tmp_path / 'again.nq')
    assert main(['-d', fixtures_dir, '-j', '7', 'build', '-o', again]) == 0
    with open(built, 'rb') as a, open(again, 'rb') as b:
        assert a.read() == b.read()


def test_build_from_mappings(tmp_path, fixtures_dir, built):
    mappings = str(tmp_path / 'mappings.json')
    assert main(['-d', fixtures_dir, 'map', '--mappings', mappings]) == 0
    out = str(tmp_path / 'kg.nq')
    assert main(['-d', fixtures_dir, 'build', '--mappings', mappings, '-o',
                 out]) == 0
    assert read_graph(out) == read_graph(built)


def test_build_default_output(tmp_path, fixtures_dir, built):
    out = str(tmp_path / 'default.nq')
    assert main(['-d', fixtures_dir, '--graph-out', out, 'build']) == 0
    assert read_graph(out) == read_graph(built)


def test_export(tmp_path, built):
    nt = str(tmp_path / 'kg.nt')
    assert main(['export', '--in', built, '-f', 'ntriples', '-o', nt]) == 0
    with open(nt) as f:
        lines = f.read().splitlines()
    assert len(lines) == len(read_graph(built).triples())
    nq = str(tmp_path / 'kg.nq')
    assert main(['--graph-out', built, 'export', '-o', nq]) == 0
    with open(built, 'rb') as a, open(nq, 'rb') as b:
        assert a.read() == b.read()


def test_export_missing_input(tmp_path, capsys):
    missing = str(tmp_path / 'missing.nq')
    assert main(['export', '--in', missing, '-o', str(tmp_path / 'x')]) == 1
    assert 'error[io]' in capsys.readouterr().err


def test_query(built, capsys):
    assert main(['query', '-f', cq.template_path('CQ4'), '-p',
                 'drugX=ibuprofen', '-g', built]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == '?sideEffectName\t?sideEffectSeverity'
    assert len(lines) == 5
    assert '"Gastrointestinal haemorrhage"\t"severe"' in lines


def test_query_errors(tmp_path, built, capsys):
    q = tmp_path / 'bad.rq'
    q.write_text('SELECT ?x WHERE { ?x <http://e/p> }')
    assert main(['query', '-f', str(q), '-g', built]) == 2
    assert 'error[query-parse]: line 1, column 35' in capsys.readouterr().err
    q.write_text('SELECT ?x WHERE { ?x ex:p ?y }')
    assert main(['query', '-f', str(q), '-g', built]) == 2
    assert 'error[unknown-prefix]' in capsys.readouterr().err


def test_cq_run(tmp_path, fx, built, capsys):
    report = str(tmp_path / 'cq.json')
    assert main(['-j', '3', 'cq', 'run', '-r', fx('cq-refs.json'), '-g', built,
                 '--report', report]) == 0
    out = capsys.readouterr().out
    assert 'Competency questions' in out
    with open(report) as f:
        doc = json.load(f)
    assert [d['classification'] for d in doc] == [
        'NotMet', 'FullyMet', 'FullyMet', 'FullyMet', 'PartiallyMet',
        'FullyMet', 'PartiallyMet'
    ]


def test_cq_unknown(tmp_path, built, capsys):
    refs = tmp_path / 'refs.json'
    refs.write_text('[{"cq_id": "CQ9"}]')
    assert main(['cq', 'run', '-r', str(refs), '-g', built]) == 1
    assert 'error[unknown-cq]' in capsys.readouterr().err


@pytest.mark.parametrize('content, reason', (
    ('[{"cq_id": "CQ1", ', 'invalid JSON'),
    ('{"cq_id": "CQ1"}', 'expected a list'),
    ('[{"cq_id": "CQ1", "answers": []}]', '0.answers'),
))
def test_cq_malformed_references(tmp_path, built, capsys, content, reason):
    refs = tmp_path / 'refs.json'
    refs.write_text(content)
    assert main(['cq', 'run', '-r', str(refs), '-g', built]) == 2
    err = capsys.readouterr().err
    assert 'error[malformed-document]' in err
    assert reason in err
    assert 'Traceback' not in err


@pytest.mark.parametrize('content, reason', (
    ('not json', 'invalid JSON'),
    ('{}', 'expected a list'),
    ('[{"subject": {}, "tier": "Nowhere", "trail": []}]', '0.tier'),
))
def test_build_malformed_mappings(tmp_path, fixtures_dir, capsys, content,
                                  reason):
    mappings = tmp_path / 'mappings.json'
    mappings.write_text(content)
    assert main(['-d', fixtures_dir, 'build', '--mappings', str(mappings),
                 '-o', str(tmp_path / 'kg.nq')]) == 2
    err = capsys.readouterr().err
    assert 'error[malformed-document]' in err
    assert reason in err
    assert not (tmp_path / 'kg.nq').exists()


def test_stats(tmp_path, built, capsys):
    out = str(tmp_path / 'stats.json')
    assert main(['stats', '-g', built, '-o', out]) == 0
    assert 'Entity statistics' in capsys.readouterr().out
    with open(out) as f:
        doc = json.load(f)
    products = [r for r in doc['entities'] if r['label'] == 'Product']
    assert products[0]['count'] == 35
