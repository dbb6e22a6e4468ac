import csv
import json
import os
from fractions import Fraction

import numpy as np
import pytest

from oscint.fields import ValidationError
from oscint.report import *


@pytest.fixture
def report():
    checks = [
        Check.compare('extremizer slope', -0.16, -0.2, -0.13),
        Check.boolean('monotone', True, 'every trapezoid is monotone'),
    ]
    return RunReport(
        subcommand='analyze',
        config={'phase': 'x^2*y - x*y^2', 'n': 64},
        results=[{'d': 0, 'exponent': Fraction(1, 6)}],
        checks=checks,
        tables={'sweep': [{'lam': 256.0, 'norm': 0.5}, {'lam': 512.0, 'norm': 0.45, 'flag': True}]},
        timings={'total': 0.25},
        verdict=overall_verdict(checks),
    )


class TestCheck:
    def test_compare(self):
        check = Check.compare('ratio', 0.5, 0, 1)
        assert check.verdict == PASS
        assert check.comparison == '0 <= 0.5 <= 1'
        assert check.measured == 0.5
        assert check.target == [0, 1]

    def test_one_sided(self):
        check = Check.compare('sigma', 3.0, lo=1)
        assert check.comparison == '1 <= 3'
        assert check.target == [1, None]
        assert Check.compare('sigma', 0.5, lo=1).verdict == FAIL
        assert Check.compare('overlap', 7, hi=4).verdict == FAIL

    def test_inconclusive(self):
        assert Check.compare('slope', 0.5, 0, 1, inconclusive=True).verdict == INCONCLUSIVE

    def test_numpy_measurements(self):
        check = Check.compare('norm', np.float64(0.25), 0, 1)
        assert type(check.measured) is float

    def test_boolean(self):
        check = Check.boolean('containment', False, 'samples stay inside')
        assert check.verdict == FAIL
        assert check.measured is False
        assert check.target is True

    def test_bad_verdict(self):
        with pytest.raises(ValidationError):
            Check(name='x', verdict='maybe', comparison='')


def test_overall_verdict():
    ok = Check.boolean('a', True, 'a')
    bad = Check.boolean('b', False, 'b')
    unsure = Check.compare('c', 1, 0, 2, inconclusive=True)
    assert overall_verdict([]) == PASS
    assert overall_verdict([ok, unsure]) == INCONCLUSIVE
    assert overall_verdict([unsure, bad, ok]) == FAIL


def test_json_ready():
    data = json_ready({1: (np.int64(2), np.bool_(True)), 'x': np.array([0.5, np.nan])})
    assert data == {'1': [2, True], 'x': [0.5, None]}
    assert json.dumps(data)


class TestRunReport:
    def test_exit_code(self, report):
        assert report.verdict == PASS
        assert report.exit_code == 0
        assert report.replace(verdict=FAIL).exit_code == 2
        assert report.replace(verdict=INCONCLUSIVE).exit_code == 3

    def test_schema(self, report):
        assert report.schema == SCHEMA
        with pytest.raises(ValidationError):
            report.replace(schema='oscint/0')

    def test_checks_are_records(self, report):
        assert [c.name for c in report.checks] == ['extremizer slope', 'monotone']
        assert isinstance(report.checks[0], Check)

    def test_summary(self, report):
        s = report.summary()
        assert s.subcommand == 'analyze'
        assert s.config.n == 64
        assert s.results[0].exponent == Fraction(1, 6)
        assert s.checks[1]['verdict'] == PASS

    def test_canonical_json(self, report):
        text = report.canonical_json()
        assert json.loads(text)['timings'] == {}
        assert report.replace(timings={'total': 9.0}).canonical_json() == text


class TestEmit:
    def test_round_trip(self, report, tmp_path):
        written = emit(report, str(tmp_path / 'run'))
        names = sorted(os.path.basename(p) for p in written)
        assert names == ['summary.json', 'sweep.csv']
        loaded = load_report(str(tmp_path / 'run' / 'summary.json'))
        assert loaded.verdict == PASS
        assert loaded.results[0]['exponent'] == '1/6'
        assert loaded.checks[0].comparison == report.checks[0].comparison

    def test_csv(self, report, tmp_path):
        emit(report, str(tmp_path), formats=['csv'])
        assert not (tmp_path / 'summary.json').exists()
        with open(str(tmp_path / 'sweep.csv'), newline='') as f:
            rows = list(csv.DictReader(f))
        assert list(rows[0]) == ['lam', 'norm', 'flag']
        assert rows[0]['flag'] == ''
        assert rows[1]['norm'] == '0.45'

    def test_bad_format(self, report, tmp_path):
        with pytest.raises(ValueError):
            emit(report, str(tmp_path), formats=['xml'])

    def test_unwritable(self, report, tmp_path):
        blocker = tmp_path / 'file'
        blocker.write_text('')
        with pytest.raises(ReportError) as err:
            emit(report, str(blocker / 'run'))
        assert 'cannot write' in err.value.msg

    def test_invalid_report(self, tmp_path):
        path = tmp_path / 'summary.json'
        path.write_text(json.dumps({'schema': 'other/2', 'subcommand': 'analyze', 'config': {}}))
        with pytest.raises(ReportError) as err:
            load_report(str(path))
        assert 'not a valid report' in err.value.msg


if __name__ == '__main__':
    pytest.main()
