import json

import pytest

from oscint.cli import build_parser, config_from_args, main
from oscint.report import EXIT_CODES, load_report

PHASE = 'x^2*y - x*y^2'


def parse(*argv):
    return config_from_args(build_parser().parse_args(list(argv)))


class TestConfigFromArgs:
    def test_lambda_range(self):
        cfg = parse('decay', '--phase', PHASE, '--lambda-min', '16', '--lambda-max', '256', '--points', '5',
                    '-v', '--mongo-uri', 'mongodb://localhost:27017')
        assert cfg.lambdas == [16.0, 32.0, 64.0, 128.0, 256.0]
        assert 'mongo_uri' not in cfg
        assert 'verbose' not in cfg
        assert 'points' not in cfg

    def test_defaults_survive(self):
        cfg = parse('decay', '--phase', PHASE, '--n', '64', '--window', '0,1/4,0,1/4')
        assert cfg.n == 64
        assert cfg.lambdas == [256.0, 512.0, 1024.0, 2048.0, 4096.0]
        assert [str(v) for v in cfg.window] == ['0', '1/4', '0', '1/4']

    def test_mu_range(self):
        cfg = parse('sublevel', '--H', 'y', '--conditions', '0,1', '--mu-min', '0.0625', '--mu-max', '0.25',
                    '--points', '3', '--n', '64')
        assert cfg.hessian == 'y'
        assert cfg.mus == [0.0625, 0.125, 0.25]
        assert cfg.conditions == [[0, 1]]
        assert len(cfg.lambdas) == 5

    def test_profile(self):
        cfg = parse('profile', '--phase', PHASE, '--lambda', '64', '--j-range=-2:-1')
        assert cfg.lambdas == [64.0]
        assert cfg.j_range == [-2, -1]

    def test_resolve(self):
        cfg = parse('resolve', '--H', 'y^2 - x^3', '--j', '-4', '--j', '-3', '--mu', '1/2', '--format', 'json')
        assert cfg.scales == [-4, -3]
        assert str(cfg.mu) == '1/2'
        assert cfg.formats == ['json']

    def test_phase_from_file(self, tmp_path):
        path = tmp_path / 'phase.txt'
        path.write_text(PHASE + '\n')
        assert parse('analyze', '--phase', str(path)).phase == PHASE

    @pytest.mark.parametrize('argv', [
        ['decay', '--window', '0,1'],
        ['sublevel', '--conditions', 'a,b'],
        ['profile', '--j-range', '-2'],
        ['fit'],
    ])
    def test_bad_flags(self, argv):
        with pytest.raises(SystemExit):
            build_parser().parse_args(argv)


class TestMain:
    def test_analyze(self, tmp_path, capsys):
        out = tmp_path / 'analyze'
        assert main(['analyze', '--phase', PHASE, '--output', str(out)]) == 0
        report = load_report(str(out / 'summary.json'))
        assert report.results[0]['exponent'] == '1/6'
        assert 'analyze: pass' in capsys.readouterr().out

    def test_too_few_lambdas(self, tmp_path, capsys):
        code = main(['decay', '--phase', PHASE, '--points', '1', '--output', str(tmp_path)])
        assert code == 1
        err = capsys.readouterr().err
        assert 'at least 5 lambdas' in err
        assert 'hint:' in err

    def test_degenerate_decay(self, tmp_path, capsys):
        code = main(['decay', '--phase', 'x^4 + (x + y)^3', '--output', str(tmp_path)])
        assert code == 1
        err = capsys.readouterr().err
        assert 'no decay' in err
        assert 'oscint analyze' in err
        assert not (tmp_path / 'summary.json').exists()

    def test_parse_error(self, tmp_path, capsys):
        assert main(['analyze', '--phase', 'x^2 + z', '--output', str(tmp_path)]) == 1
        assert 'hint: polynomials use' in capsys.readouterr().err

    def test_decompose(self, tmp_path):
        code = main(['decompose', '--domain', 'y - x >= 0', '--output', str(tmp_path)])
        report = load_report(str(tmp_path / 'summary.json'))
        assert code == EXIT_CODES[report.verdict]
        with open(str(tmp_path / 'summary.json')) as f:
            assert json.load(f)['schema'] == 'oscint/1'
        assert (tmp_path / 'trapezoids.csv').exists()


if __name__ == '__main__':
    pytest.main()
