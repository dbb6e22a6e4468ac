import pytest

from oscint.config import MAX_GRID, ExperimentConfig
from oscint.fields import ValidationError
from oscint.report import PASS
from oscint.runner import RUNNERS, run
from oscint.trilinear import SamplingRuleError

PHASE = 'x^2*y - x*y^2'


def test_every_subcommand_has_a_runner():
    assert set(RUNNERS) == {'analyze', 'resolve', 'decay', 'sublevel', 'decompose', 'profile'}


def test_config_is_checked():
    with pytest.raises(ValidationError):
        run(ExperimentConfig(subcommand='decay'))


class TestAnalyze:
    def test_nondegenerate(self):
        report = run(ExperimentConfig(subcommand='analyze', phase=PHASE))
        result, = report.results
        assert result['H'] == '4'
        assert result['degenerate'] is False
        assert result['exponent'] == '1/6'
        assert result['shear_orders'] == [0, 0]
        assert report.constants == {'d': 0, 'exponent': '1/6'}
        assert [c.name for c in report.checks] == ['vertex-order-bound', 'shear-invariance']
        assert report.verdict == PASS
        assert set(report.timings) == {'total'}

    def test_config_is_echoed(self):
        report = run(ExperimentConfig(subcommand='analyze', phase=PHASE))
        assert report.config['phase'] == PHASE
        assert report.config['window'] == ['0', '1/8', '0', '1/8']
        assert report.config['mu'] == '1'

    def test_degenerate(self):
        report = run(ExperimentConfig(subcommand='analyze', phase='x^4 + (x + y)^3'))
        result, = report.results
        assert result['degenerate'] is True
        assert result['exponent'] == 'degenerate'
        assert report.checks == []
        assert report.verdict == PASS

    def test_reproducible(self):
        config = ExperimentConfig(subcommand='analyze', phase='x^3*y + x*y^2')
        assert run(config).canonical_json() == run(config).canonical_json()


class TestResolve:
    @pytest.fixture(scope='class')
    def report(self):
        return run(ExperimentConfig(subcommand='resolve', hessian='y - x', scales=[-1], max_depth=3, samples=2000))

    def test_default_delta_is_a_quarter_of_delta0(self, report):
        audits = report.results[0]['audits']
        assert audits['bernstein_delta0'] > 0
        assert audits['delta'] == pytest.approx(audits['bernstein_delta0'] / 4)
        assert report.constants['j=-1']['delta'] == audits['delta']

    def test_delta_drift_of_linear_h(self, report):
        checks = {c.name: c for c in report.checks}
        assert checks['bernstein delta0 drift j=-1'].verdict == PASS
        audits = report.results[0]['audits']
        assert audits['bernstein_delta0_finer'] == pytest.approx(audits['bernstein_delta0'], rel=1e-5)

    def test_delta_override(self):
        config = ExperimentConfig(subcommand='resolve', hessian='y - x', scales=[-1], max_depth=3, samples=2000,
                                  delta=0.01)
        assert run(config).results[0]['audits']['delta'] == 0.01


class TestDecompose:
    def test_half_square(self):
        report = run(ExperimentConfig(subcommand='decompose', domain='y - x >= 0'))
        result, = report.results
        assert result['area'] == pytest.approx(0.5, abs=1e-9)
        assert result['sampled_area'] == pytest.approx(0.5, abs=2e-3)
        checks = {c.name: c for c in report.checks}
        assert list(checks) == ['area', 'monotone', 'containment', 'trapezoid count']
        assert checks['area'].verdict == PASS
        assert checks['monotone'].verdict == PASS
        assert len(report.tables['trapezoids']) == report.constants['count'] == 1
        assert report.tables['boundaries']


class TestDecay:
    def test_extremizer_slope(self):
        config = ExperimentConfig(subcommand='decay', phase=PHASE, n=128, restarts=4, iters=30)
        report = run(config)
        checks = {c.name: c for c in report.checks}
        assert checks['extremizer slope'].verdict == PASS
        assert set(checks) == {'extremizer slope', 'norm slope', 'norms non-increasing'}
        rows = report.tables['sweep']
        assert [row['lambda'] for row in rows] == config.lambdas
        assert all(0 < row['norm'] <= 1 for row in rows)
        assert report.constants['d'] == 0
        assert report.results[0]['theory_slope'] == '-1/6'

    def test_unit_square_breaks_the_sampling_rule(self):
        # lambda = 2^14 on [0, 1]^2 needs far more than the largest grid
        config = ExperimentConfig(subcommand='decay', phase=PHASE, window=['0', '1', '0', '1'], n=2048,
                                  lambdas=[2.0 ** k for k in range(8, 15)])
        with pytest.raises(SamplingRuleError) as err:
            run(config)
        assert err.value.minimal_n > MAX_GRID
        assert 'points per axis' in err.value.msg

    def test_small_window_reaches_lambda_2_14(self):
        config = ExperimentConfig(subcommand='decay', phase=PHASE, n=256, restarts=4, iters=30,
                                  lambdas=[2.0 ** k for k in range(8, 15)])
        report = run(config)
        checks = {c.name: c for c in report.checks}
        assert checks['extremizer slope'].verdict == PASS
        assert report.constants['minimal_n'] <= 256
        assert report.results[0]['extremizer_slope'] == pytest.approx(-1 / 6, abs=0.03)

    def test_first_order_hessian(self):
        # S = x^3 y / 6 has H = x, so d = 1
        config = ExperimentConfig(subcommand='decay', phase='x^3*y/6', n=128, restarts=4, iters=30)
        report = run(config)
        checks = {c.name: c for c in report.checks}
        assert report.constants['d'] == 1
        assert report.results[0]['theory_slope'] == '-1/8'
        assert checks['extremizer slope'].verdict == PASS
        assert report.results[0]['extremizer_slope'] == pytest.approx(-1 / 8, abs=0.03)

    def test_seeded_runs_match(self):
        config = ExperimentConfig(subcommand='decay', phase=PHASE, n=64, restarts=4, iters=10, seed=5)
        assert run(config).canonical_json() == run(config).canonical_json()


if __name__ == '__main__':
    pytest.main()
