import math
from fractions import Fraction

import numpy as np
import pytest

from oscint.algebraic import AlgebraicDomain, decompose_domain
from oscint.newton import DegeneratePhaseError
from oscint.poly import BivarPoly, Rect, parse_poly
from oscint.trilinear import *


def unit_vectors(g, rng):
    vectors = []
    for length in (g.nx, g.ny, g.nx + g.ny - 1):
        f = rng.standard_normal(length) + 1j * rng.standard_normal(length)
        vectors.append(f / discrete_norm(f, g.h))
    return vectors


@pytest.fixture
def flat_grid():
    return assemble_grid(BivarPoly(), CutoffSpec(kind='indicator'), Rect.unit(), 64)


@pytest.fixture
def strip_grid(nondegenerate_phase):
    # phi vanishes for x >= 1/4
    return assemble_grid(nondegenerate_phase, CutoffSpec(support=Rect(0, '1/4', 0, 1)), Rect.unit(), 64)


@pytest.fixture(scope='module')
def whole_square():
    trapezoid, = decompose_domain(AlgebraicDomain())
    return trapezoid


class TestCutoff:
    def test_rejects(self):
        with pytest.raises(GridError) as err:
            CutoffSpec(kind='gauss')
        assert 'gauss' in err.value.msg
        with pytest.raises(GridError):
            CutoffSpec(kind='table')
        with pytest.raises(GridError):
            CutoffSpec(margin=-0.1)

    def test_indicator_keeps_near_edges(self):
        spec = CutoffSpec()
        assert spec.at(0, 0, Rect.unit()) == 1.0
        assert spec.at(1, 0.5, Rect.unit()) == 0.0

    def test_bump(self):
        spec = CutoffSpec(kind='bump')
        domain = Rect.unit()
        assert spec.at(0.25, 0.25, domain) == 1.0
        assert spec.at(0.75, 0.25, domain) == pytest.approx(0.5)
        assert spec.at(1, 0, domain) == 0.0

    def test_table_has_no_point_values(self):
        with pytest.raises(GridError):
            CutoffSpec(kind='table', table=np.ones((32, 32))).at(0, 0, Rect.unit())


class TestAssemble:
    def test_shape(self, nondegenerate_phase):
        g = assemble_grid(nondegenerate_phase, CutoffSpec(), Rect(0, '1/8', 0, '1/4'), 64)
        assert (g.nx, g.ny) == (64, 128)
        assert g.h == 1 / 512
        assert len(g.sums) == 64 + 128 - 1
        assert g.xs[0] == pytest.approx(0.5 / 512)
        assert g.phase[3, 5] == pytest.approx(nondegenerate_phase(g.xs[3], g.ys[5]))

    def test_last_layers_are_zero(self, flat_grid):
        assert not flat_grid.cutoff[-1, :].any()
        assert not flat_grid.cutoff[:, -1].any()
        assert flat_grid.integral() == pytest.approx((63 / 64) ** 2)

    def test_too_small(self):
        with pytest.raises(GridError) as err:
            assemble_grid(BivarPoly(), CutoffSpec(), Rect.unit(), 16)
        assert 'n >= 32' in err.value.msg

    def test_height_not_whole_cells(self):
        with pytest.raises(GridError):
            assemble_grid(BivarPoly(), CutoffSpec(), Rect(0, 1, 0, '1/3'), 64)

    def test_support_outside_domain(self):
        spec = CutoffSpec(support=Rect(0, 2, 0, 1))
        with pytest.raises(GridError):
            assemble_grid(BivarPoly(), spec, Rect.unit(), 64)
        assert assemble_grid(BivarPoly(), spec, Rect.unit(), 64, restrict=True).cutoff.any()

    def test_table(self):
        table = np.ones((32, 32))
        g = assemble_grid(BivarPoly(), CutoffSpec(kind='table', table=table), Rect.unit(), 32)
        assert g.factors is None
        assert g.cutoff[-1, 0] == 0.0
        assert table[-1, 0] == 1.0
        with pytest.raises(GridError):
            assemble_grid(BivarPoly(), CutoffSpec(kind='table', table=table), Rect.unit(), 64)

    def test_grid_is_read_only(self, flat_grid):
        with pytest.raises(ValueError):
            flat_grid.cutoff[0, 0] = 2.0


class TestApply:
    def test_constant_functions(self, flat_grid):
        ones = [np.ones(64), np.ones(64), np.ones(127)]
        assert trilinear_apply(flat_grid, *ones, 0) == pytest.approx((1 - 1 / 64) ** 2)

    def test_fft_agrees(self, strip_grid):
        rng = np.random.default_rng(7)
        f1, f2, f3 = unit_vectors(strip_grid, rng)
        dense = trilinear_apply(strip_grid, f1, f2, f3, 0)
        fast = fft_apply(strip_grid, f1, f2, f3)
        assert abs(fast - dense) <= 1e-10 * max(abs(dense), 1e-12)

    @pytest.mark.parametrize('n', [32, 64, 128])
    def test_fft_agrees_on_every_size(self, nondegenerate_phase, n):
        g = assemble_grid(nondegenerate_phase, CutoffSpec(kind='bump'), Rect.unit(), n)
        f1, f2, f3 = unit_vectors(g, np.random.default_rng(n))
        dense = trilinear_apply(g, f1, f2, f3, 0)
        fast = fft_apply(g, f1, f2, f3)
        assert abs(fast - dense) <= 1e-10 * max(abs(dense), 1e-12)

    def test_fft_needs_factors(self):
        g = assemble_grid(BivarPoly(), CutoffSpec(kind='table', table=np.ones((32, 32))), Rect.unit(), 32)
        with pytest.raises(GridError):
            fft_apply(g, np.ones(32), np.ones(32), np.ones(63))

    def test_lengths(self, flat_grid):
        with pytest.raises(GridError):
            trilinear_apply(flat_grid, np.ones(64), np.ones(64), np.ones(64), 0)

    def test_sampling_rule(self, nondegenerate_phase):
        g = assemble_grid(nondegenerate_phase, CutoffSpec(), Rect.unit(), 64)
        with pytest.raises(SamplingRuleError) as err:
            trilinear_apply(g, np.ones(64), np.ones(64), np.ones(127), 1000)
        assert err.value.minimal_n == minimal_grid_size(g, 1000)
        assert err.value.minimal_n > 64

    def test_strip_bound(self, strip_grid):
        # at most 16 columns carry phi, so |Lambda| <= (16 h)^(1/2) = 1/2
        rng = np.random.default_rng(0)
        for _ in range(20):
            assert abs(trilinear_apply(strip_grid, *unit_vectors(strip_grid, rng), 4)) <= 0.5 + 1e-12

    def test_strip_bound_random_inputs(self, nondegenerate_phase):
        strips = [Rect(0, '1/4', 0, 1), Rect(0, 1, 0, '1/8'), Rect('1/2', 1, '1/4', '5/16')]
        grids = [assemble_grid(nondegenerate_phase, CutoffSpec(support=s), Rect.unit(), 64) for s in strips]
        rng = np.random.default_rng(2)
        violations = 0
        for k in range(1000):
            strip, g = strips[k % 3], grids[k % 3]
            bound = math.sqrt(float(min(strip.width, strip.height))) * (1 + 4 / 64)
            value = abs(trilinear_apply(g, *unit_vectors(g, rng), rng.uniform(0, 8)))
            violations += value > bound
        assert violations == 0

    def test_refinement_is_second_order(self, nondegenerate_phase):
        values = []
        for n in (64, 128, 256):
            g = assemble_grid(nondegenerate_phase, CutoffSpec(kind='bump'), Rect.unit(), n)
            values.append(trilinear_apply(g, np.exp(-g.xs), 1 + g.ys ** 2, np.cos(3 * g.sums), 4))
        assert abs(values[0] - values[1]) <= 8 * abs(values[1] - values[2]) + 1e-8


class TestMaximize:
    def test_needs_restarts(self, flat_grid):
        with pytest.raises(ValueError):
            maximize_trilinear(flat_grid, 0, restarts=3)

    def test_histories_never_decrease(self, strip_grid):
        estimate = maximize_trilinear(strip_grid, 4, restarts=4, iters=30, seed=3)
        assert len(estimate.histories) == 4
        for history in estimate.histories:
            for a, b in zip(history, history[1:]):
                assert b >= a * (1 - 1e-12)
        assert estimate.value == max(h[-1] for h in estimate.histories)

    def test_strip_norm(self, strip_grid):
        value = operator_norm(strip_grid, 4, restarts=4, iters=50)
        assert 0 < value <= 0.5 + 1e-12

    def test_flat_norm(self, flat_grid):
        # the constants already give 0.969 / 1.409
        value = operator_norm(flat_grid, 0, restarts=4, iters=100)
        assert 0.68 < value <= 1.0

    def test_vectors_attain_value(self, strip_grid):
        estimate = maximize_trilinear(strip_grid, 4, restarts=4, iters=30)
        f1, f2, f3 = estimate.vectors
        for f in (f1, f2, f3):
            assert discrete_norm(f, strip_grid.h) == pytest.approx(1.0)
        assert abs(trilinear_apply(strip_grid, f1, f2, f3, 4)) == pytest.approx(estimate.value, rel=1e-9)

    def test_seeded(self, strip_grid):
        a = operator_norm(strip_grid, 4, restarts=4, iters=20, seed=11, threads=1)
        b = operator_norm(strip_grid, 4, restarts=4, iters=20, seed=11, threads=4)
        assert a == b

    @pytest.mark.parametrize('phase', ['x^2*y - x*y^2', 'x^3*y/6'])
    def test_norm_is_stable_under_refinement(self, phase):
        s = parse_poly(phase)
        window = Rect(0, '1/8', 0, '1/8')
        grids = [assemble_grid(s, CutoffSpec(kind='bump'), window, n) for n in (64, 128)]
        coarse, fine = (operator_norm(g, 1024, restarts=4, iters=100) for g in grids)
        assert coarse == pytest.approx(fine, rel=0.05)


class TestExtremizer:
    def test_ratio(self, nondegenerate_phase):
        g = assemble_grid(nondegenerate_phase, CutoffSpec(), Rect(0, '1/8', 0, '1/8'), 256)
        # w = lam^(-1/3) / 4 spans 80 cells of h = 1/2048 at lam = 256
        expected = 80 * math.sqrt(g.h) / math.sqrt(159)
        assert extremizer_ratio(g, 0, 256) == pytest.approx(expected, rel=1e-3)

    def test_box_too_small(self, nondegenerate_phase):
        g = assemble_grid(nondegenerate_phase, CutoffSpec(), Rect.unit(), 64)
        with pytest.raises(GridError) as err:
            extremizer_ratio(g, 0, 1, c0=0.01)
        assert 'increase n' in err.value.msg

    def test_smallest_box(self, nondegenerate_phase):
        g = assemble_grid(nondegenerate_phase, CutoffSpec(), Rect(0, '1/8', 0, '1/8'), 256)
        # at lam = 1 the box width is c0 itself
        assert extremizer_ratio(g, 0, 1, c0=(MIN_BOX_CELLS + 0.5) * g.h) > 0
        with pytest.raises(GridError) as err:
            extremizer_ratio(g, 0, 1, c0=(MIN_BOX_CELLS - 0.5) * g.h)
        assert 'spans {} cells'.format(MIN_BOX_CELLS - 1) in err.value.msg

    def test_domain_away_from_origin(self, nondegenerate_phase):
        g = assemble_grid(nondegenerate_phase, CutoffSpec(), Rect('1/2', 1, 0, '1/2'), 64)
        with pytest.raises(GridError):
            extremizer_ratio(g, 0, 16)

    def test_degenerate(self):
        g = assemble_grid(parse_poly('x^3 + y^2'), CutoffSpec(), Rect.unit(), 64)
        with pytest.raises(DegeneratePhaseError):
            extremizer_ratio(g, 0, 16)

    def test_bad_lambda(self, nondegenerate_phase):
        g = assemble_grid(nondegenerate_phase, CutoffSpec(), Rect.unit(), 64)
        with pytest.raises(ValueError):
            extremizer_ratio(g, 0, 0)


class TestDecaySweep:
    lambdas = [2.0 ** k for k in range(8, 13)]

    def test_sweep(self, nondegenerate_phase):
        sweep = decay_sweep(nondegenerate_phase, CutoffSpec(), self.lambdas, Rect(0, '1/8', 0, '1/8'), 128,
                            restarts=4, iters=20)
        assert sweep.lambdas == self.lambdas
        assert len(sweep.norms) == len(sweep.extremizer_ratios) == 5
        assert sweep.theory_slope == Fraction(-1, 6)
        assert sweep.extremizer_slope == pytest.approx(-1 / 6, abs=0.03)
        assert all(0 < v <= 1 for v in sweep.norms)

    def test_too_few_lambdas(self, nondegenerate_phase):
        with pytest.raises(ValueError):
            decay_sweep(nondegenerate_phase, CutoffSpec(), self.lambdas[:4], Rect.unit(), 64)

    def test_not_geometric(self, nondegenerate_phase):
        with pytest.raises(ValueError):
            decay_sweep(nondegenerate_phase, CutoffSpec(), [1, 2, 4, 8, 10], Rect.unit(), 64)

    def test_degenerate(self):
        with pytest.raises(DegeneratePhaseError) as err:
            decay_sweep(parse_poly('x^4 + (x + y)^3'), CutoffSpec(), self.lambdas, Rect.unit(), 64)
        assert 'no decay' in err.value.msg


def test_dyadic_profile(nondegenerate_phase):
    profile = dyadic_profile(nondegenerate_phase, 16, [-2, -1], [-2, -1], restarts=4, iters=20)
    assert [(row.j, row.k) for row in profile.rows] == [(-2, -2), (-2, -1), (-1, -2), (-1, -1)]
    for row in profile.rows:
        assert 0 < row.local_norm <= row.size_bound
        # H = 4 gives (16 * 4)^(-1/6)
        assert row.osc_bound == pytest.approx(0.5)
        assert not row.flagged
    assert profile.L >= 1
    assert profile.aggregate == pytest.approx(profile.L * max(row.local_norm for row in profile.rows))


class TestShear:
    def test_transform(self):
        assert str(shear_transform(parse_poly('x*y'))) == '-x^2 + x*y'
        s = parse_poly('x^3*y - y^2')
        assert unshear_transform(shear_transform(s)) == s

    def test_orders(self, nondegenerate_phase):
        assert shear_orders(nondegenerate_phase) == (0, 0)
        # S = x^4 y^2 has H = 24 x^2 y - 8 x^3
        d, d_sheared = shear_orders(parse_poly('x^4*y^2'))
        assert d == d_sheared == 3


class TestRegionBounds:
    def test_constant(self, whole_square):
        assert hessian_bounds_on_region(BivarPoly.constant(-3), whole_square) == (3.0, 3.0)

    def test_sign_change(self, whole_square):
        with pytest.raises(HypothesisError) as err:
            hessian_bounds_on_region(parse_poly('x - 1/2'), whole_square)
        assert err.value.rect is not None

    def test_vdc_norm(self, nondegenerate_phase, whole_square):
        value = vdc_operator_norm(nondegenerate_phase, 4, whole_square, 4, n=64, restarts=4, iters=30)
        assert 0 < value < 1
        with pytest.raises(HypothesisError):
            vdc_operator_norm(nondegenerate_phase, 4, whole_square, 5, n=64)

    def test_vdc_bilinear(self, nondegenerate_phase, whole_square):
        value = vdc_bilinear_norm(nondegenerate_phase, np.ones(64), np.ones(127), 4, whole_square, 4, n=64)
        assert 0 < value <= 1
        with pytest.raises(GridError):
            vdc_bilinear_norm(nondegenerate_phase, np.ones(63), np.ones(127), 4, whole_square, 4, n=64)

    def test_oscillatory_norm(self, whole_square):
        s = parse_poly('x*y')
        # the kernel is the all-ones 63 x 63 block at lam = 0
        assert oscillatory_operator_norm(s, 0, whole_square, 1, n=64) == pytest.approx(63 / 64)
        assert oscillatory_operator_norm(s, 8, whole_square, 1, n=64) < 0.93

    def test_oscillatory_hypothesis(self, nondegenerate_phase, whole_square):
        # S_xy = 2x - 2y vanishes on the diagonal
        with pytest.raises(HypothesisError):
            oscillatory_operator_norm(nondegenerate_phase, 8, whole_square, 1, n=64)


def test_discrete_norm():
    assert discrete_norm(np.ones(64), 1 / 64) == pytest.approx(1.0)
    assert discrete_norm(np.zeros(3), 0.5) == 0.0


def test_smoothstep():
    assert float(smoothstep(0)) == 0.0
    assert float(smoothstep(1)) == 1.0
    assert list(smoothstep([-1, 2])) == [0.0, 1.0]


if __name__ == '__main__':
    pytest.main()
