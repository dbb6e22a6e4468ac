import math
from fractions import Fraction

import numpy as np
import pytest

from oscint.algebraic import *
from oscint.poly import ParseError, parse_poly

DISC = 'x^2 + y^2 >= 1/4'


@pytest.fixture(scope='module')
def disc():
    return AlgebraicDomain.from_text(DISC)


@pytest.fixture(scope='module')
def disc_trapezoids(disc):
    return decompose_domain(disc)


class TestParse:
    def test_inequality(self):
        d = AlgebraicDomain.from_text('x*y <= 1/16')
        q, = d.inequalities
        assert q.P == parse_poly('-x*y')
        assert q.lam == Fraction(-1, 16)
        assert q.Q == parse_poly('1/16 - x*y')

    def test_lines_and_comments(self):
        d = AlgebraicDomain.from_text('''
            # two vertical bands
            x <= 1/4
            x >= 3/4; y >= 0   # trailing comment
        ''')
        assert len(d.pieces) == 2
        assert [len(piece) for piece in d.pieces] == [1, 2]
        assert d.type_params == (2, 1)

    def test_empty_is_the_square(self):
        d = AlgebraicDomain.from_text('# nothing\n')
        assert d == AlgebraicDomain()
        assert d.contains(0.5, 0.5)
        assert d.type_params == (0, 0)

    def test_text_round_trip(self):
        d = AlgebraicDomain.from_text('x*y <= 1/16\nx^2 + y^2 >= 1/4; y - x >= 0')
        assert parse_domain(d.to_text()) == d

    @pytest.mark.parametrize('text', ['x^2 + y^2', 'x = 1/2', '1 >= 0', 'x >= z'])
    def test_rejects(self, text):
        with pytest.raises(ParseError) as err:
            AlgebraicDomain.from_text(text)
        assert err.value.msg

    def test_no_pieces(self):
        with pytest.raises(ValueError):
            AlgebraicDomain(())


def test_contains(disc):
    assert list(disc.contains([0.1, 0.9, 1.5, 0.5], [0.1, 0.9, 0.9, 0.0])) == [False, True, False, True]


class TestCriticalSets:
    def test_disc(self, disc):
        cs = critical_sets(disc)
        assert [str(f) for f in cs.factors] == ['x^2 + y^2 - 1/4']
        assert cs.gamma1 == ()
        assert [v for p in cs.gamma2 for v in p] == pytest.approx([0.0, 0.5, 0.5, 0.0], abs=1e-9)
        assert cs.cuts == pytest.approx([0.0, 0.5, 1.0], abs=1e-10)
        assert cs.trapezoid_budget == 6

    def test_hyperbola(self):
        cs = critical_sets(AlgebraicDomain.from_text('x*y <= 1/16'))
        assert cs.cuts == pytest.approx([0.0, 1 / 16, 1.0], abs=1e-10)
        assert cs.gamma2 == ()

    def test_axis_lines(self):
        cs = critical_sets(AlgebraicDomain.from_text('y >= 1/3; x <= 1/2'))
        assert sorted((line.axis, round(line.value, 9)) for line in cs.gamma1) == [('x', 0.5), ('y', 0.333333333)]
        assert cs.cuts == pytest.approx([0.0, 0.5, 1.0])

    def test_crossing(self):
        cs = critical_sets(AlgebraicDomain.from_text('y - x >= 0; x + y <= 1'))
        point, = cs.gamma3
        assert list(point) == pytest.approx([0.5, 0.5], abs=1e-9)
        assert cs.cuts == pytest.approx([0.0, 0.5, 1.0], abs=1e-10)

    def test_to_dict(self, disc):
        data = critical_sets(disc).to_dict()
        assert data['factors'] == ['x^2 + y^2 - 1/4']
        assert data['trapezoid_budget'] == 6
        assert all(len(p) == 2 for p in data['gamma2'])

    def test_factors_are_split(self):
        factors = domain_factors(AlgebraicDomain.from_text('x*y - x >= 0'))
        assert sorted(str(f) for f in factors) == ['x', 'y - 1']


class TestDecompose:
    def test_square(self):
        trapezoid, = decompose_domain(AlgebraicDomain())
        assert (trapezoid.a, trapezoid.b) == (0.0, 1.0)
        assert trapezoid.area() == pytest.approx(1.0)
        assert trapezoid.lower_branch is None and trapezoid.upper_branch is None

    def test_half(self):
        trapezoid, = decompose_domain(AlgebraicDomain.from_text('y - x >= 0'))
        assert trapezoid.area() == pytest.approx(0.5, abs=1e-9)
        assert trapezoid.lower_branch == (0, 0)
        assert trapezoid.upper_branch is None

    def test_bands(self):
        trapezoids = decompose_domain(AlgebraicDomain.from_text('x <= 1/4\nx >= 3/4'))
        assert len(trapezoids) == 2
        assert union_area(trapezoids) == pytest.approx(0.5)

    def test_disc_area(self, disc_trapezoids):
        assert len(disc_trapezoids) == 2
        assert union_area(disc_trapezoids) == pytest.approx(1 - math.pi / 16, abs=2e-3)

    def test_disc_sampled_area(self, disc):
        assert sampled_area(disc, 200000, seed=1) == pytest.approx(1 - math.pi / 16, abs=5e-3)

    def test_monotone(self, disc_trapezoids):
        assert all(t.is_monotone() for t in disc_trapezoids)

    def test_samples_stay_inside(self, disc, disc_trapezoids):
        rng = np.random.default_rng(0)
        for t in disc_trapezoids:
            xs, ys = t.sample(500, rng)
            assert np.mean(disc.contains(xs, ys)) >= 0.98
            assert (xs >= t.a).all() and (xs <= t.b).all()

    def test_rect_cover(self, disc_trapezoids):
        for t in disc_trapezoids:
            cover = t.rect_cover(32)
            assert sum(float(r.width * r.height) for r in cover) >= t.area() - 1e-9
            assert all(0 <= r.y_lo and r.y_hi <= 1 for r in cover)

    def test_to_dict(self, disc_trapezoids):
        data = disc_trapezoids[0].to_dict()
        assert set(data) == {'a', 'b', 'lower_branch', 'upper_branch', 'area'}
        assert data['lower_branch'] == [0, 0]

    def test_hyperbola_is_within_budget(self):
        d = AlgebraicDomain.from_text('x*y <= 1/16')
        cs = critical_sets(d)
        trapezoids = decompose_domain(d, critical=cs)
        assert 0 < len(trapezoids) <= cs.trapezoid_budget
        # area = 1/16 + (1/16) log 16
        assert union_area(trapezoids) == pytest.approx((1 + math.log(16)) / 16, abs=2e-3)

    def test_missing_cut_is_recovered_by_bisection(self):
        # the parabola y = (x - 1/2)^2 + 1/4 turns at x = 1/2; leave that cut out
        d = AlgebraicDomain.from_text('y - x^2 + x - 1/2 >= 0')
        bare = CriticalSet(tuple(domain_factors(d)), (), (), (), (), 0, 0)
        assert bare.cuts == [0.0, 1.0]
        trapezoids = decompose_domain(d, critical=bare)
        assert sorted((t.a, t.b) for t in trapezoids) == [(0.0, 0.5), (0.5, 1.0)]
        assert all(t.is_monotone() for t in trapezoids)
        assert union_area(trapezoids) == pytest.approx(2 / 3, abs=2e-3)


class TestNumericMode:
    def test_float_constant(self):
        c = math.pi / 16
        d = AlgebraicDomain(((Inequality(parse_poly('x^2 + y^2'), c),),))
        assert d.mode == NUMERIC
        assert AlgebraicDomain.from_text(DISC).mode == EXACT
        cs = critical_sets(d)
        assert cs.mode == NUMERIC
        assert cs.to_dict()['mode'] == NUMERIC
        assert cs.cuts == pytest.approx([0.0, math.sqrt(c), 1.0], abs=1e-9)
        trapezoids = decompose_domain(d, critical=cs)
        assert union_area(trapezoids) == pytest.approx(1 - math.pi * c / 4, abs=2e-3)

    def test_exact_mode_is_recorded(self, disc):
        assert critical_sets(disc).to_dict()['mode'] == EXACT

    def test_nearly_repeated_factor(self):
        # (x - y)^2 - 1e-20: two branches 2e-10 apart
        d = AlgebraicDomain(((Inequality(parse_poly('x^2 - 2*x*y + y^2'), 1e-20),),))
        with pytest.raises(TracingError) as err:
            critical_sets(d)
        assert 'p/q' in err.value.msg


if __name__ == '__main__':
    pytest.main()
