"""
Algebraic domains in the unit square and their decomposition into curved trapezoids.

A domain is a finite union of conjunctions of inequalities P >= lam. The zero
sets of the irreducible factors of P - lam are cut by vertical lines through
their vertical and horizontal tangencies, mutual intersections, univariate
components and crossings of the square's edges. Inside each slab every zero
set is a union of monotone graphs that do not cross, so the bands between
consecutive graphs are curved trapezoids.
"""

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import sympy
from scipy.interpolate import PchipInterpolator

from .poly import BivarPoly, ParseError, Rect, differentiate, parse_poly
from .univariate import real_roots
from .utils import *

__all__ = [
    'Inequality',
    'AlgebraicDomain',
    'AxisLine',
    'CriticalSet',
    'CurvedTrapezoid',
    'TracingError',
    'parse_domain',
    'domain_factors',
    'critical_sets',
    'decompose_domain',
    'union_area',
    'sampled_area',
    'MIN_SLAB_WIDTH',
    'NUMERIC_CLUSTER_TOL',
    'EXACT',
    'NUMERIC',
]

MIN_SLAB_WIDTH = 1e-10
MONOTONE_SLACK = 1e-9
# Newton residual accepted on a traced branch, relative to the coefficient sum
POLISH_TOL = 1e-9
NUMERIC_CLUSTER_TOL = 1e-8
EXACT, NUMERIC = 'exact', 'numeric'
_Y = sympy.Symbol('y')
_RELATION = re.compile(r'^(?P<lhs>[^<>=]+)(?P<op>>=|<=|>|<)(?P<rhs>[^<>=]+)$')


class TracingError(OscintError):
    pass


class Inequality(NamedTuple):
    P: BivarPoly
    # a float lam is taken as inexact and switches the domain to numeric mode
    lam: Union[Fraction, float]

    @property
    def exact(self) -> bool:
        return isinstance(self.lam, (int, Fraction))

    @property
    def Q(self) -> BivarPoly:
        """P - lam, nonnegative on the set."""
        return self.P - to_fraction(self.lam)

    def __str__(self):
        lam = fraction_str(self.lam) if self.exact else repr(float(self.lam))
        return '{} >= {}'.format(self.P, lam)


def _inequality(text: str) -> Inequality:
    m = _RELATION.match(text.strip())
    if m is None:
        raise ParseError('cannot read inequality {!r}; use P >= c or P <= c'.format(text))
    q = parse_poly(m.group('lhs')) - parse_poly(m.group('rhs'))
    if m.group('op').startswith('<'):
        q = -q
    constant = q.coefficient(0, 0)
    p = q - constant
    if p.is_zero:
        raise ParseError('inequality {!r} does not involve x or y'.format(text))
    return Inequality(p, -constant)


@dataclass(frozen=True)
class AlgebraicDomain:
    """Union of conjunctions of P >= lam inside [0, 1]^2.

    A conjunction without inequalities is the whole square.
    """

    pieces: Tuple[Tuple[Inequality, ...], ...] = ((),)

    def __post_init__(self):
        if not self.pieces:
            raise ValueError('a domain needs at least one piece')

    @classmethod
    def from_text(cls, text: str) -> 'AlgebraicDomain':
        """One conjunction per line, inequalities separated by ';', '#' starts a comment.

        >>> d = AlgebraicDomain.from_text('x^2 + y^2 >= 1/4')
        >>> str(d.pieces[0][0])
        'x^2 + y^2 >= 1/4'
        """

        pieces = []
        for line in text.splitlines():
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            pieces.append(tuple(_inequality(part) for part in line.split(';') if part.strip()))
        return cls(tuple(pieces) or ((),))

    @property
    def inequalities(self) -> List[Inequality]:
        return [q for piece in self.pieces for q in piece]

    @property
    def mode(self) -> str:
        """EXACT when every lam is rational, NUMERIC otherwise."""
        return EXACT if all(q.exact for q in self.inequalities) else NUMERIC

    @property
    def type_params(self) -> Tuple[int, int]:
        """(r, n): the most inequalities in a piece and the largest degree."""
        r = max(len(piece) for piece in self.pieces)
        n = max((q.P.degree for q in self.inequalities), default=0)
        return r, n

    def contains(self, xs, ys) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        inside = (xs >= 0) & (xs <= 1) & (ys >= 0) & (ys <= 1)
        hit = np.zeros(np.broadcast(xs, ys).shape, dtype=bool)
        for piece in self.pieces:
            ok = np.ones_like(hit)
            for q in piece:
                ok &= q.Q.evaluate(xs, ys) >= 0
            hit |= ok
        return hit & inside

    def to_text(self) -> str:
        return '\n'.join('; '.join(str(q) for q in piece) for piece in self.pieces)


def parse_domain(text: str) -> AlgebraicDomain:
    return AlgebraicDomain.from_text(text)


class AxisLine(NamedTuple):
    # 'x' for the vertical line x = value, 'y' for y = value
    axis: str
    value: float


@dataclass(frozen=True)
class CriticalSet:
    factors: Tuple[BivarPoly, ...]
    gamma1: Tuple[AxisLine, ...]
    gamma2: Tuple[Tuple[float, float], ...]
    gamma3: Tuple[Tuple[float, float], ...]
    L: Tuple[AxisLine, ...]
    bezout_budget: int
    trapezoid_budget: int
    # how roots were isolated: EXACT (Sturm chains) or NUMERIC (companion matrices)
    mode: str = EXACT

    @property
    def cuts(self) -> List[float]:
        """Sorted abscissae of the vertical lines of L, including 0 and 1."""
        return sorted({line.value for line in self.L if line.axis == 'x'} | {0.0, 1.0})

    def to_dict(self) -> Dict[str, Any]:
        return {
            'factors': [str(f) for f in self.factors],
            'gamma1': [list(line) for line in self.gamma1],
            'gamma2': [list(p) for p in self.gamma2],
            'gamma3': [list(p) for p in self.gamma3],
            'L': [list(line) for line in self.L],
            'bezout_budget': self.bezout_budget,
            'trapezoid_budget': self.trapezoid_budget,
            'mode': self.mode,
        }


def _normalized(f: BivarPoly) -> BivarPoly:
    lead = f.coefficient(*max(f.support))
    return f * (1 / lead)


def domain_factors(d: AlgebraicDomain) -> List[BivarPoly]:
    """Distinct irreducible factors over Q of every P - lam, normalised."""
    seen: Dict[BivarPoly, None] = {}
    for q in d.inequalities:
        if q.P.is_zero:
            raise ValueError('inequality polynomials must be nonzero')
        _, factors = q.Q.to_sympy().factor_list()
        for f, _ in factors:
            g = BivarPoly.from_sympy(f)
            if g.degree > 0:
                seen.setdefault(_normalized(g), None)
    return list(seen)


def _real_companion_roots(coeffs) -> np.ndarray:
    """Real roots of sum_i coeffs[i] t^i from the companion matrix."""
    coeffs = np.trim_zeros(np.atleast_1d(np.asarray(coeffs, dtype=float)), 'b')
    if len(coeffs) < 2:
        return np.array([])
    roots = np.polynomial.polynomial.polyroots(coeffs)
    scale = 1 + np.abs(roots.real)
    return roots.real[np.abs(roots.imag) <= 1e-7 * scale]


def _unit_roots(expr, mode: str = EXACT) -> List[float]:
    """Real roots in [0, 1] of a univariate rational polynomial in x.

    NUMERIC mode clusters companion-matrix roots closer than NUMERIC_CLUSTER_TOL.
    """
    poly = sympy.Poly(expr, sympy.Symbol('x'), domain=sympy.QQ)
    if poly.is_zero or poly.degree() <= 0:
        return []
    if mode == NUMERIC:
        coeffs = [float(c) for c in reversed(poly.all_coeffs())]
        roots = _dedupe(_real_companion_roots(coeffs), NUMERIC_CLUSTER_TOL)
    else:
        roots = [r.value for r in real_roots(poly)]
    return [v for v in roots if -1e-12 <= v <= 1 + 1e-12]


def _y_roots(f: BivarPoly, x: float) -> np.ndarray:
    """Real roots in y of f(x, .) by companion matrix."""
    return _real_companion_roots(np.polynomial.polynomial.polyval(x, f.coefficient_matrix))


def _check_separation(curves: Sequence[BivarPoly], samples: int = 33) -> None:
    # an inexact lam can hide a repeated factor as two branches a rounding error apart
    for f in curves:
        for x in _chebyshev_nodes(0.0, 1.0, samples):
            ys = np.sort(_y_roots(f, x))
            ys = ys[(ys >= 0) & (ys <= 1)]
            if len(ys) > 1 and np.min(np.diff(ys)) < NUMERIC_CLUSTER_TOL:
                raise TracingError(
                    'branches of {} come within {:.0e} of each other near x = {:.6g}; '
                    'give the inequality constants exactly as p/q'.format(f, NUMERIC_CLUSTER_TOL, x)
                )


def _points_over(f: BivarPoly, g: BivarPoly, xs: Sequence[float]) -> List[Tuple[float, float]]:
    points = []
    for x in xs:
        for y in _y_roots(f, x):
            if -1e-9 <= y <= 1 + 1e-9 and abs(g(x, y)) <= 1e-6 * (1 + max(abs(c) for c in g.terms.values())):
                points.append((float(x), float(min(max(y, 0.0), 1.0))))
    return points


def _resultant_x(f: BivarPoly, g: BivarPoly):
    return sympy.resultant(f.to_sympy().as_expr(), g.to_sympy().as_expr(), _Y)


def _dedupe(values: Sequence[float], tol: float = 1e-12) -> List[float]:
    out: List[float] = []
    for v in sorted(values):
        if not out or v - out[-1] > tol:
            out.append(v)
    return out


def critical_sets(d: AlgebraicDomain) -> CriticalSet:
    """Critical lines and points of the zero sets of the domain's factors.

    >>> cs = critical_sets(AlgebraicDomain.from_text('x - 1/2 >= 0'))
    >>> [(line.axis, round(line.value, 9)) for line in cs.gamma1], cs.gamma2, cs.gamma3
    ([('x', 0.5)], (), ())
    """

    factors = domain_factors(d)
    mode = d.mode
    gamma1: List[AxisLine] = []
    gamma2: List[Tuple[float, float]] = []
    gamma3: List[Tuple[float, float]] = []
    cut_x: List[float] = []
    cut_y: List[float] = []

    curves = []
    for f in factors:
        if not f.depends_on('y'):
            for x in _unit_roots(f.to_sympy().as_expr(), mode):
                gamma1.append(AxisLine('x', x))
            continue
        if not f.depends_on('x'):
            for y in _unit_roots(f.to_sympy().as_expr().subs(_Y, sympy.Symbol('x')), mode):
                gamma1.append(AxisLine('y', y))
            continue
        curves.append(f)

    if mode == NUMERIC:
        _check_separation(curves)

    for f in curves:
        for axis in ('x', 'y'):
            df = differentiate(f, axis)
            if df.is_zero:
                continue
            xs = _unit_roots(_resultant_x(f, df), mode)
            gamma2.extend(_points_over(f, df, xs))
        # branches enter or leave through the top and bottom edges
        cut_x.extend(_unit_roots(f.compose(BivarPoly.x(), BivarPoly.constant(0)).to_sympy().as_expr(), mode))
        cut_x.extend(_unit_roots(f.compose(BivarPoly.x(), BivarPoly.constant(1)).to_sympy().as_expr(), mode))
        lead = BivarPoly({(a, 0): c for (a, b), c in f.terms.items() if b == f.degree_y})
        cut_x.extend(_unit_roots(lead.to_sympy().as_expr(), mode))
        cut_y.extend(float(y) for y in _y_roots(f, 0.0) if 0 <= y <= 1)
        cut_y.extend(float(y) for y in _y_roots(f, 1.0) if 0 <= y <= 1)

    for i, f in enumerate(curves):
        for g in curves[i + 1:]:
            res = _resultant_x(f, g)
            if res == 0:
                raise TracingError('factors {} and {} share a component'.format(f, g))
            gamma3.extend(_points_over(f, g, _unit_roots(res, mode)))

    points = gamma2 + gamma3
    xs = _dedupe([line.value for line in gamma1 if line.axis == 'x'] + [p[0] for p in points] + cut_x)
    ys = _dedupe([line.value for line in gamma1 if line.axis == 'y'] + [p[1] for p in points] + cut_y)
    lines = tuple(AxisLine('x', x) for x in xs if 0 <= x <= 1) + tuple(AxisLine('y', y) for y in ys if 0 <= y <= 1)

    degrees = [f.degree for f in factors]
    bezout = sum(2 * n * n for n in degrees) + sum(
        degrees[i] * degrees[j] for i in range(len(degrees)) for j in range(i + 1, len(degrees))
    ) + 2 * sum(degrees)
    slabs = len(_dedupe([x for x in xs if 0 < x < 1])) + 1
    branches = sum(f.degree_y for f in curves) + sum(1 for line in gamma1 if line.axis == 'y')
    debug('critical sets ({} mode): {} factors, {} vertical cuts'.format(mode, len(factors), slabs - 1))
    return CriticalSet(
        factors=tuple(factors),
        gamma1=tuple(gamma1),
        gamma2=tuple(_dedupe_points(gamma2)),
        gamma3=tuple(_dedupe_points(gamma3)),
        L=lines,
        bezout_budget=bezout,
        trapezoid_budget=slabs * (branches + 1),
        mode=mode,
    )


def _dedupe_points(points: Sequence[Tuple[float, float]], tol: float = 1e-9) -> List[Tuple[float, float]]:
    out: List[Tuple[float, float]] = []
    for p in sorted(points):
        if not any(abs(p[0] - q[0]) <= tol and abs(p[1] - q[1]) <= tol for q in out):
            out.append(p)
    return out


@dataclass(frozen=True, eq=False)
class CurvedTrapezoid:
    """{a < x < b, g(x) < y < h(x)} with g, h monotone tables interpolated by Pchip.

    ``lower_branch`` and ``upper_branch`` name the (factor index, branch rank)
    a boundary comes from, None for the square's bottom and top edges.
    """

    a: float
    b: float
    xs: np.ndarray = field(repr=False)
    lower: np.ndarray = field(repr=False)
    upper: np.ndarray = field(repr=False)
    lower_branch: Optional[Tuple[int, int]] = None
    upper_branch: Optional[Tuple[int, int]] = None

    @cachedproperty
    def g(self) -> PchipInterpolator:
        return PchipInterpolator(self.xs, self.lower)

    @cachedproperty
    def h(self) -> PchipInterpolator:
        return PchipInterpolator(self.xs, self.upper)

    def area(self) -> float:
        return float(self.h.integrate(self.a, self.b) - self.g.integrate(self.a, self.b))

    def is_monotone(self) -> bool:
        def mono(t):
            steps = np.diff(t)
            return bool(np.all(steps >= 0) or np.all(steps <= 0))

        return mono(self.lower) and mono(self.upper)

    def contains(self, xs, ys) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        clipped = np.clip(xs, self.a, self.b)
        return (xs > self.a) & (xs < self.b) & (ys > self.g(clipped)) & (ys < self.h(clipped))

    def rect_cover(self, pieces: int) -> List[Rect]:
        """Rectangles covering the trapezoid, one per x-subinterval."""
        edges = np.linspace(self.a, self.b, pieces + 1)
        low = self.g(edges)
        high = self.h(edges)
        cover = []
        for i in range(pieces):
            y_lo = max(0.0, float(min(low[i], low[i + 1])))
            y_hi = min(1.0, float(max(high[i], high[i + 1])))
            if y_hi > y_lo and edges[i + 1] > edges[i]:
                cover.append(Rect(float(edges[i]), float(edges[i + 1]), y_lo, y_hi))
        return cover

    def sample(self, count: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
        xs = rng.uniform(self.a, self.b, count)
        lo, hi = self.g(xs), self.h(xs)
        return xs, lo + rng.uniform(0, 1, count) * (hi - lo)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'a': self.a,
            'b': self.b,
            'lower_branch': list(self.lower_branch) if self.lower_branch else None,
            'upper_branch': list(self.upper_branch) if self.upper_branch else None,
            'area': self.area(),
        }


def _polish(f: BivarPoly, fy: BivarPoly, x: float, ys: np.ndarray, steps: int = 3) -> np.ndarray:
    ys = ys.copy()
    for _ in range(steps):
        slope = fy.evaluate(np.full_like(ys, x), ys)
        value = f.evaluate(np.full_like(ys, x), ys)
        safe = np.abs(slope) > 1e-14
        ys[safe] -= value[safe] / slope[safe]
    return ys


def _branches_at(curves: Sequence[Tuple[int, BivarPoly, BivarPoly]], x: float) -> List[Tuple[float, int]]:
    """(y, factor index) of every branch strictly inside (0, 1) above x, sorted by y."""
    found = []
    for index, f, fy in curves:
        ys = _y_roots(f, x)
        if not len(ys):
            continue
        ys = _polish(f, fy, x, ys)
        ys = ys[(ys > 0) & (ys < 1)]
        residual = np.abs(f.evaluate(np.full_like(ys, x), ys))
        if len(ys) and residual.max() > POLISH_TOL * float(sum(abs(c) for c in f.terms.values())):
            raise TracingError('Newton correction on {} did not converge at x = {:.12g}'.format(f, x))
        found.extend((float(y), index) for y in ys)
    return sorted(found)


def _chebyshev_nodes(a: float, b: float, count: int) -> np.ndarray:
    k = np.arange(count)
    return a + (b - a) * (1 - np.cos(np.pi * (k + 0.5) / count)) / 2


def _monotone(table: np.ndarray) -> np.ndarray:
    if table[-1] >= table[0]:
        fixed = np.maximum.accumulate(table)
    else:
        fixed = np.minimum.accumulate(table)
    if np.max(np.abs(fixed - table)) > MONOTONE_SLACK:
        raise TracingError('a traced branch is not monotone')
    return fixed


def _extend(nodes: np.ndarray, values: np.ndarray, a: float, b: float) -> np.ndarray:
    left, right = PchipInterpolator(nodes, values, extrapolate=True)([a, b])
    # the end values must not undo the monotonicity of the table
    if values[-1] >= values[0]:
        left, right = min(left, values[0]), max(right, values[-1])
    else:
        left, right = max(left, values[0]), min(right, values[-1])
    return np.clip(np.concatenate([[left], values, [right]]), 0.0, 1.0)


def _trace_slab(d: AlgebraicDomain, curves, a: float, b: float, nodes: int) -> List[CurvedTrapezoid]:
    """Trace the slab, bisecting it whenever tracing fails."""
    try:
        return _trace_once(d, curves, a, b, nodes)
    except TracingError as e:
        if (b - a) / 2 < MIN_SLAB_WIDTH:
            raise TracingError('branch tracing failed on a slab of width {:.3g} at x = {:.12g}: {}'.format(
                b - a, a, e.msg)) from None
        debug('{} inside [{:.6g}, {:.6g}]; bisecting'.format(e.msg, a, b))
    mid = (a + b) / 2
    return _trace_slab(d, curves, a, mid, nodes) + _trace_slab(d, curves, mid, b, nodes)


def _trace_once(d: AlgebraicDomain, curves, a: float, b: float, nodes: int) -> List[CurvedTrapezoid]:
    xs = _chebyshev_nodes(a, b, nodes)
    rows = [_branches_at(curves, x) for x in xs]
    labels = [tuple(index for _, index in row) for row in rows]
    if any(label != labels[0] for label in labels):
        raise TracingError('the branch count changes')

    grid = np.concatenate([[a], xs, [b]])
    count = len(labels[0])
    tables = [np.zeros(len(grid))]
    for i in range(count):
        values = np.array([row[i][0] for row in rows])
        tables.append(_extend(xs, _monotone(values), a, b))
    tables.append(np.ones(len(grid)))
    ranks: Dict[int, int] = {}
    names: List[Optional[Tuple[int, int]]] = [None]
    for index in labels[0]:
        names.append((index, ranks.setdefault(index, 0)))
        ranks[index] += 1
    names.append(None)

    middle = nodes // 2
    x_mid = xs[middle]
    out = []
    for i in range(count + 1):
        lower, upper = tables[i], tables[i + 1]
        y_mid = (lower[middle + 1] + upper[middle + 1]) / 2
        if upper[middle + 1] - lower[middle + 1] <= 0:
            continue
        if d.contains(x_mid, y_mid):
            out.append(CurvedTrapezoid(a, b, grid, np.minimum(lower, upper), upper, names[i], names[i + 1]))
    return out


def decompose_domain(
    d: AlgebraicDomain, nodes: int = 64, threads: Optional[int] = None, critical: Optional[CriticalSet] = None
) -> List[CurvedTrapezoid]:
    """Curved trapezoids whose union is the domain up to a null set, slab by slab from left to right."""
    cs = critical or critical_sets(d)
    curves = []
    for index, f in enumerate(cs.factors):
        if f.depends_on('y'):
            curves.append((index, f, differentiate(f, 'y')))
    cuts = cs.cuts
    slabs = [(a, b) for a, b in zip(cuts, cuts[1:]) if b - a > MIN_SLAB_WIDTH]
    with ThreadPoolExecutor(max_workers=thread_count(threads)) as pool:
        parts = list(pool.map(lambda s: _trace_slab(d, curves, s[0], s[1], nodes), slabs))
    trapezoids = [t for part in parts for t in part]
    info('domain split into {} slabs and {} trapezoids'.format(len(slabs), len(trapezoids)))
    return trapezoids


def union_area(trapezoids: Sequence[CurvedTrapezoid]) -> float:
    return float(sum(t.area() for t in trapezoids))


def sampled_area(d: AlgebraicDomain, samples: int = 200000, seed: int = 0) -> float:
    """Rejection-sampling estimate of the domain's area."""
    rng = np.random.default_rng(seed)
    xs, ys = rng.uniform(0, 1, samples), rng.uniform(0, 1, samples)
    return float(np.mean(d.contains(xs, ys)))
