"""
Newton polyhedron of the convolution Hessian, its compact edges and the decay exponent.

The hull is built with exact integer cross products; edge data (slopes, edge
polynomials and their real roots) is exact up to the final root refinement.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Tuple, Union

from .poly import BivarPoly, convolution_hessian
from .univariate import complex_root_count, real_roots
from .utils import *

__all__ = [
    'EdgeRoot',
    'EdgeData',
    'NewtonData',
    'DegeneratePhaseError',
    'DEGENERATE',
    'newton_polyhedron',
    'order_at_origin',
    'predicted_decay',
    'edge_real_roots',
    'vertex_order_bound',
    'leading_coefficient',
    'reflect',
]

Exponent = Tuple[int, int]

DEGENERATE = 'degenerate'


class DegeneratePhaseError(OscintError):
    pass


@dataclass(frozen=True)
class EdgeRoot:
    value: float
    multiplicity: int
    # +1 and -1 for positive and negative roots, 0 for t = 0
    sign: int

    @property
    def active(self) -> bool:
        """Only positive roots describe curves y = c x^M inside the first quadrant."""
        return self.sign > 0


@dataclass(frozen=True)
class EdgeData:
    endpoints: Tuple[Exponent, Exponent]
    M: Fraction
    # value of alpha + M * beta along the edge
    order: Fraction
    # coefficients of p(t) in increasing degree
    p: Tuple[Fraction, ...]
    real_roots: Tuple[EdgeRoot, ...] = ()
    complex_roots: int = 0

    @property
    def active_roots(self) -> List[EdgeRoot]:
        return [r for r in self.real_roots if r.active]

    def p_poly(self) -> BivarPoly:
        return BivarPoly.from_univariate(self.p, axis='x')

    def p_str(self) -> str:
        return str(self.p_poly()).replace('x', 't')

    def to_dict(self) -> Dict[str, Any]:
        return {
            'endpoints': [list(e) for e in self.endpoints],
            'M': fraction_str(self.M),
            'order': fraction_str(self.order),
            'p': self.p_str(),
            'roots': [
                {'root': r.value, 'multiplicity': r.multiplicity, 'sign': r.sign, 'active': r.active}
                for r in self.real_roots
            ],
            'complex_roots': self.complex_roots,
        }


@dataclass(frozen=True)
class NewtonData:
    vertices: Tuple[Exponent, ...]
    edges: Tuple[EdgeData, ...]
    d: int
    exponent: Union[Fraction, str]
    support: Tuple[Exponent, ...] = field(default=(), repr=False)

    def contains(self, point: Exponent) -> bool:
        """Membership in the quadrant-shifted hull."""
        a, b = point
        if a < self.vertices[0][0] or b < self.vertices[-1][1]:
            return False
        return all(a + e.M * b >= e.order for e in self.edges)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'vertices': [list(v) for v in self.vertices],
            'edges': [e.to_dict() for e in self.edges],
            'd': self.d,
            'exponent': self.exponent if isinstance(self.exponent, str) else fraction_str(self.exponent),
        }


def _cross(o: Exponent, a: Exponent, b: Exponent) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _lower_left_chain(points: List[Exponent]) -> List[Exponent]:
    pts = sorted(set(points))
    hull: List[Exponent] = []
    for p in pts:
        # drop collinear points too, so only corners remain
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], p) <= 0:
            hull.pop()
        hull.append(p)
    beta_min = min(b for _, b in pts)
    end = next(i for i, v in enumerate(hull) if v[1] == beta_min)
    return hull[: end + 1]


def order_at_origin(h: BivarPoly) -> int:
    """Minimal total degree over the support.

    >>> order_at_origin(BivarPoly({(1, 0): 1, (2, 1): 1}))
    1
    """

    if h.is_zero:
        raise DegeneratePhaseError('degenerate phase: no Newton data')
    return min(a + b for a, b in h.support)


def _edge(h: BivarPoly, left: Exponent, right: Exponent) -> EdgeData:
    (a0, b0), (a1, b1) = left, right
    m = Fraction(a1 - a0, b0 - b1)
    order = a0 + m * b0
    coeffs = [Fraction(0)] * (b0 + 1)
    for (a, b), c in h.terms.items():
        if a + m * b == order:
            coeffs[b] = c

    # p(t) = t^b1 q(t) with q(0) != 0
    reduced = coeffs[b1:]
    roots = [EdgeRoot(0.0, b1, 0)] if b1 else []
    for r in real_roots(reduced):
        roots.append(EdgeRoot(r.value, r.multiplicity, 1 if r.value > 0 else -1))
    return EdgeData(
        endpoints=(left, right),
        M=m,
        order=order,
        p=tuple(coeffs),
        real_roots=tuple(sorted(roots, key=lambda r: r.value)),
        complex_roots=complex_root_count(reduced),
    )


def newton_polyhedron(h: BivarPoly) -> NewtonData:
    """Vertices ordered with A increasing and B decreasing, edges between consecutive vertices.

    >>> nd = newton_polyhedron(BivarPoly({(0, 2): 1, (3, 0): -1}))
    >>> nd.vertices, nd.d, nd.edges[0].M
    (((0, 2), (3, 0)), 2, Fraction(3, 2))
    """

    if h.is_zero:
        raise DegeneratePhaseError('degenerate phase: no Newton data')
    support = h.support
    vertices = _lower_left_chain(support)
    edges = tuple(_edge(h, v, w) for v, w in zip(vertices, vertices[1:]))
    d = order_at_origin(h)
    debug('newton polyhedron of {}: vertices {}, d = {}'.format(h, vertices, d))
    return NewtonData(
        vertices=tuple(vertices),
        edges=edges,
        d=d,
        exponent=Fraction(1, 2 * (3 + d)),
        support=tuple(support),
    )


def predicted_decay(s: BivarPoly) -> Union[Fraction, str]:
    """1/(2(3+d)) for the order d of the convolution Hessian, or 'degenerate'.

    >>> predicted_decay(BivarPoly({(2, 1): 1, (1, 2): -1}))
    Fraction(1, 6)
    >>> predicted_decay(BivarPoly({(3, 0): 1, (0, 7): 1}))
    'degenerate'
    """

    h = convolution_hessian(s)
    if h.is_zero:
        return DEGENERATE
    return Fraction(1, 2 * (3 + order_at_origin(h)))


def edge_real_roots(e: EdgeData) -> List[Tuple[float, int]]:
    if not any(e.p):
        raise ValueError('edge polynomial is zero')
    return [(r.value, r.multiplicity) for r in e.real_roots]


def vertex_order_bound(nd: NewtonData) -> bool:
    """Whether d >= min(A + M B, A / M + B) holds on every compact edge."""
    for e in nd.edges:
        a, b = e.endpoints[0]
        if nd.d < min(a + e.M * b, a / e.M + b):
            return False
    return True


def leading_coefficient(h: BivarPoly, e: EdgeData, c: Fraction) -> Tuple[int, Fraction]:
    """Lowest order term of H(s^q, c s^p) where M = p/q.

    Returns (order, coefficient); along the edge this is (q * order, p_e(c)).
    """

    m = Fraction(e.M)
    p, q = m.numerator, m.denominator
    c = to_fraction(c)
    restricted = h.compose(BivarPoly.monomial(q, 0), BivarPoly.monomial(p, 0, c))
    if restricted.is_zero:
        raise DegeneratePhaseError('H vanishes identically on y = {} x^{}'.format(c, fraction_str(m)))
    order = min(a for a, _ in restricted.support)
    return order, restricted.coefficient(order, 0)


def reflect(p: BivarPoly, axis: str) -> BivarPoly:
    """Quadrant reflection x -> -x or y -> -y."""
    if axis not in ('x', 'y'):
        raise ValueError("axis must be 'x' or 'y', not {!r}".format(axis))
    return p.reflect(axis)
