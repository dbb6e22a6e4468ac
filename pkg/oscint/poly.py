"""
Exact bivariate polynomials, the convolution Hessian and Bernstein range enclosures.

Coefficients are kept as :class:`fractions.Fraction`; floating point only appears
when a polynomial is sampled on a grid or enclosed on a rectangle.
"""

import heapq
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import count
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Tuple, Union

import numpy as np
import sympy
from numpy.polynomial import polynomial as npoly
from scipy.special import comb
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    rationalize,
    standard_transformations,
)

from .utils import *

__all__ = [
    'BivarPoly',
    'Rect',
    'Enclosure',
    'BernsteinBounds',
    'ParseError',
    'EnclosureBudgetError',
    'parse_poly',
    'as_poly',
    'differentiate',
    'directional_derivative',
    'convolution_hessian',
    'sheared_hessian',
    'is_degenerate',
    'eval',
    'bernstein_bounds',
    'range_on_rect',
    'sup_abs_bounds',
    'DEFAULT_TOLERANCE',
    'DEFAULT_BUDGET',
]

Exponent = Tuple[int, int]
Number = Union[int, Fraction]

DEFAULT_TOLERANCE = 1e-6
DEFAULT_BUDGET = 4096

_X, _Y = sympy.symbols('x y')
_ALLOWED = re.compile(r'^[0-9xy+\-*/^().\s]*$')
_TRANSFORMATIONS = standard_transformations + (convert_xor, rationalize)
_UNIT_ROUNDOFF = 2.0 ** -53


class ParseError(OscintError):
    pass


class EnclosureBudgetError(OscintError):
    def __init__(self, msg, enclosure, attained=None):
        super().__init__(msg)
        self.enclosure = enclosure
        # (min, max) of values p actually takes, as found before the budget ran out
        self.attained = attained


class BivarPoly:
    """Polynomial in x and y with exact rational coefficients.

    Instances are immutable; arithmetic returns new polynomials.

    >>> p = parse_poly('x^2*y - x*y^2')
    >>> p.degree
    3
    >>> str(convolution_hessian(p))
    '4'
    """

    def __init__(self, terms: Optional[Mapping[Exponent, Number]] = None):
        clean = {}
        for (a, b), c in (terms or {}).items():
            if int(a) != a or int(b) != b or a < 0 or b < 0:
                raise ValueError('exponents must be non-negative integers, not {!r}'.format((a, b)))
            c = to_fraction(c)
            if c != 0:
                key = (int(a), int(b))
                clean[key] = clean.get(key, Fraction(0)) + c
                if clean[key] == 0:
                    del clean[key]
        self._terms: Dict[Exponent, Fraction] = clean

    @classmethod
    def constant(cls, c: Number) -> 'BivarPoly':
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, a: int, b: int, c: Number = 1) -> 'BivarPoly':
        return cls({(a, b): c})

    @classmethod
    def x(cls) -> 'BivarPoly':
        return cls.monomial(1, 0)

    @classmethod
    def y(cls) -> 'BivarPoly':
        return cls.monomial(0, 1)

    @classmethod
    def from_univariate(cls, coeffs: Iterable[Number], axis: str = 'x') -> 'BivarPoly':
        """Coefficients in increasing degree order."""
        if axis == 'x':
            return cls({(i, 0): c for i, c in enumerate(coeffs)})
        return cls({(0, i): c for i, c in enumerate(coeffs)})

    @property
    def terms(self) -> Dict[Exponent, Fraction]:
        return dict(self._terms)

    @cachedproperty
    def degree(self) -> int:
        return max((a + b for a, b in self._terms), default=0)

    @cachedproperty
    def degree_x(self) -> int:
        return max((a for a, _ in self._terms), default=0)

    @cachedproperty
    def degree_y(self) -> int:
        return max((b for _, b in self._terms), default=0)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def support(self) -> List[Exponent]:
        return sorted(self._terms)

    def coefficient(self, a: int, b: int) -> Fraction:
        return self._terms.get((a, b), Fraction(0))

    def depends_on(self, axis: str) -> bool:
        index = 0 if axis == 'x' else 1
        return any(e[index] > 0 for e in self._terms)

    @cachedproperty
    def coefficient_matrix(self) -> np.ndarray:
        """Float coefficients, entry [i, j] multiplies x^i y^j."""
        c = np.zeros((self.degree_x + 1, self.degree_y + 1))
        for (a, b), value in self._terms.items():
            c[a, b] = float(value)
        return c

    # arithmetic

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self._terms)
        for key, value in other._terms.items():
            terms[key] = terms.get(key, Fraction(0)) + value
        return BivarPoly(terms)

    __radd__ = __add__

    def __neg__(self):
        return BivarPoly({key: -value for key, value in self._terms.items()})

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        terms: Dict[Exponent, Fraction] = {}
        for (a1, b1), c1 in self._terms.items():
            for (a2, b2), c2 in other._terms.items():
                key = (a1 + a2, b1 + b2)
                terms[key] = terms.get(key, Fraction(0)) + c1 * c2
        return BivarPoly(terms)

    __rmul__ = __mul__

    def __pow__(self, power: int):
        if not isinstance(power, int) or power < 0:
            raise ValueError('power must be a non-negative int')
        result = BivarPoly.constant(1)
        base = self
        while power:
            if power & 1:
                result = result * base
            base = base * base
            power >>= 1
        return result

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    # evaluation

    def exact_eval(self, x: Number, y: Number) -> Fraction:
        x, y = to_fraction(x), to_fraction(y)
        return sum((c * x ** a * y ** b for (a, b), c in self._terms.items()), Fraction(0))

    def __call__(self, x, y):
        return eval(self, x, y)

    def evaluate(self, xs, ys) -> np.ndarray:
        """Evaluate at paired points (broadcast), Horner in each variable."""
        return npoly.polyval2d(
            np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), self.coefficient_matrix
        )

    def evaluate_grid(self, xs, ys) -> np.ndarray:
        """Values on the tensor grid xs × ys; result[a, b] = p(xs[a], ys[b])."""
        return npoly.polygrid2d(
            np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), self.coefficient_matrix
        )

    # transforms

    def compose(self, x_sub: 'BivarPoly', y_sub: 'BivarPoly') -> 'BivarPoly':
        """p(X(u, v), Y(u, v)) for polynomial substitutions X and Y."""
        x_pows = [BivarPoly.constant(1)]
        y_pows = [BivarPoly.constant(1)]
        for _ in range(self.degree_x):
            x_pows.append(x_pows[-1] * x_sub)
        for _ in range(self.degree_y):
            y_pows.append(y_pows[-1] * y_sub)
        result = BivarPoly()
        for (a, b), c in self._terms.items():
            result = result + c * x_pows[a] * y_pows[b]
        return result

    def reflect(self, axis: str) -> 'BivarPoly':
        """p(-x, y) for axis 'x', p(x, -y) for axis 'y'."""
        index = 0 if axis == 'x' else 1
        return BivarPoly(
            {e: (-c if e[index] % 2 else c) for e, c in self._terms.items()}
        )

    def to_sympy(self) -> sympy.Poly:
        return sympy.Poly.from_dict(
            {e: sympy.Rational(c.numerator, c.denominator) for e, c in self._terms.items()}
            or {(0, 0): 0},
            _X,
            _Y,
            domain=sympy.QQ,
        )

    @classmethod
    def from_sympy(cls, poly: Union[sympy.Poly, sympy.Expr]) -> 'BivarPoly':
        if not isinstance(poly, sympy.Poly):
            poly = sympy.Poly(poly, _X, _Y, domain=sympy.QQ)
        gens = [str(g) for g in poly.gens]
        terms = {}
        for monom, coeff in poly.terms():
            powers = dict(zip(gens, monom))
            extra = set(powers) - {'x', 'y'}
            if any(powers[g] for g in extra):
                raise ParseError('only x and y may appear, got {}'.format(poly.gens))
            rational = sympy.Rational(coeff)
            terms[(powers.get('x', 0), powers.get('y', 0))] = Fraction(
                int(rational.p), int(rational.q)
            )
        return cls(terms)

    def __str__(self):
        if not self._terms:
            return '0'
        parts = []
        for a, b in sorted(self._terms, key=lambda e: (-(e[0] + e[1]), -e[0])):
            c = self._terms[(a, b)]
            factors = []
            if a:
                factors.append('x' if a == 1 else 'x^{}'.format(a))
            if b:
                factors.append('y' if b == 1 else 'y^{}'.format(b))
            mag = abs(c)
            if not factors:
                body = fraction_str(mag)
            elif mag == 1:
                body = '*'.join(factors)
            else:
                body = '*'.join([fraction_str(mag)] + factors)
            parts.append(('- ' if c < 0 else '+ ') + body)
        text = ' '.join(parts)
        return text[2:] if text.startswith('+ ') else '-' + text[2:]

    def __repr__(self):
        return '<BivarPoly {}>'.format(self)


def _coerce(other) -> Union[BivarPoly, type(NotImplemented)]:
    if isinstance(other, BivarPoly):
        return other
    if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
        return BivarPoly.constant(other)
    return NotImplemented


def parse_poly(text: str) -> BivarPoly:
    """Read the text format: sums of ``c*x^a*y^b`` terms, ``**`` accepted for ``^``.

    >>> parse_poly('1/6 * x**3 * y')
    <BivarPoly 1/6*x^3*y>
    >>> parse_poly('(x+y)^2').support
    [(0, 2), (1, 1), (2, 0)]
    """

    if not isinstance(text, str) or not text.strip():
        raise ParseError('empty polynomial text')
    if not _ALLOWED.match(text):
        raise ParseError(
            '{!r} contains characters outside the polynomial text format'.format(text)
        )
    try:
        expr = parse_expr(
            text, local_dict={'x': _X, 'y': _Y}, transformations=_TRANSFORMATIONS
        )
        poly = sympy.Poly(expr, _X, _Y, domain=sympy.QQ)
    except (SyntaxError, TypeError, ValueError, sympy.PolynomialError, sympy.SympifyError) as e:
        raise ParseError('cannot read {!r} as a polynomial: {}'.format(text, e)) from None
    return BivarPoly.from_sympy(poly)


def as_poly(obj: Union[BivarPoly, str, int, Fraction]) -> BivarPoly:
    if isinstance(obj, BivarPoly):
        return obj
    if isinstance(obj, str):
        return parse_poly(obj)
    return BivarPoly.constant(obj)


def _falling(n: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= n - i
    return out


def differentiate(p: BivarPoly, axis: str, times: int = 1) -> BivarPoly:
    """Formal partial derivative.

    >>> str(differentiate(parse_poly('x^3*y^2'), 'y', 2))
    '2*x^3'
    """

    if axis not in ('x', 'y'):
        raise ValueError("axis must be 'x' or 'y', not {!r}".format(axis))
    if times < 0:
        raise ValueError('times must be non-negative')
    terms = {}
    for (a, b), c in p.terms.items():
        if axis == 'x' and a >= times:
            terms[(a - times, b)] = c * _falling(a, times)
        elif axis == 'y' and b >= times:
            terms[(a, b - times)] = c * _falling(b, times)
    return BivarPoly(terms)


def directional_derivative(p: BivarPoly, a: Number, b: Number) -> BivarPoly:
    """(a ∂x + b ∂y) p"""
    return differentiate(p, 'x') * to_fraction(a) + differentiate(p, 'y') * to_fraction(b)


def convolution_hessian(s: BivarPoly) -> BivarPoly:
    """H = ∂x ∂y (∂x - ∂y) S, the operator killing p(x) + q(y) + r(x + y)."""
    return directional_derivative(
        directional_derivative(directional_derivative(s, 1, 0), 0, 1), 1, -1
    )


def sheared_hessian(s: BivarPoly) -> BivarPoly:
    """∂u ∂v (∂u + ∂v) S, the annihilator matching the projections u, v and v - u."""
    return directional_derivative(
        directional_derivative(directional_derivative(s, 1, 0), 0, 1), 1, 1
    )


def is_degenerate(s: BivarPoly) -> bool:
    return convolution_hessian(s).is_zero


# noinspection PyShadowingBuiltins
def eval(p: BivarPoly, x: float, y: float) -> float:
    """Numerical value at a point.

    >>> eval(parse_poly('x^2*y'), 2, 3)
    12.0
    """

    if p.is_zero:
        return 0.0
    return float(npoly.polyval2d(float(x), float(y), p.coefficient_matrix))


@dataclass(frozen=True)
class Rect:
    """Axis-parallel rectangle with exact rational corners."""

    x_lo: Fraction
    x_hi: Fraction
    y_lo: Fraction
    y_hi: Fraction

    def __post_init__(self):
        for name in ('x_lo', 'x_hi', 'y_lo', 'y_hi'):
            object.__setattr__(self, name, to_fraction(getattr(self, name)))
        if not (self.x_lo < self.x_hi and self.y_lo < self.y_hi):
            raise ValueError('degenerate rectangle {!r}'.format(self.as_floats()))

    @classmethod
    def unit(cls) -> 'Rect':
        return cls(0, 1, 0, 1)

    @property
    def width(self) -> Fraction:
        return self.x_hi - self.x_lo

    @property
    def height(self) -> Fraction:
        return self.y_hi - self.y_lo

    @property
    def center(self) -> Tuple[Fraction, Fraction]:
        return (self.x_lo + self.x_hi) / 2, (self.y_lo + self.y_hi) / 2

    @property
    def corners(self) -> List[Tuple[Fraction, Fraction]]:
        return [
            (self.x_lo, self.y_lo),
            (self.x_hi, self.y_lo),
            (self.x_lo, self.y_hi),
            (self.x_hi, self.y_hi),
        ]

    def as_floats(self) -> Tuple[float, float, float, float]:
        return float(self.x_lo), float(self.x_hi), float(self.y_lo), float(self.y_hi)

    def quarters(self) -> List['Rect']:
        xm, ym = self.center
        return [
            Rect(self.x_lo, xm, self.y_lo, ym),
            Rect(xm, self.x_hi, self.y_lo, ym),
            Rect(self.x_lo, xm, ym, self.y_hi),
            Rect(xm, self.x_hi, ym, self.y_hi),
        ]

    def dilate(self, factor: Number) -> 'Rect':
        """Same center, sides multiplied by factor."""
        factor = to_fraction(factor)
        xm, ym = self.center
        hw, hh = self.width * factor / 2, self.height * factor / 2
        return Rect(xm - hw, xm + hw, ym - hh, ym + hh)

    def contains(self, other: 'Rect') -> bool:
        return (
            self.x_lo <= other.x_lo
            and other.x_hi <= self.x_hi
            and self.y_lo <= other.y_lo
            and other.y_hi <= self.y_hi
        )


class Enclosure(NamedTuple):
    lower: float
    upper: float


class BernsteinBounds(NamedTuple):
    """Per-box bounds from a single Bernstein conversion (no subdivision)."""

    lower: np.ndarray
    upper: np.ndarray
    # values actually attained at the box corners
    corner_min: np.ndarray
    corner_max: np.ndarray


def _shift_matrices(lo: np.ndarray, width: np.ndarray, deg: int) -> np.ndarray:
    # T[:, k, i] = C(i, k) lo^(i-k) width^k, so that sum_i a_i (lo + width t)^i = sum_k (T a)_k t^k
    k_idx, i_idx = np.meshgrid(np.arange(deg + 1), np.arange(deg + 1), indexing='ij')
    diff = i_idx - k_idx
    mask = diff >= 0
    binom = np.where(mask, comb(i_idx, k_idx), 0.0)
    lo_pow = lo[:, None] ** np.arange(deg + 1)[None, :]
    w_pow = width[:, None] ** np.arange(deg + 1)[None, :]
    return (
        binom[None, :, :]
        * lo_pow[:, np.clip(diff, 0, None)]
        * w_pow[:, k_idx]
        * mask[None, :, :]
    )


def _bernstein_matrix(deg: int) -> np.ndarray:
    # b_k = sum_{i <= k} C(k, i) / C(deg, i) a_i
    k_idx, i_idx = np.meshgrid(np.arange(deg + 1), np.arange(deg + 1), indexing='ij')
    return np.where(i_idx <= k_idx, comb(k_idx, i_idx) / comb(deg, i_idx), 0.0)


def _bernstein_coefficients(p: BivarPoly, x_lo, x_hi, y_lo, y_hi) -> Tuple[np.ndarray, np.ndarray]:
    # Bernstein coefficients per box, with a rounding-error pad per box
    a = p.coefficient_matrix
    dx, dy = a.shape[0] - 1, a.shape[1] - 1
    tx = _shift_matrices(x_lo, x_hi - x_lo, dx)
    ty = _shift_matrices(y_lo, y_hi - y_lo, dy)
    bx, by = _bernstein_matrix(dx), _bernstein_matrix(dy)

    b = bx @ (tx @ a @ np.transpose(ty, (0, 2, 1))) @ by.T
    if dx + dy == 0:
        return b, np.zeros(len(x_lo))
    magnitude = bx @ (np.abs(tx) @ np.abs(a) @ np.transpose(np.abs(ty), (0, 2, 1))) @ by.T
    pad = 4.0 * (dx + dy + 2) * _UNIT_ROUNDOFF * magnitude.reshape(len(x_lo), -1).max(axis=1)
    return b, pad


def bernstein_bounds(p: BivarPoly, x_lo, x_hi, y_lo, y_hi) -> BernsteinBounds:
    """Vectorised one-shot Bernstein enclosure over many boxes.

    Bounds are widened by a rounding-error estimate so they stay valid in
    floating point; constants are returned exactly.
    """

    x_lo = np.atleast_1d(np.asarray(x_lo, dtype=float))
    x_hi = np.atleast_1d(np.asarray(x_hi, dtype=float))
    y_lo = np.atleast_1d(np.asarray(y_lo, dtype=float))
    y_hi = np.atleast_1d(np.asarray(y_hi, dtype=float))
    k = len(x_lo)
    if p.is_zero:
        zeros = np.zeros(k)
        return BernsteinBounds(zeros, zeros, zeros, zeros)

    b, pad = _bernstein_coefficients(p, x_lo, x_hi, y_lo, y_hi)
    dx, dy = b.shape[1] - 1, b.shape[2] - 1
    flat = b.reshape(k, -1)
    corners = np.stack([b[:, 0, 0], b[:, dx, 0], b[:, 0, dy], b[:, dx, dy]], axis=1)
    return BernsteinBounds(flat.min(axis=1) - pad, flat.max(axis=1) + pad, corners.min(axis=1), corners.max(axis=1))


def _enclose_box(p: BivarPoly, r: Rect) -> Tuple[float, float, float, float]:
    """(lower, upper, attained_min, attained_max) for one box, corners exact."""
    exact = [float(p.exact_eval(x, y)) for x, y in r.corners]
    attained_min, attained_max = min(exact), max(exact)

    b, pad = _bernstein_coefficients(p, *[np.array([v]) for v in r.as_floats()])
    b, pad = b[0], float(pad[0])
    dx, dy = b.shape[0] - 1, b.shape[1] - 1
    interior = np.ones_like(b, dtype=bool)
    for i, j in ((0, 0), (dx, 0), (0, dy), (dx, dy)):
        interior[i, j] = False
    if not interior.any():
        return attained_min, attained_max, attained_min, attained_max
    lower = min(attained_min, float(b[interior].min()) - pad)
    upper = max(attained_max, float(b[interior].max()) + pad)
    return lower, upper, attained_min, attained_max


def _within(gap: float, scale: float, tol: float) -> bool:
    return gap <= tol * max(1.0, abs(scale))


def range_on_rect(
    p: BivarPoly, r: Rect, tol: float = DEFAULT_TOLERANCE, budget: int = DEFAULT_BUDGET
) -> Enclosure:
    """Guaranteed enclosure of p over r, tightened by adaptive quartering.

    >>> range_on_rect(parse_poly('x'), Rect.unit())
    Enclosure(lower=0.0, upper=1.0)
    >>> range_on_rect(parse_poly('x*y'), Rect(1, 2, 1, 2))
    Enclosure(lower=1.0, upper=4.0)
    """

    if tol <= 0:
        raise ValueError('tol must be positive, not {!r}'.format(tol))
    if p.is_zero:
        return Enclosure(0.0, 0.0)

    ids = count()
    boxes: Dict[int, Tuple[Rect, float, float]] = {}
    upper_heap: List[Tuple[float, int]] = []
    lower_heap: List[Tuple[float, int]] = []
    attained = [np.inf, -np.inf]

    def push(box: Rect) -> None:
        lo, hi, amin, amax = _enclose_box(p, box)
        i = next(ids)
        boxes[i] = (box, lo, hi)
        heapq.heappush(upper_heap, (-hi, i))
        heapq.heappush(lower_heap, (lo, i))
        attained[0] = min(attained[0], amin)
        attained[1] = max(attained[1], amax)

    def top(heap):
        while heap[0][1] not in boxes:
            heapq.heappop(heap)
        return heap[0]

    push(r)
    created = 1
    while True:
        upper = -top(upper_heap)[0]
        lower = top(lower_heap)[0]
        upper_ok = _within(upper - attained[1], upper, tol)
        lower_ok = _within(attained[0] - lower, lower, tol)
        if upper_ok and lower_ok:
            return Enclosure(lower, upper)
        if created + 4 > budget:
            raise EnclosureBudgetError(
                'range enclosure of {} on {} needs more than {} boxes'.format(
                    p, r.as_floats(), budget
                ),
                Enclosure(lower, upper),
                (attained[0], attained[1]),
            )
        worst = top(upper_heap)[1] if not upper_ok else top(lower_heap)[1]
        box = boxes.pop(worst)[0]
        for child in box.quarters():
            push(child)
        created += 4


def sup_abs_bounds(
    p: BivarPoly, r: Rect, tol: float = DEFAULT_TOLERANCE, budget: int = DEFAULT_BUDGET
) -> Tuple[float, float]:
    """(guaranteed lower bound, guaranteed upper bound) for sup over r of |p|.

    Once the budget runs out the enclosure is no longer within tol, so the
    lower bound falls back to the largest value p is known to attain.
    """
    try:
        lower, upper = range_on_rect(p, r, tol, budget)
    except EnclosureBudgetError as e:
        lower, upper = e.enclosure
        debug(e.msg)
        return max(abs(v) for v in e.attained), max(abs(lower), abs(upper))
    top = max(abs(lower), abs(upper))
    gap = tol * max(1.0, top)
    return max(0.0, top - gap), top
