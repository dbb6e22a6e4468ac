"""
Exact real-root machinery for univariate rational polynomials.

Multiplicities come from the squarefree decomposition; every squarefree factor
is isolated with its Sturm sequence and refined by sign-change bisection in
exact rational arithmetic.
"""

from fractions import Fraction
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import sympy

from .utils import *

__all__ = [
    'RealRoot',
    'as_upoly',
    'to_coeffs',
    'horner',
    'squarefree_factors',
    'sign_variations',
    'isolate_real_roots',
    'refine_root',
    'real_roots',
    'complex_root_count',
    'ROOT_TOLERANCE',
]

T = sympy.Symbol('t')
ROOT_TOLERANCE = Fraction(1, 10 ** 12)

UPolyLike = Union[sympy.Poly, sympy.Expr, Sequence]


class RealRoot(NamedTuple):
    value: float
    multiplicity: int
    # isolating interval (lo, hi]; lo == hi when the root is hit exactly
    lo: Fraction
    hi: Fraction


def as_upoly(p: UPolyLike) -> sympy.Poly:
    """Univariate polynomial over QQ.

    Sequences are read as coefficients in increasing degree order.

    >>> as_upoly([-1, 0, 1]).as_expr()
    t**2 - 1
    """

    if isinstance(p, sympy.Poly):
        if len(p.gens) != 1:
            raise ValueError('expected a univariate polynomial, got gens {}'.format(p.gens))
        return sympy.Poly(p.as_expr(), p.gens[0], domain=sympy.QQ)
    if isinstance(p, (list, tuple)):
        terms = {(i,): sympy.Rational(Fraction(c).numerator, Fraction(c).denominator)
                 for i, c in enumerate(p) if c != 0}
        return sympy.Poly.from_dict(terms or {(0,): 0}, T, domain=sympy.QQ)
    free = sorted(p.free_symbols, key=str)
    if len(free) > 1:
        raise ValueError('expected a univariate expression, got {}'.format(p))
    return sympy.Poly(p, free[0] if free else T, domain=sympy.QQ)


def to_coeffs(p: sympy.Poly) -> List[Fraction]:
    """Coefficients in increasing degree order as fractions."""
    coeffs = []
    for c in reversed(p.all_coeffs()):
        c = sympy.Rational(c)
        coeffs.append(Fraction(int(c.p), int(c.q)))
    return coeffs


def horner(coeffs: Sequence[Fraction], t: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def _sign(value: Fraction) -> int:
    return (value > 0) - (value < 0)


def squarefree_factors(p: sympy.Poly) -> List[Tuple[sympy.Poly, int]]:
    """Squarefree decomposition [(f_k, k)] with p = c * prod f_k^k."""
    _, factors = p.sqf_list()
    return [(f, k) for f, k in factors if f.degree() > 0]


def sign_variations(chain: Sequence[Sequence[Fraction]], t: Fraction) -> int:
    signs = [s for s in (_sign(horner(c, t)) for c in chain) if s]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _root_bound(coeffs: Sequence[Fraction]) -> Fraction:
    lead = abs(coeffs[-1])
    return 1 + max((abs(c) / lead for c in coeffs[:-1]), default=Fraction(0))


def isolate_real_roots(
    f: sympy.Poly, lo: Optional[Fraction] = None, hi: Optional[Fraction] = None
) -> List[Tuple[Fraction, Fraction]]:
    """Disjoint intervals (a, b] each holding exactly one distinct real root of f in (lo, hi]."""
    coeffs = to_coeffs(f)
    if len(coeffs) < 2:
        return []
    bound = _root_bound(coeffs)
    lo = -bound if lo is None else to_fraction(lo)
    hi = bound if hi is None else to_fraction(hi)
    if lo >= hi:
        return []

    chain = [to_coeffs(g) for g in sympy.sturm(f)]
    found = []
    stack = [(lo, hi, sign_variations(chain, lo), sign_variations(chain, hi))]
    while stack:
        a, b, va, vb = stack.pop()
        n = va - vb
        if n <= 0:
            continue
        if n == 1:
            found.append((a, b))
            continue
        m = (a + b) / 2
        vm = sign_variations(chain, m)
        stack.append((m, b, vm, vb))
        stack.append((a, m, va, vm))
    return sorted(found)


def refine_root(
    coeffs: Sequence[Fraction], lo: Fraction, hi: Fraction, tol: Fraction = ROOT_TOLERANCE
) -> Tuple[Fraction, Fraction]:
    """Shrink (lo, hi] around its single simple root until hi - lo <= tol."""
    s_hi = _sign(horner(coeffs, hi))
    if s_hi == 0:
        return hi, hi
    while hi - lo > tol:
        mid = (lo + hi) / 2
        s_mid = _sign(horner(coeffs, mid))
        if s_mid == 0:
            return mid, mid
        if s_mid != s_hi:
            lo = mid
        else:
            hi = mid
    return lo, hi


def real_roots(
    p: UPolyLike,
    lo: Optional[Fraction] = None,
    hi: Optional[Fraction] = None,
    tol: Fraction = ROOT_TOLERANCE,
) -> List[RealRoot]:
    """All real roots in (lo, hi] with multiplicities, sorted.

    >>> [(round(r.value, 9), r.multiplicity) for r in real_roots([-8, 12, -6, 1])]
    [(2.0, 3)]
    >>> real_roots([1, 0, 1])
    []
    """

    p = as_upoly(p)
    if p.is_zero:
        raise ValueError('the zero polynomial has no isolated roots')
    roots = []
    for f, k in squarefree_factors(p):
        coeffs = to_coeffs(f)
        for a, b in isolate_real_roots(f, lo, hi):
            a, b = refine_root(coeffs, a, b, tol)
            roots.append(RealRoot(float((a + b) / 2), k, a, b))
    return sorted(roots, key=lambda r: r.value)


def complex_root_count(p: UPolyLike) -> int:
    """Number of non-real roots counted with multiplicity."""
    p = as_upoly(p)
    real = sum(r.multiplicity for r in real_roots(p)) if p.degree() > 0 else 0
    return max(p.degree(), 0) - real
