"""
Sublevel-set trilinear forms and shell-localised oscillatory forms.

The sublevel form has kernel 1{|H| <= mu} restricted to an algebraic domain;
its norm grows like mu^(1/(2d)) when some derivative of order d of H stays
above 1 on the domain. The shell form inserts phi(H/mu) for a dyadic bump phi
into the oscillatory form and decays like |lam mu|^(-1/6).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .algebraic import AlgebraicDomain, CurvedTrapezoid, decompose_domain
from .poly import BivarPoly, EnclosureBudgetError, Rect, convolution_hessian, differentiate, range_on_rect
from .trilinear import (
    CutoffSpec,
    GridError,
    HypothesisError,
    assemble_grid,
    operator_norm,
    smoothstep,
)
from .utils import *

__all__ = [
    'SublevelSweep',
    'ShellSweep',
    'RectangleAudit',
    'sublevel_grid',
    'sublevel_norm',
    'monomial_sublevel_bound',
    'check_derivative_conditions',
    'sublevel_sweep',
    'shell_profile',
    'shell_norm',
    'shell_sweep',
    'uniform_decay_envelope',
    'audit_inscribed_rectangles',
]

MIN_SUBLEVEL_GRID = 64


def sublevel_grid(h: BivarPoly, d_set: AlgebraicDomain, mu: float, n: int):
    """Grid on [0, 1]^2 whose cutoff is the indicator of {|H| <= mu} within the domain."""
    if n < MIN_SUBLEVEL_GRID:
        raise GridError('sublevel grids need n >= {}, got {}'.format(MIN_SUBLEVEL_GRID, n))
    centers = (np.arange(n) + 0.5) / n
    xs, ys = np.meshgrid(centers, centers, indexing='ij')
    table = (np.abs(h.evaluate_grid(centers, centers)) <= mu) & d_set.contains(xs, ys)
    return assemble_grid(BivarPoly(), CutoffSpec(kind='table', table=table.astype(float)), Rect.unit(), n)


def sublevel_norm(
    h: BivarPoly, d_set: AlgebraicDomain, mu: float, n: int = 256,
    restarts: int = 8, iters: int = 100, seed: int = 0, threads: Optional[int] = None,
) -> float:
    if mu < 0:
        raise ValueError('mu must be non-negative')
    grid = sublevel_grid(h, d_set, mu, n)
    if not grid.cutoff.any():
        return 0.0
    return operator_norm(grid, 0.0, restarts, iters, seed, threads=threads)


def _axis_series(alpha: int, top: int) -> float:
    # sum over j <= top of 2^(j / (2 alpha))
    ratio = 2.0 ** (-1 / (2 * alpha))
    return 2.0 ** (top / (2 * alpha)) / (1 - ratio)


def monomial_sublevel_bound(alpha: Tuple[int, int], mu: float, tol: float = 1e-14) -> float:
    """Sum of the box bounds min(2^(k/(2 a1)), 2^(l/(2 a2))) over the boxes meeting {x^a1 y^a2 <= mu}.

    Boxes are indexed by x^a1 ~ 2^k, y^a2 ~ 2^l with k, l <= 0 and
    j - 1 <= k + l <= j + 1 for j <= log2 mu.

    >>> round(monomial_sublevel_bound((0, 1), 1 / 16), 12) == round(0.25 / (1 - 2 ** -0.5), 12)
    True
    """

    a1, a2 = alpha
    if a1 < 0 or a2 < 0 or (a1, a2) == (0, 0):
        raise ValueError('alpha must be a nonzero exponent pair, got {}'.format(alpha))
    if mu <= 0:
        return 0.0
    top = min(dyadic_floor(mu), 0)
    if a1 == 0 or a2 == 0:
        return _axis_series(a1 or a2, top)

    total = 0.0
    j = top
    while True:
        layer = 0.0
        for s in range(j - 1, min(j + 1, 0) + 1):
            for k in range(s, 1):
                layer += min(2.0 ** (k / (2 * a1)), 2.0 ** ((s - k) / (2 * a2)))
        total += layer
        if layer <= tol * total:
            return total
        j -= 1


def check_derivative_conditions(
    h: BivarPoly,
    trapezoids: Sequence[CurvedTrapezoid],
    conditions: Sequence[Tuple[int, int]],
    pieces: int = 16,
    tol: float = 1e-6,
) -> int:
    """Verify |d^alpha H| >= 1 on every trapezoid for at least one alpha; returns d = min |alpha|.

    Each condition must hold on the whole domain; the first rectangle where an
    enclosure drops below 1 is reported.
    """

    if not conditions:
        raise ValueError('at least one derivative condition is required')
    for a, b in conditions:
        derivative = differentiate(differentiate(h, 'x', a), 'y', b)
        for t in trapezoids:
            for r in t.rect_cover(pieces):
                try:
                    lo, hi = range_on_rect(derivative, r)
                except EnclosureBudgetError as e:
                    lo, hi = e.enclosure
                low = 0.0 if lo <= 0 <= hi else min(abs(lo), abs(hi))
                if low < 1 - tol:
                    raise HypothesisError(
                        'derivative condition ({}, {}) fails: |d^alpha H| >= {:.4g} only on {}'.format(
                            a, b, low, r.as_floats()),
                        r,
                    )
    return min(a + b for a, b in conditions)


@dataclass
class SublevelSweep:
    mus: List[float]
    norms: List[float]
    d: int
    fitted_exponent: float
    theory_exponent: Fraction
    # envelope values when H is a monomial, else empty
    bounds: List[float]


def sublevel_sweep(
    h: BivarPoly,
    d_set: AlgebraicDomain,
    mus: Sequence[float],
    derivative_conditions: Sequence[Tuple[int, int]],
    n: int = 256,
    restarts: int = 8,
    iters: int = 100,
    seed: int = 0,
    threads: Optional[int] = None,
    trapezoids: Optional[List[CurvedTrapezoid]] = None,
) -> SublevelSweep:
    """Sublevel norms over increasing mu with the log-log growth exponent.

    The reported norms are running maxima: the discrete norm is monotone in mu,
    so a lower bound at a smaller mu is a lower bound at every larger one.
    """

    mus = [float(m) for m in mus]
    if len(mus) < 2 or any(b <= a for a, b in zip(mus, mus[1:])) or mus[0] <= 0:
        raise ValueError('mus must be positive and strictly increasing')
    trapezoids = decompose_domain(d_set) if trapezoids is None else trapezoids
    d = check_derivative_conditions(h, trapezoids, derivative_conditions)

    def task(i):
        value = sublevel_norm(h, d_set, mus[i], n, restarts, iters, seed + i, threads=1)
        info('mu = {:g}: sublevel norm {:.6g}'.format(mus[i], value))
        return value

    with ThreadPoolExecutor(max_workers=thread_count(threads)) as pool:
        raw = list(pool.map(task, range(len(mus))))
    norms = [float(v) for v in np.maximum.accumulate(raw)]

    support = h.support
    bounds = []
    if len(support) == 1:
        alpha = support[0]
        scale = float(abs(h.coefficient(*alpha)))
        bounds = [monomial_sublevel_bound(alpha, m / scale) for m in mus]

    positive = [(m, v) for m, v in zip(mus, norms) if v > 0]
    if len(positive) < 2:
        raise GridError('the sublevel sets are empty on this grid; increase n or mu')
    fitted = loglog_slope([m for m, _ in positive], [v for _, v in positive])
    return SublevelSweep(mus, norms, d, fitted, Fraction(1, 2 * d), bounds)


def shell_profile(t):
    """C2 bump supported in [1/2, 2] whose dyadic dilates sum to 1 on t > 0.

    >>> float(shell_profile(1.0)), float(shell_profile(2.0))
    (1.0, 0.0)
    """

    t = np.asarray(t, dtype=float)
    s = np.log2(np.where(t > 0, t, 1.0))
    rising = smoothstep(1 + s)
    falling = 1 - smoothstep(s)
    value = np.where(s <= 0, rising, falling)
    return np.where((t > 0.5) & (t < 2), value, 0.0)


def _shell_grid(s: BivarPoly, mu: float, domain: Rect, n: int, cutoff: Optional[CutoffSpec]):
    base = assemble_grid(s, cutoff or CutoffSpec(), domain, n)
    weights = shell_profile(np.abs(convolution_hessian(s).evaluate_grid(base.xs, base.ys)) / mu)
    table = base.cutoff * weights
    return assemble_grid(s, CutoffSpec(kind='table', table=table), domain, n)


def shell_norm(
    s: BivarPoly, lam: float, mu: float, domain: Rect, n: int,
    restarts: int = 8, iters: int = 200, seed: int = 0, cutoff: Optional[CutoffSpec] = None,
) -> float:
    """Operator norm of the oscillatory form with phi(H/mu) inserted into the kernel."""
    if mu <= 0:
        raise ValueError('mu must be positive')
    return operator_norm(_shell_grid(s, mu, domain, n, cutoff), lam, restarts, iters, seed)


class ShellSweep(NamedTuple):
    lambdas: List[float]
    norms: List[float]
    # norm * |lam mu|^(1/6), bounded when the shell estimate holds
    scaled: List[float]
    spread: float


def shell_sweep(
    s: BivarPoly, mu: float, lambdas: Sequence[float], domain: Rect, n: int,
    restarts: int = 8, iters: int = 200, seed: int = 0, cutoff: Optional[CutoffSpec] = None,
    threads: Optional[int] = None,
) -> ShellSweep:
    grid = _shell_grid(s, mu, domain, n, cutoff)
    if not grid.cutoff.any():
        raise HypothesisError('phi(H/mu) vanishes on the whole grid; |H| never meets mu')

    def task(i):
        return operator_norm(grid, lambdas[i], restarts, iters, seed + i, threads=1)

    with ThreadPoolExecutor(max_workers=thread_count(threads)) as pool:
        norms = list(pool.map(task, range(len(lambdas))))
    scaled = [v * abs(lam * mu) ** (1 / 6) for v, lam in zip(norms, lambdas)]
    return ShellSweep([float(v) for v in lambdas], norms, scaled, max(scaled) / min(scaled))


def uniform_decay_envelope(lam: float, d: int) -> float:
    """sum_j min(2^(j/(2d)), (lam 2^j)^(-1/6)) over j <= 0; lam^(-1/6) when d = 0.

    Balancing the sublevel growth against the shell decay gives lam^(-1/(2(3+d))).
    """

    if lam <= 0:
        raise ValueError('lam must be positive')
    if d == 0:
        return lam ** (-1 / 6)
    total = 0.0
    j = 0
    while True:
        term = min(2.0 ** (j / (2 * d)), (lam * 2.0 ** j) ** (-1 / 6))
        total += term
        if 2.0 ** (j / (2 * d)) <= 1e-16 * total:
            return total
        j -= 1


class RectangleAudit(NamedTuple):
    sampled: int
    inscribed: int
    # max of a^a1 b^a2 / mu over inscribed rectangles of sides a, b
    max_ratio: float


def audit_inscribed_rectangles(
    alpha: Tuple[int, int], mu: float, trapezoids: Sequence[CurvedTrapezoid], samples: int = 1000, seed: int = 0
) -> RectangleAudit:
    """Sample axis-parallel rectangles inside the trapezoids of {x^a1 y^a2 <= mu} and compare a^a1 b^a2 with mu."""
    rng = np.random.default_rng(seed)
    a1, a2 = alpha
    inscribed, worst = 0, 0.0
    for t in trapezoids:
        x0 = rng.uniform(t.a, t.b, samples)
        x1 = x0 + rng.uniform(0, 1, samples) * (t.b - x0)
        # g and h are monotone, so their extremes over [x0, x1] sit at the ends
        floor = np.maximum(t.g(x0), t.g(x1))
        ceiling = np.minimum(t.h(x0), t.h(x1))
        ok = ceiling > floor
        y0 = floor + rng.uniform(0, 1, samples) * (ceiling - floor)
        y1 = y0 + rng.uniform(0, 1, samples) * (ceiling - y0)
        ok &= (x1 > x0) & (y1 > y0)
        inscribed += int(ok.sum())
        if ok.any():
            worst = max(worst, float(np.max((x1 - x0)[ok] ** a1 * (y1 - y0)[ok] ** a2)) / mu)
    return RectangleAudit(samples * len(trapezoids), inscribed, worst)
