"""
Stopping-time resolution of a convolution Hessian near a root direction y = c x^M.

The pipeline is ``initial_cover`` -> ``stopping_time_decompose`` (the family
F_inf) -> ``expand_rectangles`` (the family G), followed by read-only audits of
the resulting rectangle families.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .newton import EdgeData, EdgeRoot, newton_polyhedron, reflect
from .poly import (
    BivarPoly,
    EnclosureBudgetError,
    Rect,
    bernstein_bounds,
    differentiate,
    range_on_rect,
    sup_abs_bounds,
    DEFAULT_TOLERANCE,
)
from .utils import *

__all__ = [
    'STOPPING_RULE',
    'DEPTH_CAP',
    'DyadicInterval',
    'DyadicRect',
    'SectorRegion',
    'ExpandedRect',
    'InitialCover',
    'InadmissibleRegionError',
    'ComparabilityReport',
    'EccentricityReport',
    'LineReport',
    'BinWindowReport',
    'CoverageReport',
    'root_sector_eps',
    'sector_for_root',
    'initial_cover',
    'stopping_rule_holds',
    'stopping_time_decompose',
    'bernstein_delta0',
    'refined_delta0',
    'expand_rectangles',
    'can_grow',
    'audit_comparability',
    'audit_overlap',
    'audit_eccentricity',
    'audit_line_orthogonality',
    'audit_bin_window',
    'audit_coverage',
    'projection_overlap',
]

STOPPING_RULE = 'stopping-rule'
DEPTH_CAP = 'depth-cap'

MAX_MU_HALVINGS = 30


class InadmissibleRegionError(OscintError):
    pass


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """[k 2^s, (k + 1) 2^s]"""

    k: int
    s: int

    @property
    def length(self) -> Fraction:
        return Fraction(2) ** self.s

    @property
    def lo(self) -> Fraction:
        return self.k * self.length

    @property
    def hi(self) -> Fraction:
        return (self.k + 1) * self.length

    def bounds(self) -> Tuple[float, float]:
        return math.ldexp(self.k, self.s), math.ldexp(self.k + 1, self.s)

    def parent(self) -> 'DyadicInterval':
        return DyadicInterval(self.k // 2, self.s + 1)

    def children(self) -> Tuple['DyadicInterval', 'DyadicInterval']:
        return DyadicInterval(2 * self.k, self.s - 1), DyadicInterval(2 * self.k + 1, self.s - 1)

    def __str__(self):
        return '[{}, {}]'.format(fraction_str(self.lo), fraction_str(self.hi))


@dataclass(frozen=True)
class DyadicRect:
    x_side: DyadicInterval
    y_side: DyadicInterval
    generation: int = 0
    stop_reason: Optional[str] = None

    @property
    def rect(self) -> Rect:
        return Rect(self.x_side.lo, self.x_side.hi, self.y_side.lo, self.y_side.hi)

    @property
    def side(self) -> Fraction:
        """l(R), the longer side."""
        return max(self.x_side.length, self.y_side.length)

    def box(self) -> Tuple[float, float, float, float]:
        return self.x_side.bounds() + self.y_side.bounds()

    def quarters(self) -> List['DyadicRect']:
        return [
            DyadicRect(x, y, self.generation + 1)
            for y in self.y_side.children()
            for x in self.x_side.children()
        ]

    def tagged(self, reason: str) -> 'DyadicRect':
        return replace(self, stop_reason=reason)


@dataclass(frozen=True)
class SectorRegion:
    """{x ~ 2^j, (c - eps) x^M < y < (c + eps) x^M} and its enlarged companion."""

    j: int
    M: Fraction
    c: float
    eps: float
    variant: str = 'U_j'
    # alpha + M beta along the Newton edge the root belongs to
    order: Fraction = Fraction(0)

    def __post_init__(self):
        if self.variant not in ('U_j', 'U_j*'):
            raise ValueError('unknown sector variant {!r}'.format(self.variant))
        if self.c <= 0 or self.eps <= 0 or 2 * self.eps >= self.c:
            raise ValueError(
                'sector needs 0 < 2 eps < c, got c={!r}, eps={!r}'.format(self.c, self.eps)
            )
        object.__setattr__(self, 'M', to_fraction(self.M))
        object.__setattr__(self, 'order', to_fraction(self.order))

    def star(self) -> 'SectorRegion':
        return replace(self, variant='U_j*')

    def base(self) -> 'SectorRegion':
        return replace(self, variant='U_j')

    @property
    def x_range(self) -> Tuple[Fraction, Fraction]:
        spread = 1 if self.variant == 'U_j' else 2
        return Fraction(2) ** (self.j - spread), Fraction(2) ** (self.j + spread)

    @property
    def width(self) -> float:
        return self.eps if self.variant == 'U_j' else 2 * self.eps

    def y_bounds(self, x):
        m = float(self.M)
        x = np.asarray(x, dtype=float)
        return (self.c - self.width) * x ** m, (self.c + self.width) * x ** m

    def contains_points(self, xs, ys) -> np.ndarray:
        xa, xb = (float(v) for v in self.x_range)
        xs, ys = np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
        inside_x = (xs > xa) & (xs < xb)
        lower, upper = self.y_bounds(np.clip(xs, 0.0, None))
        return inside_x & (ys > lower) & (ys < upper)

    def contains_rect(self, r: Rect) -> bool:
        """Closed containment of r."""
        xa, xb = self.x_range
        if r.x_lo < xa or r.x_hi > xb:
            return False
        x_lo, x_hi, y_lo, y_hi = r.as_floats()
        lower = (self.c - self.width) * x_hi ** float(self.M)
        upper = (self.c + self.width) * x_lo ** float(self.M)
        return y_lo >= lower and y_hi <= upper

    def meets_rect(self, r: Rect) -> bool:
        """Whether the open interiors of r and the sector intersect."""
        xa, xb = (float(v) for v in self.x_range)
        x_lo, x_hi, y_lo, y_hi = r.as_floats()
        u, v = max(x_lo, xa), min(x_hi, xb)
        if u >= v or y_hi <= 0:
            return False
        inv = 1.0 / float(self.M)
        x_top = (y_hi / (self.c - self.width)) ** inv
        x_bottom = (y_lo / (self.c + self.width)) ** inv if y_lo > 0 else 0.0
        return max(u, x_bottom) < min(v, x_top)

    def bounding_box(self) -> Tuple[float, float, float, float]:
        xa, xb = (float(v) for v in self.x_range)
        lower, _ = self.y_bounds(xa)
        _, upper = self.y_bounds(xb)
        return xa, xb, float(lower), float(upper)


@dataclass(frozen=True)
class ExpandedRect:
    base: DyadicRect
    expanded: str
    I: DyadicInterval
    J: DyadicInterval
    W: float
    bin: Tuple[int, int, int]
    sup_h: float = field(default=0.0, compare=False)

    @property
    def rect(self) -> Rect:
        return Rect(self.I.lo, self.I.hi, self.J.lo, self.J.hi)

    def box(self) -> Tuple[float, float, float, float]:
        return self.I.bounds() + self.J.bounds()


class InitialCover(NamedTuple):
    squares: List[DyadicRect]
    mu: Fraction
    side_exponent: int


class ComparabilityReport(NamedTuple):
    max_ratio: float
    c2_ratio: float
    violations: List[int]


class EccentricityReport(NamedTuple):
    sigma: float
    C: float
    sigma_c16: float
    fit_slope: float
    # rectangles with a side of length >= 1, where no sigma applies
    skipped: int = 0


class LineReport(NamedTuple):
    max_per_line: int
    per_bin: Dict[Tuple[int, int, int], int]


class BinWindowReport(NamedTuple):
    ok: bool
    c1: int
    c2: int


class CoverageReport(NamedTuple):
    covered: float
    depth_cap: float
    sampled: int


class _Derivatives:
    def __init__(self, h: BivarPoly):
        self.h = h
        self.hx = differentiate(h, 'x')
        self.hy = differentiate(h, 'y')


def root_sector_eps(edge: EdgeData, root: EdgeRoot) -> float:
    """Half of the largest eps leaving no other real root of p in (c - 2 eps, c + 2 eps)."""
    others = [r.value for r in edge.real_roots if r != root]
    gap = min((abs(v - root.value) for v in others), default=math.inf)
    eps_max = min(gap / 2, root.value / 2)
    return eps_max / 2


def sector_for_root(
    h: BivarPoly, edge_index: int, root_index: int, j: int, eps: Optional[float] = None
) -> Tuple[BivarPoly, SectorRegion]:
    """Sector around the root_index-th nonzero real root of the edge polynomial.

    Negative roots are moved to the first quadrant by y -> -y; the returned
    polynomial is the one the sector refers to.
    """

    if j >= 0:
        raise ValueError('the scale j must be negative, not {!r}'.format(j))
    nd = newton_polyhedron(h)
    if not nd.edges:
        raise InadmissibleRegionError('H has a single Newton vertex; there is no root sector')
    edge = _pick(nd.edges, edge_index, 'edge')
    roots = [r for r in edge.real_roots if r.sign != 0]
    root = _pick(roots, root_index, 'nonzero real root')

    if root.sign < 0:
        info('reflecting y -> -y to move root {} into the first quadrant'.format(root.value))
        h = reflect(h, 'y')
        nd = newton_polyhedron(h)
        edge = nd.edges[edge_index if edge_index >= 0 else len(nd.edges) + edge_index]
        root = min(edge.active_roots, key=lambda r: abs(r.value + root.value))

    chosen = root_sector_eps(edge, root) if eps is None else float(eps)
    region = SectorRegion(j=j, M=edge.M, c=root.value, eps=chosen, order=edge.order)
    debug('sector {} for H = {}'.format(region, h))
    return h, region


def _pick(items: Sequence, index: int, what: str):
    try:
        return items[index]
    except IndexError:
        raise InadmissibleRegionError(
            'no {} with index {} (only {} available)'.format(what, index, len(items))
        ) from None


def _cover_squares(region: SectorRegion, s: int) -> List[DyadicRect]:
    side = Fraction(2) ** s
    xa, xb = region.x_range
    squares = []
    for kx in range(math.floor(xa / side), math.ceil(xb / side)):
        u, v = max(kx * side, xa), min((kx + 1) * side, xb)
        lower, _ = region.y_bounds(float(u))
        _, upper = region.y_bounds(float(v))
        y0 = math.floor(float(lower) / float(side))
        y1 = math.ceil(float(upper) / float(side))
        for ky in range(y0, y1):
            square = DyadicRect(DyadicInterval(kx, s), DyadicInterval(ky, s))
            if region.meets_rect(square.rect):
                squares.append(square)
    return squares


def initial_cover(region: SectorRegion, mu) -> InitialCover:
    """Dyadic squares of side mu 2^(M j) meeting U_j whose doubles lie in U_j*.

    mu is halved until every double fits; the adjusted value is returned.
    """

    mu = to_fraction(mu)
    if not is_dyadic(mu):
        raise ValueError('mu must be a power of two, not {}'.format(mu))
    base, star = region.base(), region.star()
    m = max(region.M, Fraction(1))

    for _ in range(MAX_MU_HALVINGS + 1):
        s = math.floor(exact_log2(mu) + m * region.j)
        squares = _cover_squares(base, s)
        escaped = sum(1 for sq in squares if not star.contains_rect(sq.rect.dilate(2)))
        if squares and not escaped:
            info('initial cover: {} squares of side 2^{} (mu = {})'.format(len(squares), s, mu))
            return InitialCover(squares, mu, s)
        debug('mu = {}: {} doubles escape U_j*, halving'.format(mu, escaped))
        mu /= 2
    raise InadmissibleRegionError(
        'no admissible mu for sector j={}, c={}, eps={}; widen eps or lower j'.format(
            region.j, region.c, region.eps
        )
    )


def _boxes(rects: Sequence[DyadicRect]) -> np.ndarray:
    return np.array([r.box() for r in rects], dtype=float).reshape(-1, 4)


def _batch_abs(p: BivarPoly, boxes: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(attained lower bound, enclosure upper bound) for sup |p| per box."""
    b = bernstein_bounds(p, boxes[:, 0], boxes[:, 1], boxes[:, 2], boxes[:, 3])
    upper = np.maximum(np.abs(b.lower), np.abs(b.upper))
    lower = np.maximum(np.abs(b.corner_min), np.abs(b.corner_max))
    return lower, upper


def _sup_abs(p: BivarPoly, r: Rect, tol: float) -> float:
    if p.is_zero:
        return 0.0
    return sup_abs_bounds(p, r, tol)[1]


def _gradient_sup(ders: _Derivatives, r: Rect, tol: float) -> float:
    a, b = _sup_abs(ders.hx, r, tol), _sup_abs(ders.hy, r, tol)
    return math.hypot(a, b)


def stopping_rule_holds(h: BivarPoly, r: Rect, tol: float = DEFAULT_TOLERANCE) -> bool:
    """l(R) sup|grad H| < sup|H| / 4, with |grad H| <= sqrt(a^2 + b^2) from the component enclosures."""
    ders = _Derivatives(h)
    side = float(max(r.width, r.height))
    return side * _gradient_sup(ders, r, tol) < _sup_abs(h, r, tol) / 4


def _decide(ders: _Derivatives, squares: List[DyadicRect], tol: float) -> np.ndarray:
    boxes = _boxes(squares)
    side = np.maximum(boxes[:, 1] - boxes[:, 0], boxes[:, 3] - boxes[:, 2])
    h_lo, h_hi = _batch_abs(ders.h, boxes)
    ax_lo, ax_hi = _batch_abs(ders.hx, boxes)
    ay_lo, ay_hi = _batch_abs(ders.hy, boxes)

    accept = side * np.hypot(ax_hi, ay_hi) < h_lo / 4
    reject = side * np.hypot(ax_lo, ay_lo) >= h_hi / 4
    stops = accept.copy()
    for i in np.flatnonzero(~accept & ~reject):
        r = squares[i].rect
        stops[i] = side[i] * _gradient_sup(ders, r, tol) < _sup_abs(ders.h, r, tol) / 4
    return stops


def _decide_level(pool, workers: int, ders: _Derivatives, level: List[DyadicRect], tol: float) -> List[bool]:
    size = -(-len(level) // workers)
    chunks = [level[i:i + size] for i in range(0, len(level), size)]
    return [bool(v) for part in pool.map(lambda c: _decide(ders, c, tol), chunks) for v in part]


def stopping_time_decompose(
    h: BivarPoly,
    squares: Sequence[DyadicRect],
    max_depth: int = 24,
    tol: float = DEFAULT_TOLERANCE,
    max_squares: Optional[int] = None,
    threads: Optional[int] = None,
) -> List[DyadicRect]:
    """Quarter every square failing the stopping inequality.

    Squares still failing after max_depth generations (or once max_squares
    squares have been examined) are returned tagged depth-cap. Generations are
    decided one at a time, so the result does not depend on the thread count.
    """

    if h.is_zero:
        raise ValueError('stopping time needs a nonzero H')
    if max_depth < 0:
        raise ValueError('max_depth must be non-negative')
    level = [replace(sq, generation=0, stop_reason=None) for sq in squares]
    if not level:
        return []
    ders = _Derivatives(h)
    workers = thread_count(threads)
    result: List[DyadicRect] = []
    processed = 0

    with ThreadPoolExecutor(max_workers=workers) as pool:
        while level:
            if max_squares is not None and processed + len(level) > max_squares:
                warn('square budget of {} reached; tagging {} pending squares {}'.format(
                    max_squares, len(level), DEPTH_CAP))
                result.extend(sq.tagged(DEPTH_CAP) for sq in level)
                break
            processed += len(level)
            nxt = []
            for sq, ok in zip(level, _decide_level(pool, workers, ders, level, tol)):
                if ok:
                    result.append(sq.tagged(STOPPING_RULE))
                elif sq.generation >= max_depth:
                    result.append(sq.tagged(DEPTH_CAP))
                else:
                    nxt.extend(sq.quarters())
            debug('stopping time: {} squares decided, {} quartered children'.format(len(level), len(nxt)))
            level = nxt

    capped = sum(1 for sq in result if sq.stop_reason == DEPTH_CAP)
    info('stopping time: {} squares in F_inf, {} tagged {}'.format(
        len(result) - capped, capped, DEPTH_CAP))
    return result


def _backstop_ratios(ders: _Derivatives, side: float, pieces: Iterable[Rect], tol: float) -> List[float]:
    values = []
    for r in pieces:
        sup_h = _sup_abs(ders.h, r, tol)
        if sup_h > 0:
            values.append(side * _gradient_sup(ders, r, tol) / sup_h)
    return values


def bernstein_delta0(f_inf: Iterable[DyadicRect], h: BivarPoly, tol: float = DEFAULT_TOLERANCE) -> float:
    """min over F_inf of l(R) sup|grad H| / sup|H|."""
    ders = _Derivatives(h)
    values = []
    for sq in f_inf:
        if sq.stop_reason == STOPPING_RULE:
            values.extend(_backstop_ratios(ders, float(sq.side), [sq.rect], tol))
    return min(values) if values else 0.0


def refined_delta0(f_inf: Iterable[DyadicRect], h: BivarPoly, tol: float = DEFAULT_TOLERANCE) -> float:
    """The backstop ratio one subdivision level down.

    Every stopped square keeps its side l(R), but the sups are taken on each of
    its four quarters separately. For linear H this equals bernstein_delta0.
    """
    ders = _Derivatives(h)
    values = []
    for sq in f_inf:
        if sq.stop_reason == STOPPING_RULE:
            values.extend(_backstop_ratios(ders, float(sq.side), [q.rect for q in sq.quarters()], tol))
    return min(values) if values else 0.0


def _interval_ok(
    ders: _Derivatives,
    star: SectorRegion,
    x: DyadicInterval,
    y: DyadicInterval,
    axis: str,
    delta: float,
    tol: float,
) -> bool:
    r = Rect(x.lo, x.hi, y.lo, y.hi)
    if not star.contains_rect(r):
        return False
    grown, partial = (x, ders.hx) if axis == 'x' else (y, ders.hy)
    return float(grown.length) * _sup_abs(partial, r, tol) <= delta * _sup_abs(ders.h, r, tol)


def _grow(ders, star, x, y, axis, delta, tol) -> Tuple[DyadicInterval, DyadicInterval]:
    while True:
        nx, ny = (x.parent(), y) if axis == 'x' else (x, y.parent())
        if not _interval_ok(ders, star, nx, ny, axis, delta, tol):
            return x, y
        x, y = nx, ny


def can_grow(g: ExpandedRect, h: BivarPoly, delta: float, region: SectorRegion,
             tol: float = DEFAULT_TOLERANCE) -> bool:
    """Whether one more dyadic level on an expanded side still satisfies its inequality inside U_j*."""
    ders = _Derivatives(h)
    star = region.star()
    for axis in (a for a in 'xy' if a in g.expanded):
        nx, ny = (g.I.parent(), g.J) if axis == 'x' else (g.I, g.J.parent())
        if _interval_ok(ders, star, nx, ny, axis, delta, tol):
            return True
    return False


def _bin(sup_h: float, x: DyadicInterval, y: DyadicInterval, region: SectorRegion, mu: Fraction):
    shift = math.floor(region.order * region.j)
    k = math.floor(math.log2(sup_h)) + 1 - shift if sup_h > 0 else 0
    m = exact_log2(x.length / mu) - region.j
    n = exact_log2(y.length / mu) - region.j
    return k, m, n


def expand_rectangles(
    f_inf: Sequence[DyadicRect],
    h: BivarPoly,
    delta: float,
    region: SectorRegion,
    mu,
    tol: float = DEFAULT_TOLERANCE,
) -> List[ExpandedRect]:
    """Grow each F_inf rectangle along the directions failing l(R) sup|dH| > (delta/2) sup|H|.

    Identical outputs are merged, so the result is the range G of the expansion map.
    """

    if delta < 0:
        raise ValueError('delta must be non-negative, not {!r}'.format(delta))
    mu = to_fraction(mu)
    ders = _Derivatives(h)
    star = region.star()
    seen = {}
    for sq in f_inf:
        if sq.stop_reason != STOPPING_RULE:
            continue
        r = sq.rect
        side = float(sq.side)
        sup_h = _sup_abs(h, r, tol)
        grow = ''
        if not side * _sup_abs(ders.hx, r, tol) > delta / 2 * sup_h:
            grow += 'x'
        if not side * _sup_abs(ders.hy, r, tol) > delta / 2 * sup_h:
            grow += 'y'

        x, y = sq.x_side, sq.y_side
        for axis in grow:
            x, y = _grow(ders, star, x, y, axis, delta, tol)
        if (x, y) in seen:
            continue
        final = Rect(x.lo, x.hi, y.lo, y.hi)
        sup_final = _sup_abs(h, final, tol)
        seen[(x, y)] = ExpandedRect(
            base=sq,
            expanded=grow or 'none',
            I=x,
            J=y,
            W=sup_final * (1 + 1e-12),
            bin=_bin(sup_final, x, y, region, mu),
            sup_h=sup_final,
        )
    info('expansion: {} rectangles in G from {} in F_inf'.format(len(seen), len(f_inf)))
    return list(seen.values())


def _float_boxes(rects: Sequence) -> np.ndarray:
    rows = []
    for r in rects:
        if isinstance(r, Rect):
            rows.append(r.as_floats())
        else:
            rows.append(tuple(float(v) for v in r.box()))
    return np.array(rows, dtype=float).reshape(-1, 4)


def _dilate_boxes(boxes: np.ndarray, eps: float) -> np.ndarray:
    cx = (boxes[:, 0] + boxes[:, 1]) / 2
    cy = (boxes[:, 2] + boxes[:, 3]) / 2
    hw = (boxes[:, 1] - boxes[:, 0]) * (1 + eps) / 2
    hh = (boxes[:, 3] - boxes[:, 2]) * (1 + eps) / 2
    return np.stack([cx - hw, cx + hw, cy - hh, cy + hh], axis=1)


def audit_comparability(
    g: Sequence[ExpandedRect], h: BivarPoly, eps: float, eps_cap: float = 0.5,
    tol: float = DEFAULT_TOLERANCE,
) -> ComparabilityReport:
    """Worst sup|H| / inf|H| over the (1 + eps)-dilates, and sup over a dilate against sup over R."""
    if not 0 < eps < eps_cap:
        raise ValueError('eps must lie in (0, {}), not {!r}'.format(eps_cap, eps))
    max_ratio, c2_ratio, violations = 1.0, 1.0, []
    for index, item in enumerate(g):
        r = item.rect
        dilate = r.dilate(1 + to_fraction(eps))
        try:
            lo, hi = range_on_rect(h, dilate, tol)
        except EnclosureBudgetError as e:
            lo, hi = e.enclosure
        if lo <= 0 <= hi:
            violations.append(index)
            continue
        inf_abs, sup_abs = min(abs(lo), abs(hi)), max(abs(lo), abs(hi))
        max_ratio = max(max_ratio, sup_abs / inf_abs)
        sup_r = sup_abs_bounds(h, r, tol)[0]
        if sup_r > 0:
            c2_ratio = max(c2_ratio, sup_abs / sup_r)
    if violations:
        warn('{} dilates have an enclosure of H containing 0'.format(len(violations)))
    return ComparabilityReport(max_ratio, c2_ratio, violations)


def _max_depth_1d(lo: np.ndarray, hi: np.ndarray) -> int:
    if not len(lo):
        return 0
    coords = np.concatenate([lo, hi])
    # open intervals: closings sort before openings at equal coordinates
    kinds = np.concatenate([np.ones(len(lo)), -np.ones(len(hi))])
    order = np.lexsort((kinds, coords))
    return int(np.max(np.cumsum(kinds[order])))


def audit_overlap(
    g: Sequence, eps: float = 0.0, samples: int = 10000, seed: int = 0
) -> int:
    """Largest number of (1 + eps)-dilates sharing an interior point.

    The exact sweep visits every cell of the grid spanned by the dilate edges;
    a Monte-Carlo pass over random points is kept as an independent check.
    """

    boxes = _dilate_boxes(_float_boxes(g), eps)
    if not len(boxes):
        return 0
    xs = np.unique(np.concatenate([boxes[:, 0], boxes[:, 1]]))
    exact = 0
    for cx in (xs[:-1] + xs[1:]) / 2:
        active = (boxes[:, 0] < cx) & (boxes[:, 1] > cx)
        if active.any():
            exact = max(exact, _max_depth_1d(boxes[active, 2], boxes[active, 3]))

    rng = np.random.default_rng(seed)
    pts_x = rng.uniform(boxes[:, 0].min(), boxes[:, 1].max(), samples)
    pts_y = rng.uniform(boxes[:, 2].min(), boxes[:, 3].max(), samples)
    sampled = 0
    for start in range(0, samples, 1024):
        px = pts_x[start:start + 1024, None]
        py = pts_y[start:start + 1024, None]
        inside = (px > boxes[None, :, 0]) & (px < boxes[None, :, 1]) & \
                 (py > boxes[None, :, 2]) & (py < boxes[None, :, 3])
        if inside.size:
            sampled = max(sampled, int(inside.sum(axis=1).max()))
    if sampled > exact:
        warn('Monte-Carlo overlap {} exceeds the exact sweep {}'.format(sampled, exact))
    return max(exact, sampled)


def audit_eccentricity(g: Sequence) -> EccentricityReport:
    """Smallest sigma >= 1 with |I|^sigma <= C |J| and |J|^sigma <= C |I|, C = 1.

    Also reports the exponent needed with C = 16 and the least-squares slope of
    log|J| against log|I|.
    """

    boxes = _float_boxes(g)
    if len(boxes) < 2:
        raise ValueError('eccentricity needs at least two rectangles')
    widths = boxes[:, 1] - boxes[:, 0]
    heights = boxes[:, 3] - boxes[:, 2]
    small, large = np.minimum(widths, heights), np.maximum(widths, heights)
    measured = large < 1
    skipped = int(np.count_nonzero(~measured))
    if skipped:
        warn('{} rectangles have a side of length >= 1 and are left out of sigma'.format(skipped))
    if measured.any():
        small, large = small[measured], large[measured]
        sigma = max(1.0, float(np.max(np.log2(small) / np.log2(large))))
        sigma_c16 = max(1.0, float(np.max((np.log2(small) + 4) / np.log2(large))))
    else:
        sigma = sigma_c16 = 1.0
    if np.ptp(np.log2(widths)) > 0:
        slope = loglog_slope(widths, heights)
    else:
        slope = float('inf') if np.ptp(np.log2(heights)) > 0 else 1.0
    return EccentricityReport(sigma, 1.0, sigma_c16, slope, skipped)


def _count_on_lines(lines: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> int:
    if not len(lines) or not len(lo):
        return 0
    lo_sorted, hi_sorted = np.sort(lo), np.sort(hi)
    # closed intervals meeting the line: lo <= t and hi >= t
    counts = np.searchsorted(lo_sorted, lines, side='right') - np.searchsorted(hi_sorted, lines, side='left')
    return int(counts.max())


def audit_line_orthogonality(g: Sequence[ExpandedRect], eps: float = 0.0) -> LineReport:
    """Within each bin, the most dilates met by one horizontal or vertical line through a rectangle edge."""
    boxes = _dilate_boxes(_float_boxes(g), eps)
    x_lines = np.unique(np.concatenate([boxes[:, 0], boxes[:, 1]])) if len(boxes) else np.array([])
    y_lines = np.unique(np.concatenate([boxes[:, 2], boxes[:, 3]])) if len(boxes) else np.array([])
    groups: Dict[Tuple[int, int, int], List[int]] = {}
    for i, item in enumerate(g):
        groups.setdefault(tuple(item.bin), []).append(i)
    per_bin = {}
    for key, members in groups.items():
        b = boxes[members]
        per_bin[key] = max(
            _count_on_lines(x_lines, b[:, 0], b[:, 1]),
            _count_on_lines(y_lines, b[:, 2], b[:, 3]),
        )
    return LineReport(max(per_bin.values(), default=0), per_bin)


def audit_bin_window(
    g: Sequence[ExpandedRect], j: int, d_i, r: int, cap: int = 64
) -> BinWindowReport:
    """Fit c1 + k < m, n < c2 + k / r over all rectangles and check |c1|, |c2| <= cap.

    k is recomputed from the recorded sup|H| with the scale j and edge order d_i.
    """

    if r < 1:
        raise ValueError('root multiplicity must be positive, not {!r}'.format(r))
    if not g:
        return BinWindowReport(True, 0, 0)
    shift = math.floor(to_fraction(d_i) * j)
    lows, highs = [], []
    for item in g:
        k = math.floor(math.log2(item.sup_h)) + 1 - shift if item.sup_h > 0 else item.bin[0]
        _, m, n = item.bin
        for v in (m, n):
            lows.append(v - k)
            highs.append(v - Fraction(k, r))
    c1 = min(lows) - 1
    c2 = math.floor(max(highs)) + 1
    return BinWindowReport(abs(c1) <= cap and abs(c2) <= cap, c1, c2)


def audit_coverage(
    h: BivarPoly,
    region: SectorRegion,
    rects: Sequence[DyadicRect],
    samples: int = 20000,
    seed: int = 0,
    floor: float = 1e-9,
) -> CoverageReport:
    """Fractions of sampled points of U_j with |H| above the floor lying in F_inf and in depth-cap squares."""
    base = region.base()
    xa, xb, ya, yb = base.bounding_box()
    rng = np.random.default_rng(seed)
    xs = rng.uniform(xa, xb, 4 * samples)
    ys = rng.uniform(ya, yb, 4 * samples)
    keep = base.contains_points(xs, ys)
    xs, ys = xs[keep][:samples], ys[keep][:samples]
    values = np.abs(h.evaluate(xs, ys))
    if not len(values):
        return CoverageReport(1.0, 0.0, 0)
    alive = values > floor * values.max()
    xs, ys = xs[alive], ys[alive]
    if not len(xs):
        return CoverageReport(1.0, 0.0, 0)

    by_level: Dict[Tuple[int, int], Dict[Tuple[int, int], str]] = {}
    for sq in rects:
        level = by_level.setdefault((sq.x_side.s, sq.y_side.s), {})
        level[(sq.x_side.k, sq.y_side.k)] = sq.stop_reason

    found: List[Optional[str]] = [None] * len(xs)
    for (sx, sy), cells in by_level.items():
        kx = np.floor(np.ldexp(xs, -sx)).astype(np.int64)
        ky = np.floor(np.ldexp(ys, -sy)).astype(np.int64)
        for i, (a, b) in enumerate(zip(kx.tolist(), ky.tolist())):
            if found[i] is None:
                found[i] = cells.get((a, b))
    total = len(xs)
    stopped = sum(1 for v in found if v == STOPPING_RULE)
    capped = sum(1 for v in found if v == DEPTH_CAP)
    return CoverageReport((stopped + capped) / total, capped / total, total)


def projection_overlap(rects: Sequence) -> int:
    """Largest number of members whose x- (or y-) projections meet one member's projection."""
    boxes = _float_boxes(rects)
    if not len(boxes):
        return 0
    best = 0
    for lo_col, hi_col in ((0, 1), (2, 3)):
        lo, hi = boxes[:, lo_col], boxes[:, hi_col]
        lo_sorted, hi_sorted = np.sort(lo), np.sort(hi)
        # open projections meeting [lo_i, hi_i]: lo_other < hi_i and hi_other > lo_i
        counts = np.searchsorted(lo_sorted, hi, side='left') - np.searchsorted(hi_sorted, lo, side='right')
        best = max(best, int(counts.max()))
    return best
