"""
Discrete trilinear forms of convolution type.

A :class:`TrilinearGrid` samples the phase S and the cutoff on a uniform
midpoint grid whose x, y and x + y lattices share one spacing h, so that

    Lambda(f1, f2, f3) = h^2 sum_{a, b} e^{i lam S(x_a, y_b)} phi(x_a, y_b) f1[a] f2[b] f3[a + b]

is an exact relabelling of the continuum form. Vectors carry the discrete norm
||f|| = (h sum |f|^2)^(1/2).
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.signal import fftconvolve

from .newton import DegeneratePhaseError, newton_polyhedron, order_at_origin, predicted_decay, DEGENERATE
from .poly import BivarPoly, Rect, convolution_hessian, differentiate, sheared_hessian, sup_abs_bounds, range_on_rect
from .poly import EnclosureBudgetError
from .utils import *

__all__ = [
    'CutoffSpec',
    'TrilinearGrid',
    'NormEstimate',
    'NormSweep',
    'ProfileRow',
    'DyadicProfile',
    'GridError',
    'SamplingRuleError',
    'HypothesisError',
    'SAMPLES_PER_PERIOD',
    'MIN_BOX_CELLS',
    'smoothstep',
    'assemble_grid',
    'minimal_grid_size',
    'trilinear_apply',
    'fft_apply',
    'maximize_trilinear',
    'operator_norm',
    'extremizer_ratio',
    'decay_sweep',
    'dyadic_profile',
    'shear_transform',
    'unshear_transform',
    'shear_orders',
    'hessian_bounds_on_region',
    'vdc_bilinear_norm',
    'vdc_operator_norm',
    'oscillatory_operator_norm',
    'discrete_norm',
]

SAMPLES_PER_PERIOD = 16
MIN_GRID = 32
MIN_BOX_CELLS = 4


class GridError(OscintError):
    pass


class SamplingRuleError(OscintError):
    def __init__(self, msg, minimal_n):
        super().__init__(msg)
        self.minimal_n = minimal_n


class HypothesisError(OscintError):
    def __init__(self, msg, rect=None):
        super().__init__(msg)
        self.rect = rect


def smoothstep(t):
    """Quintic smoothstep, C2 with s(0) = 0 and s(1) = 1.

    >>> float(smoothstep(0.5))
    0.5
    """

    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    return t ** 3 * (10.0 - 15.0 * t + 6.0 * t ** 2)


def _indicator_profile(xs: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return ((xs >= lo) & (xs < hi)).astype(float)


def _bump_profile(xs: np.ndarray, lo: float, hi: float) -> np.ndarray:
    # 1 on the first half of [lo, hi], then a C2 ramp down to 0 at hi
    half = (hi - lo) / 2
    ramp = 1.0 - smoothstep((xs - lo - half) / half)
    return np.where((xs >= lo) & (xs <= hi), ramp, 0.0)


@dataclass(frozen=True, eq=False)
class CutoffSpec:
    """Cutoff phi: an indicator of a rectangle, a smooth corner bump, or a custom table.

    ``margin`` insets the far edges of the indicator; ``support`` defaults to the
    grid domain.
    """

    kind: str = 'indicator'
    margin: float = 0.0
    support: Optional[Rect] = None
    table: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in ('indicator', 'bump', 'table'):
            raise GridError('unknown cutoff kind {!r}'.format(self.kind))
        if self.kind == 'table' and self.table is None:
            raise GridError('a table cutoff needs its table')
        if self.margin < 0:
            raise GridError('cutoff margin must be non-negative')

    def factors(self, xs: np.ndarray, ys: np.ndarray, domain: Rect) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        if self.kind == 'table':
            return None
        x_lo, x_hi, y_lo, y_hi = (self.support or domain).as_floats()
        if self.kind == 'indicator':
            # the near edges stay closed so that phi(x_lo, y_lo) != 0
            u = _indicator_profile(xs, x_lo, x_hi - self.margin)
            v = _indicator_profile(ys, y_lo, y_hi - self.margin)
            return u, v
        return _bump_profile(xs, x_lo, x_hi), _bump_profile(ys, y_lo, y_hi)

    def at(self, x: float, y: float, domain: Rect) -> float:
        """Value of the continuum cutoff at a point."""
        if self.kind == 'table':
            raise GridError('a table cutoff has no point values')
        u, v = self.factors(np.array([float(x)]), np.array([float(y)]), domain)
        return float(u[0] * v[0])


@dataclass(frozen=True, eq=False)
class TrilinearGrid:
    S: BivarPoly
    domain: Rect
    nx: int
    ny: int
    h: float
    xs: np.ndarray = field(repr=False)
    ys: np.ndarray = field(repr=False)
    phase: np.ndarray = field(repr=False)
    cutoff: np.ndarray = field(repr=False)
    factors: Optional[Tuple[np.ndarray, np.ndarray]] = field(repr=False)
    grad_bound: float
    diameter: float
    spec: CutoffSpec = field(default_factory=CutoffSpec)

    @property
    def n(self) -> int:
        return self.nx

    @property
    def weight(self) -> float:
        """Cell area."""
        return self.h * self.h

    @property
    def sums(self) -> np.ndarray:
        """x + y lattice, the points f3 is sampled at."""
        return float(self.domain.x_lo + self.domain.y_lo) + self.h * (np.arange(self.nx + self.ny - 1) + 1.0)

    @cachedproperty
    def index(self) -> np.ndarray:
        """a + b for every cell."""
        return np.add.outer(np.arange(self.nx), np.arange(self.ny))

    def kernel(self, lam: float) -> np.ndarray:
        if lam == 0:
            return self.cutoff.astype(complex)
        return self.cutoff * np.exp(1j * lam * self.phase)

    def integral(self) -> float:
        """Midpoint rule for the integral of phi."""
        return float(self.weight * self.cutoff.sum())


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


def assemble_grid(
    s: BivarPoly,
    cutoff: CutoffSpec,
    domain: Rect,
    n: int,
    restrict: bool = False,
    min_n: int = MIN_GRID,
) -> TrilinearGrid:
    """Sample S and phi at the cell centres of an n-cell-wide grid on domain.

    The last grid layer in x and in y is zeroed so phi has compact support
    inside the domain. With ``restrict`` a cutoff whose support exceeds the
    domain is simply cut off there instead of being rejected.
    """

    if n < min_n:
        raise GridError('grid needs n >= {}, got {}'.format(min_n, n))
    h_exact = domain.width / n
    ny_exact = domain.height / h_exact
    if ny_exact.denominator != 1:
        raise GridError(
            'domain height {} is not a whole number of cells of width {}'.format(domain.height, h_exact)
        )
    ny = int(ny_exact)
    support = cutoff.support or domain
    if not restrict and not domain.contains(support):
        raise GridError('cutoff support {} exceeds the domain {}'.format(support.as_floats(), domain.as_floats()))

    h = float(h_exact)
    xs = float(domain.x_lo) + h * (np.arange(n) + 0.5)
    ys = float(domain.y_lo) + h * (np.arange(ny) + 0.5)

    factors = cutoff.factors(xs, ys, domain)
    if factors is None:
        table = np.asarray(cutoff.table, dtype=float)
        if table.shape != (n, ny):
            raise GridError('cutoff table has shape {}, expected {}'.format(table.shape, (n, ny)))
        phi = table.copy()
        phi[-1, :] = 0.0
        phi[:, -1] = 0.0
    else:
        u, v = factors[0].copy(), factors[1].copy()
        u[-1] = 0.0
        v[-1] = 0.0
        factors = (_freeze(u), _freeze(v))
        phi = np.outer(u, v)

    region = support if domain.contains(support) else domain
    gx = sup_abs_bounds(differentiate(s, 'x'), region)[1] if s.depends_on('x') else 0.0
    gy = sup_abs_bounds(differentiate(s, 'y'), region)[1] if s.depends_on('y') else 0.0

    return TrilinearGrid(
        S=s,
        domain=domain,
        nx=n,
        ny=ny,
        h=h,
        xs=_freeze(xs),
        ys=_freeze(ys),
        phase=_freeze(s.evaluate_grid(xs, ys)),
        cutoff=_freeze(phi),
        factors=factors,
        grad_bound=math.hypot(gx, gy),
        diameter=math.hypot(float(domain.width), float(domain.height)),
        spec=cutoff,
    )


def minimal_grid_size(g: TrilinearGrid, lam: float) -> int:
    """Smallest n with n >= 16 (1 + lam sup|grad S| diam / 2 pi)."""
    return math.ceil(SAMPLES_PER_PERIOD * (1 + abs(lam) * g.grad_bound * g.diameter / (2 * math.pi)))


def _check_sampling(g: TrilinearGrid, lam: float) -> None:
    needed = minimal_grid_size(g, lam)
    if min(g.nx, g.ny) < needed:
        raise SamplingRuleError(
            'lambda = {} needs at least {} points per axis, the grid has {}'.format(lam, needed, min(g.nx, g.ny)),
            needed,
        )


def _as_vectors(g: TrilinearGrid, f1, f2, f3):
    f1 = np.asarray(f1, dtype=complex)
    f2 = np.asarray(f2, dtype=complex)
    f3 = np.asarray(f3, dtype=complex)
    expected = (g.nx, g.ny, g.nx + g.ny - 1)
    if (len(f1), len(f2), len(f3)) != expected:
        raise GridError('vector lengths {} do not match the grid {}'.format((len(f1), len(f2), len(f3)), expected))
    return f1, f2, f3


def discrete_norm(f, h: float) -> float:
    return float(np.sqrt(h * np.sum(np.abs(f) ** 2)))


def trilinear_apply(g: TrilinearGrid, f1, f2, f3, lam: float) -> complex:
    _check_sampling(g, lam)
    f1, f2, f3 = _as_vectors(g, f1, f2, f3)
    return complex(np.sum(_contract3(g, g.kernel(lam), f1, f2) * f3))


def fft_apply(g: TrilinearGrid, f1, f2, f3) -> complex:
    """The lam = 0 form through one fast convolution (separable cutoffs only)."""
    if g.factors is None:
        raise GridError('fast evaluation needs a separable cutoff')
    f1, f2, f3 = _as_vectors(g, f1, f2, f3)
    u, v = g.factors
    return complex(g.weight * np.sum(fftconvolve(u * f1, v * f2) * f3))


def _bincount_complex(index: np.ndarray, values: np.ndarray, length: int) -> np.ndarray:
    flat = index.ravel()
    return (np.bincount(flat, weights=values.real.ravel(), minlength=length)
            + 1j * np.bincount(flat, weights=values.imag.ravel(), minlength=length))


def _contract1(g, kernel, f2, f3):
    return g.weight * ((kernel * f3[g.index]) @ f2)


def _contract2(g, kernel, f1, f3):
    return g.weight * (f1 @ (kernel * f3[g.index]))


def _contract3(g, kernel, f1, f2):
    return g.weight * _bincount_complex(g.index, kernel * np.outer(f1, f2), g.nx + g.ny - 1)


def _fast_contractions(g: TrilinearGrid) -> Tuple[Callable, Callable, Callable]:
    u, v = g.factors
    w = g.weight

    def c1(_, f2, f3):
        return w * u * fftconvolve(f3, (v * f2)[::-1], mode='valid')

    def c2(_, f1, f3):
        return w * v * fftconvolve(f3, (u * f1)[::-1], mode='valid')

    def c3(_, f1, f2):
        return w * fftconvolve(u * f1, v * f2)

    return c1, c2, c3


def _dense_contractions(g: TrilinearGrid) -> Tuple[Callable, Callable, Callable]:
    return (
        lambda k, f2, f3: _contract1(g, k, f2, f3),
        lambda k, f1, f3: _contract2(g, k, f1, f3),
        lambda k, f1, f2: _contract3(g, k, f1, f2),
    )


class NormEstimate(NamedTuple):
    value: float
    # objective after every sweep, one list per restart
    histories: List[List[float]]
    vectors: Tuple[np.ndarray, np.ndarray, np.ndarray]


def _unit(rng: np.random.Generator, length: int, h: float) -> np.ndarray:
    f = rng.standard_normal(length) + 1j * rng.standard_normal(length)
    return f / discrete_norm(f, h)


def _best_response(contraction: np.ndarray, h: float) -> Tuple[np.ndarray, float]:
    # maximiser of |sum c f| over ||f|| = 1 and the maximum
    size = float(np.linalg.norm(contraction))
    if size == 0:
        return np.zeros_like(contraction), 0.0
    return np.conj(contraction) / (math.sqrt(h) * size), size / math.sqrt(h)


def _run_restart(g, kernel, contractions, seed_seq, iters, tol):
    rng = np.random.default_rng(seed_seq)
    c1, c2, c3 = contractions
    f1, f2, f3 = _unit(rng, g.nx, g.h), _unit(rng, g.ny, g.h), _unit(rng, g.nx + g.ny - 1, g.h)
    history: List[float] = []
    for _ in range(iters):
        f1, _ = _best_response(c1(kernel, f2, f3), g.h)
        f2, _ = _best_response(c2(kernel, f1, f3), g.h)
        f3, value = _best_response(c3(kernel, f1, f2), g.h)
        history.append(value)
        if value == 0 or (len(history) > 1 and value - history[-2] <= tol * value):
            break
    return history, (f1, f2, f3)


def maximize_trilinear(
    g: TrilinearGrid,
    lam: float,
    restarts: int = 8,
    iters: int = 200,
    seed: int = 0,
    tol: float = 1e-8,
    threads: Optional[int] = None,
) -> NormEstimate:
    """Alternating maximisation of |Lambda| over unit vectors, best of several complex Gaussian restarts.

    Every sweep replaces one argument by the normalised conjugate contraction of
    the other two, so each history is non-decreasing.
    """

    if restarts < 4:
        raise ValueError('at least 4 restarts are required, got {}'.format(restarts))
    _check_sampling(g, lam)
    kernel = g.kernel(lam)
    if lam == 0 and g.factors is not None:
        contractions = _fast_contractions(g)
    else:
        contractions = _dense_contractions(g)

    seeds = np.random.SeedSequence(seed).spawn(restarts)
    workers = min(thread_count(threads), restarts)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        runs = list(pool.map(lambda s: _run_restart(g, kernel, contractions, s, iters, tol), seeds))

    best = max(range(restarts), key=lambda i: runs[i][0][-1])
    histories = [run[0] for run in runs]
    debug('lambda = {}: best restart {} reached {}'.format(lam, best, histories[best][-1]))
    return NormEstimate(histories[best][-1], histories, runs[best][1])


def operator_norm(g: TrilinearGrid, lam: float, restarts: int = 8, iters: int = 200, seed: int = 0,
                  threads: Optional[int] = None) -> float:
    """Certified lower bound on the discrete operator norm of Lambda at lam."""
    return maximize_trilinear(g, lam, restarts, iters, seed, threads=threads).value


def _origin_box(g: TrilinearGrid, width: float):
    cells = int(math.floor(width / g.h))
    if cells < MIN_BOX_CELLS:
        raise GridError(
            'extremizer box of width {:.3g} spans {} cells; increase n to at least {}'.format(
                width, cells, math.ceil(MIN_BOX_CELLS * g.nx * g.h / width))
        )
    if cells >= min(g.nx, g.ny):
        raise GridError('extremizer box of width {:.3g} does not fit the domain'.format(width))
    f1 = np.zeros(g.nx)
    f2 = np.zeros(g.ny)
    f3 = np.zeros(g.nx + g.ny - 1)
    f1[:cells] = 1.0
    f2[:cells] = 1.0
    f3[: 2 * cells - 1] = 1.0
    return f1, f2, f3


def extremizer_ratio(g: TrilinearGrid, d: int, lam: float, c0: float = 0.25) -> float:
    """|Lambda| / (||f1|| ||f2|| ||f3||) for indicators of [0, w], [0, w] and [0, 2w], w = c0 lam^(-1/(3+d))."""
    if g.domain.x_lo != 0 or g.domain.y_lo != 0:
        raise GridError('extremizer boxes sit at the origin; the domain must start at (0, 0)')
    if g.spec.kind != 'table' and g.spec.at(0, 0, g.domain) == 0:
        raise GridError('the cutoff vanishes at the origin')
    if convolution_hessian(g.S).is_zero:
        raise DegeneratePhaseError('degenerate phase: there is no decay to test')
    if lam <= 0 or c0 <= 0:
        raise ValueError('lam and c0 must be positive')
    width = c0 * lam ** (-1.0 / (3 + d))
    f1, f2, f3 = _origin_box(g, width)
    value = abs(trilinear_apply(g, f1, f2, f3, lam))
    return value / (discrete_norm(f1, g.h) * discrete_norm(f2, g.h) * discrete_norm(f3, g.h))


@dataclass
class NormSweep:
    lambdas: List[float]
    norms: List[float]
    extremizer_ratios: List[float]
    fitted_slope: float
    extremizer_slope: float
    theory_slope: Fraction


def _check_lambdas(lambdas: Sequence[float]) -> None:
    if len(lambdas) < 5:
        raise ValueError('a decay sweep needs at least 5 lambdas, got {}'.format(len(lambdas)))
    values = np.asarray(lambdas, dtype=float)
    if np.any(values <= 0) or np.any(np.diff(values) <= 0):
        raise ValueError('lambdas must be positive and strictly increasing')
    ratios = values[1:] / values[:-1]
    if np.ptp(np.log(ratios)) > 1e-9:
        raise ValueError('lambdas must be geometrically spaced')


def decay_sweep(
    s: BivarPoly,
    cutoff: CutoffSpec,
    lambdas: Sequence[float],
    domain: Rect,
    n: int,
    restarts: int = 8,
    iters: int = 200,
    c0: float = 0.25,
    seed: int = 0,
    threads: Optional[int] = None,
) -> NormSweep:
    """Operator norms and extremizer ratios along a geometric lam range, with log-log slopes."""
    theory = predicted_decay(s)
    if theory == DEGENERATE:
        raise DegeneratePhaseError(
            'degenerate phase {}: S = p(x) + q(y) + r(x + y) has no decay'.format(s)
        )
    _check_lambdas(lambdas)
    d = order_at_origin(convolution_hessian(s))
    grid = assemble_grid(s, cutoff, domain, n)
    _check_sampling(grid, max(lambdas))

    norms, ratios = [], []
    for i, lam in enumerate(lambdas):
        norms.append(operator_norm(grid, lam, restarts, iters, seed=seed + i, threads=threads))
        ratios.append(extremizer_ratio(grid, d, lam, c0))
        info('lambda = {:g}: norm {:.6g}, extremizer ratio {:.6g}'.format(lam, norms[-1], ratios[-1]))

    return NormSweep(
        lambdas=[float(v) for v in lambdas],
        norms=norms,
        extremizer_ratios=ratios,
        fitted_slope=loglog_slope(lambdas, norms, drop_ends=True),
        extremizer_slope=loglog_slope(lambdas, ratios, drop_ends=True),
        theory_slope=-theory,
    )


class ProfileRow(NamedTuple):
    j: int
    k: int
    local_norm: float
    size_bound: float
    osc_bound: float
    flagged: bool


class DyadicProfile(NamedTuple):
    rows: List[ProfileRow]
    # almost-orthogonality constant of the boxes carrying mass
    L: int
    aggregate: float


def dyadic_profile(
    s: BivarPoly,
    lam: float,
    j_range: Sequence[int],
    k_range: Sequence[int],
    cutoff: Optional[CutoffSpec] = None,
    n_local: int = 32,
    restarts: int = 4,
    iters: int = 50,
    seed: int = 0,
    slack: float = 4.0,
    max_local: int = 4096,
) -> DyadicProfile:
    """Local operator norms on the boxes x ~ 2^j, y ~ 2^k against the size and oscillation envelopes."""
    from .resolution import projection_overlap

    h = convolution_hessian(s)
    if h.is_zero:
        raise DegeneratePhaseError('degenerate phase: no Newton data')
    nd = newton_polyhedron(h)
    vertices = [(a, b, abs(float(h.coefficient(a, b)))) for a, b in nd.vertices]
    cutoff = cutoff or CutoffSpec(support=Rect.unit())

    rows, boxes = [], []
    for j in j_range:
        for k in k_range:
            box = Rect(Fraction(2) ** j, Fraction(2) ** (j + 1), Fraction(2) ** k, Fraction(2) ** (k + 1))
            scale = min(box.width, box.height)
            n = int(box.width / scale) * n_local
            grid = assemble_grid(s, cutoff, box, n, restrict=True, min_n=1)
            needed = minimal_grid_size(grid, lam)
            if min(grid.nx, grid.ny) < needed:
                n = n * math.ceil(needed / min(grid.nx, grid.ny))
                if n > max_local:
                    raise SamplingRuleError(
                        'box (j={}, k={}) needs {} points per axis at lambda = {}'.format(j, k, n, lam), n)
                grid = assemble_grid(s, cutoff, box, n, restrict=True, min_n=1)
            local = operator_norm(grid, lam, restarts, iters, seed) if grid.cutoff.any() else 0.0
            size_bound = min(2.0 ** (j / 2), 2.0 ** (k / 2))
            dominant = max(c * 2.0 ** (j * a + k * b) for a, b, c in vertices)
            osc_bound = (lam * dominant) ** (-1 / 6) if lam > 0 else math.inf
            flagged = local > slack * min(size_bound, osc_bound)
            if flagged:
                warn('box (j={}, k={}) exceeds its envelope: {:.4g}'.format(j, k, local))
            rows.append(ProfileRow(j, k, local, size_bound, osc_bound, flagged))
            if local > 0:
                boxes.append(box)

    big = projection_overlap(boxes)
    return DyadicProfile(rows, big, big * max((r.local_norm for r in rows), default=0.0))


def shear_transform(s: BivarPoly) -> BivarPoly:
    """S~(u, v) = S(u, v - u), the change of variables u = x, v = x + y.

    >>> str(shear_transform(BivarPoly({(1, 1): 1})))
    '-x^2 + x*y'
    """

    return s.compose(BivarPoly.x(), BivarPoly.y() - BivarPoly.x())


def unshear_transform(s: BivarPoly) -> BivarPoly:
    """Inverse of :func:`shear_transform`."""
    return s.compose(BivarPoly.x(), BivarPoly.y() + BivarPoly.x())


def shear_orders(s: BivarPoly) -> Tuple[int, int]:
    """Order at the origin of H and of the Hessian of the sheared phase.

    After u = x, v = x + y the three projections become u, v and v - u, so the
    sheared phase is differentiated with the matching annihilator.
    """

    h = convolution_hessian(s)
    return order_at_origin(h), order_at_origin(sheared_hessian(shear_transform(s)))


def hessian_bounds_on_region(p: BivarPoly, omega, pieces: int = 16, refinements: int = 6) -> Tuple[float, float]:
    """(inf |p|, sup |p|) over a region from enclosures on a rectangle cover.

    The cover is refined while some enclosure straddles 0; a sign change that
    survives the refinements raises :class:`HypothesisError`.
    """

    for level in range(refinements + 1):
        cover = omega.rect_cover(pieces * 2 ** level)
        lows, highs, straddle = [], [], None
        for r in cover:
            try:
                lo, hi = range_on_rect(p, r)
            except EnclosureBudgetError as e:
                lo, hi = e.enclosure
            if lo <= 0 <= hi:
                straddle = r
                break
            lows.append(min(abs(lo), abs(hi)))
            highs.append(max(abs(lo), abs(hi)))
        if straddle is None:
            return min(lows), max(highs)
    raise HypothesisError('the Hessian changes sign (or vanishes) near {}'.format(straddle.as_floats()), straddle)


def _region_grid(s: BivarPoly, omega, n: int, cutoff: Optional[CutoffSpec]) -> TrilinearGrid:
    domain = Rect.unit()
    base = assemble_grid(s, cutoff or CutoffSpec(), domain, n)
    mask = omega.contains(*np.meshgrid(base.xs, base.ys, indexing='ij'))
    table = base.cutoff * mask
    return assemble_grid(s, CutoffSpec(kind='table', table=table), domain, n)


def _check_vdc_hypothesis(s: BivarPoly, omega, mu: float) -> float:
    inf_h, sup_h = hessian_bounds_on_region(convolution_hessian(s), omega)
    if inf_h < mu * (1 - 1e-9):
        raise HypothesisError('|H| drops to {:.4g} below mu = {:.4g} on the region'.format(inf_h, mu))
    return sup_h / mu


def vdc_bilinear_norm(
    s: BivarPoly, g, h, lam: float, omega, mu: float, n: int = 256,
    cutoff: Optional[CutoffSpec] = None,
) -> float:
    """||T(g, h)|| for T(g, h)(x) = sum_b e^{i lam S} g[b] h[a + b] phi chi_Omega h_step.

    Compare with the envelope |lam mu|^(-1/6) ||g|| ||h||.
    """

    _check_vdc_hypothesis(s, omega, mu)
    grid = _region_grid(s, omega, n, cutoff)
    _check_sampling(grid, lam)
    g = np.asarray(g, dtype=complex)
    h = np.asarray(h, dtype=complex)
    if len(g) != grid.ny or len(h) != grid.nx + grid.ny - 1:
        raise GridError('vector lengths do not match the grid')
    t = grid.h * ((grid.kernel(lam) * h[grid.index]) @ g)
    return discrete_norm(t, grid.h)


def vdc_operator_norm(
    s: BivarPoly, lam: float, omega, mu: float, n: int = 256, restarts: int = 8, iters: int = 200,
    seed: int = 0, cutoff: Optional[CutoffSpec] = None,
) -> float:
    """Operator norm of (g, h) -> T(g, h), the trilinear norm with kernel phi chi_Omega."""
    _check_vdc_hypothesis(s, omega, mu)
    grid = _region_grid(s, omega, n, cutoff)
    return operator_norm(grid, lam, restarts, iters, seed)


def oscillatory_operator_norm(
    s: BivarPoly, lam: float, omega, mu: float, n: int = 256, cutoff: Optional[CutoffSpec] = None
) -> float:
    """Norm of f -> sum_b e^{i lam S(x_a, y_b)} chi_Omega f[b] h when mu <= |S_xy| on Omega.

    Compare with the envelope |lam mu|^(-1/2).
    """

    mixed = differentiate(differentiate(s, 'x'), 'y')
    inf_m, _ = hessian_bounds_on_region(mixed, omega)
    if inf_m < mu * (1 - 1e-9):
        raise HypothesisError('|S_xy| drops to {:.4g} below mu = {:.4g} on the region'.format(inf_m, mu))
    grid = _region_grid(s, omega, n, cutoff)
    _check_sampling(grid, lam)
    return grid.h * float(np.linalg.norm(grid.kernel(lam), 2))
