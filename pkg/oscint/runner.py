"""
Experiment orchestration: one function per subcommand, each turning an
:class:`~oscint.config.ExperimentConfig` into a :class:`~oscint.report.RunReport`.
"""

from typing import Any, Callable, Dict, List

import numpy as np

from .algebraic import AlgebraicDomain, critical_sets, decompose_domain, sampled_area, union_area
from .config import ExperimentConfig
from .newton import (
    DEGENERATE,
    newton_polyhedron,
    order_at_origin,
    predicted_decay,
    vertex_order_bound,
)
from .poly import BivarPoly, Rect, convolution_hessian, parse_poly
from .report import Check, RunReport, json_ready, overall_verdict
from .resolution import (
    audit_bin_window,
    audit_comparability,
    audit_coverage,
    audit_eccentricity,
    audit_line_orthogonality,
    audit_overlap,
    bernstein_delta0,
    expand_rectangles,
    initial_cover,
    projection_overlap,
    refined_delta0,
    sector_for_root,
    stopping_time_decompose,
)
from .sublevel import shell_sweep, sublevel_sweep, uniform_decay_envelope
from .trilinear import (
    SAMPLES_PER_PERIOD,
    CutoffSpec,
    assemble_grid,
    decay_sweep,
    dyadic_profile,
    minimal_grid_size,
    shear_orders,
)
from .utils import *

__all__ = ['run', 'RUNNERS']

SLOPE_WINDOW = 0.03
# upper-bound direction for operator norms when d >= 1
NORM_SLOPE_SLACK = 0.04
COVERAGE_FLOOR = 0.999
OVERLAP_CAP = 16
COMPARABILITY_CAP = 8.0
DELTA_DRIFT = 0.2
AREA_TOLERANCE = 2e-3
AREA_SAMPLES = 1000000
SHELL_SPREAD = 4.0
EXPONENT_WINDOW = (0.05, 0.08)
# fraction of its neighbour a norm may exceed it by before the sweep counts as increasing
NORM_WIGGLE = 1.05


def _phase(config: ExperimentConfig) -> BivarPoly:
    return parse_poly(config.phase)


def _hessian(config: ExperimentConfig) -> BivarPoly:
    if config.get('hessian'):
        return parse_poly(config.hessian)
    return convolution_hessian(_phase(config))


def _window(config: ExperimentConfig) -> Rect:
    return Rect(*config.window)


def _domain(config: ExperimentConfig) -> AlgebraicDomain:
    return AlgebraicDomain.from_text(config.domain)


def run_analyze(config: ExperimentConfig, report: Dict[str, Any]) -> None:
    s = _phase(config)
    h = convolution_hessian(s)
    result = {'phase': str(s), 'H': str(h), 'degenerate': h.is_zero}
    if h.is_zero:
        result['exponent'] = DEGENERATE
        report['results'].append(result)
        return

    nd = newton_polyhedron(h)
    result.update(nd.to_dict())
    before, after = shear_orders(s)
    result['shear_orders'] = [before, after]
    report['results'].append(result)
    report['constants'].update(d=nd.d, exponent=predicted_decay(s))
    report['checks'].append(Check.boolean(
        'vertex-order-bound', vertex_order_bound(nd), 'd >= min(A + M B, A / M + B) on every edge'))
    report['checks'].append(Check.boolean(
        'shear-invariance', before == after, 'order {} before the shear, {} after'.format(before, after)))


def _rect_rows(g) -> List[Dict[str, Any]]:
    rows = []
    for item in g:
        x_lo, x_hi, y_lo, y_hi = item.box()
        k, m, n = item.bin
        rows.append(dict(x_lo=x_lo, x_hi=x_hi, y_lo=y_lo, y_hi=y_hi, W=item.W, k=k, m=m, n=n))
    return rows


def _root_multiplicity(h: BivarPoly, edge: int, c: float) -> int:
    nd = newton_polyhedron(h)
    roots = nd.edges[edge if edge >= 0 else len(nd.edges) + edge].active_roots
    return min(roots, key=lambda r: abs(r.value - c)).multiplicity


def run_resolve(config: ExperimentConfig, report: Dict[str, Any]) -> None:
    h = _hessian(config)
    rows = []
    for j in config.scales:
        hj, region = sector_for_root(h, config.edge, config.root, j, config.get('eps'))
        cover = initial_cover(region, config.mu)
        f_inf = stopping_time_decompose(
            hj, cover.squares, config.max_depth, config.tol, config.get('max_squares'), config.get('threads'))
        delta = bernstein_delta0(f_inf, hj, config.tol)
        chosen = config.get('delta') or delta / 4
        g = expand_rectangles(f_inf, hj, chosen, region, cover.mu, config.tol)
        delta_finer = refined_delta0(f_inf, hj, config.tol)

        coverage = audit_coverage(hj, region, f_inf, config.samples, config.seed)
        overlap = audit_overlap(g, config.audit_eps, config.samples, config.seed)
        comparability = audit_comparability(g, hj, config.audit_eps, tol=config.tol)
        eccentricity = audit_eccentricity(g) if len(g) >= 2 else None
        lines = audit_line_orthogonality(g, config.audit_eps)
        r = _root_multiplicity(hj, config.edge, region.c)
        window = audit_bin_window(g, j, region.order, r) if g else None
        L = projection_overlap(g)

        tag = 'j={}'.format(j)
        report['results'].append({
            'j': j,
            'H': str(hj),
            'sector': {'M': region.M, 'c': region.c, 'eps': region.eps, 'order': region.order},
            'mu': cover.mu,
            'side_exponent': cover.side_exponent,
            'f_infinity': [list(sq.box()) + [sq.stop_reason] for sq in f_inf],
            'g': _rect_rows(g),
            'audits': {
                'coverage': coverage._asdict(),
                'overlap': overlap,
                'comparability': {
                    'max_ratio': comparability.max_ratio,
                    'c2_ratio': comparability.c2_ratio,
                    'violations': comparability.violations,
                },
                'sigma': eccentricity._asdict() if eccentricity else None,
                'line_orthogonality': lines.max_per_line,
                'bin_window': window._asdict() if window else None,
                'bernstein_delta0': delta,
                'delta': chosen,
                'bernstein_delta0_finer': delta_finer,
                'L': L,
            },
        })
        report['constants'][tag] = {
            'N': overlap, 'delta0': delta, 'delta': chosen, 'L': L,
            'sigma': eccentricity.sigma if eccentricity else None,
        }
        rows.extend(_rect_rows(g))

        checks = report['checks']
        checks.append(Check.compare('coverage {}'.format(tag), coverage.covered - coverage.depth_cap,
                                    lo=COVERAGE_FLOOR))
        checks.append(Check.compare('overlap {}'.format(tag), overlap, hi=OVERLAP_CAP))
        checks.append(Check.compare('comparability {}'.format(tag), comparability.max_ratio,
                                    hi=COMPARABILITY_CAP))
        checks.append(Check.compare('comparability violations {}'.format(tag),
                                    len(comparability.violations), hi=0))
        if window is not None:
            checks.append(Check.boolean(
                'bin window {}'.format(tag), window.ok,
                '|c1| = {} and |c2| = {} against the cap 64'.format(abs(window.c1), abs(window.c2))))
        checks.append(Check.compare('bernstein delta0 {}'.format(tag), delta, lo=0.0,
                                    inconclusive=delta <= 0))
        if delta > 0:
            checks.append(Check.compare('bernstein delta0 drift {}'.format(tag),
                                        abs(delta_finer - delta) / delta, hi=DELTA_DRIFT))

    report['tables']['rects'] = rows


def run_decay(config: ExperimentConfig, report: Dict[str, Any]) -> None:
    s = _phase(config)
    domain = _window(config)
    cutoff = CutoffSpec(kind=config.cutoff, support=domain)
    sweep = decay_sweep(s, cutoff, config.lambdas, domain, config.n, config.restarts, config.iters,
                        config.c0, config.seed, config.get('threads'))
    d = order_at_origin(convolution_hessian(s))
    theory = float(sweep.theory_slope)

    report['tables']['sweep'] = [
        {'lambda': lam, 'norm': norm, 'extremizer_ratio': ratio, 'envelope': uniform_decay_envelope(lam, d)}
        for lam, norm, ratio in zip(sweep.lambdas, sweep.norms, sweep.extremizer_ratios)
    ]
    report['results'].append({
        'phase': str(s),
        'fitted_slope': sweep.fitted_slope,
        'extremizer_slope': sweep.extremizer_slope,
        'theory_slope': sweep.theory_slope,
    })
    grid = assemble_grid(s, cutoff, domain, config.n)
    report['constants'].update(
        d=d, n=config.n, samples_per_period=SAMPLES_PER_PERIOD,
        minimal_n=minimal_grid_size(grid, sweep.lambdas[-1]),
    )

    checks = report['checks']
    checks.append(Check.compare('extremizer slope', sweep.extremizer_slope,
                                lo=theory - SLOPE_WINDOW, hi=theory + SLOPE_WINDOW))
    if d == 0:
        checks.append(Check.compare('norm slope', sweep.fitted_slope,
                                    lo=theory - SLOPE_WINDOW, hi=theory + SLOPE_WINDOW))
    else:
        checks.append(Check.compare('norm slope', sweep.fitted_slope, hi=theory + NORM_SLOPE_SLACK))
    worst = max(b / a for a, b in zip(sweep.norms, sweep.norms[1:]))
    checks.append(Check.compare('norms non-increasing', worst, hi=NORM_WIGGLE))


def run_sublevel(config: ExperimentConfig, report: Dict[str, Any]) -> None:
    if config.get('shell_mu'):
        s = _phase(config)
        domain = _window(config)
        sweep = shell_sweep(s, config.shell_mu, config.lambdas, domain, config.n, config.restarts,
                            config.iters, config.seed, CutoffSpec(kind=config.cutoff, support=domain),
                            config.get('threads'))
        report['tables']['sweep'] = [
            {'lambda': lam, 'norm': norm, 'scaled': scaled}
            for lam, norm, scaled in zip(sweep.lambdas, sweep.norms, sweep.scaled)
        ]
        report['results'].append({'phase': str(s), 'mu': config.shell_mu, 'spread': sweep.spread})
        report['checks'].append(Check.compare('shell spread', sweep.spread, hi=SHELL_SPREAD))
        return

    h = _hessian(config)
    d_set = _domain(config)
    conditions = [tuple(c) for c in config.conditions]
    sweep = sublevel_sweep(h, d_set, config.mus, conditions, config.n, config.restarts, config.iters,
                           config.seed, config.get('threads'))
    theory = float(sweep.theory_exponent)
    rows = [{'mu': mu, 'norm': norm} for mu, norm in zip(sweep.mus, sweep.norms)]
    for row, bound in zip(rows, sweep.bounds):
        row['bound'] = bound
    report['tables']['sweep'] = rows
    report['results'].append({
        'H': str(h),
        'fitted_exponent': sweep.fitted_exponent,
        'theory_exponent': sweep.theory_exponent,
    })
    report['constants'].update(d=sweep.d, n=config.n)

    low, high = EXPONENT_WINDOW
    report['checks'].append(Check.compare('sublevel exponent', sweep.fitted_exponent,
                                          lo=theory - low, hi=theory + high))
    if sweep.bounds:
        worst = max(norm / bound for norm, bound in zip(sweep.norms, sweep.bounds))
        report['checks'].append(Check.compare('monomial bound', worst, hi=1.0))


def run_decompose(config: ExperimentConfig, report: Dict[str, Any]) -> None:
    d_set = _domain(config)
    critical = critical_sets(d_set)
    trapezoids = decompose_domain(d_set, config.nodes, config.get('threads'), critical)
    area = union_area(trapezoids)
    sampled = sampled_area(d_set, max(config.samples, AREA_SAMPLES), config.seed)

    report['results'].append({
        'domain': d_set.to_text(),
        'critical': critical.to_dict(),
        'trapezoids': [t.to_dict() for t in trapezoids],
        'area': area,
        'sampled_area': sampled,
    })
    report['tables']['trapezoids'] = [
        {'index': i, 'a': t.a, 'b': t.b, 'area': t.area(),
         'lower_branch': t.lower_branch, 'upper_branch': t.upper_branch}
        for i, t in enumerate(trapezoids)
    ]
    report['tables']['boundaries'] = [
        {'index': i, 'x': x, 'g': lo, 'h': hi}
        for i, t in enumerate(trapezoids)
        for x, lo, hi in zip(t.xs, t.lower, t.upper)
    ]
    report['constants'].update(count=len(trapezoids), budget=critical.trapezoid_budget)

    checks = report['checks']
    checks.append(Check.compare('area', abs(area - sampled), hi=AREA_TOLERANCE))
    checks.append(Check.boolean('monotone', all(t.is_monotone() for t in trapezoids),
                                'g and h monotone on every trapezoid'))
    outside = 0
    for i, t in enumerate(trapezoids):
        xs, ys = t.sample(1000, np.random.default_rng(config.seed + i))
        outside += int(np.count_nonzero(~d_set.contains(xs, ys)))
    checks.append(Check.compare('containment', outside, hi=0))
    checks.append(Check.compare('trapezoid count', len(trapezoids), hi=critical.trapezoid_budget))


def run_profile(config: ExperimentConfig, report: Dict[str, Any]) -> None:
    s = _phase(config)
    lam = config.lambdas[-1]
    profile = dyadic_profile(s, lam, config.j_range, config.k_range, restarts=config.restarts,
                             iters=config.iters, seed=config.seed)
    report['tables']['profile'] = [row._asdict() for row in profile.rows]
    report['results'].append({'phase': str(s), 'lambda': lam, 'L': profile.L, 'aggregate': profile.aggregate})
    report['constants'].update(L=profile.L)
    flagged = sum(1 for row in profile.rows if row.flagged)
    report['checks'].append(Check.compare('boxes above envelope', flagged, hi=0))


RUNNERS: Dict[str, Callable[[ExperimentConfig, Dict[str, Any]], None]] = {
    'analyze': run_analyze,
    'resolve': run_resolve,
    'decay': run_decay,
    'sublevel': run_sublevel,
    'decompose': run_decompose,
    'profile': run_profile,
}


def run(config: ExperimentConfig) -> RunReport:
    """Validate config, dispatch to its subcommand and collect the report."""
    config.check()
    parts = {'results': [], 'constants': {}, 'checks': [], 'tables': {}}
    timer = Timer()
    info('running {} (seed {})'.format(config.subcommand, config.seed))
    with timer:
        RUNNERS[config.subcommand](config, parts)
    return RunReport(
        subcommand=config.subcommand,
        config=json_ready(dict(config.to_dict())),
        results=json_ready(parts['results']),
        constants=json_ready(parts['constants']),
        checks=parts['checks'],
        tables=json_ready(parts['tables']),
        timings={'total': timer.elapsed},
        verdict=overall_verdict(parts['checks']),
    )
