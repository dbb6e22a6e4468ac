"""
Command-line front end: ``oscint <subcommand> [flags]``.

Flags override :class:`~oscint.config.ExperimentConfig` defaults. The exit code
is 0 when every check passes, 2 when one fails, 3 when the worst is
inconclusive and 1 when the run could not be carried out.
"""

import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional

from .algebraic import TracingError
from .config import SUBCOMMANDS, ExperimentConfig
from .fields import ValidationError
from .newton import DegeneratePhaseError
from .poly import EnclosureBudgetError, ParseError
from .report import ReportError, emit
from .resolution import InadmissibleRegionError
from .runner import run
from .trilinear import GridError, HypothesisError, SamplingRuleError
from .utils import *

__all__ = ['main', 'build_parser', 'config_from_args']

ERROR_EXIT = 1

DEFAULT_LAMBDAS = (2.0 ** 8, 2.0 ** 12, 5)
DEFAULT_MUS = (2.0 ** -8, 2.0 ** -4, 5)


def _text_or_file(value: str) -> str:
    """A literal, or the contents of the file it names."""
    if os.path.isfile(value):
        with open(value) as f:
            return f.read().strip()
    return value


def _window(value: str) -> List[str]:
    parts = [p.strip() for p in value.split(',')]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError('expected x_lo,x_hi,y_lo,y_hi, got {!r}'.format(value))
    return parts


def _conditions(value: str) -> List[List[int]]:
    """'1,1;2,0' -> [[1, 1], [2, 0]]"""
    try:
        pairs = [[int(v) for v in item.split(',')] for item in value.split(';') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError('conditions look like "a1,b1;a2,b2", not {!r}'.format(value)) from None
    return pairs


def _int_range(value: str) -> List[int]:
    """'-4:-1' -> [-4, -3, -2, -1]"""
    try:
        lo, hi = (int(v) for v in value.split(':'))
    except ValueError:
        raise argparse.ArgumentTypeError('ranges look like "lo:hi", not {!r}'.format(value)) from None
    return list(range(lo, hi + 1))


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--phase', type=_text_or_file, help='phase S(x, y), literal or file')
    parser.add_argument('--hessian', '--H', type=_text_or_file, dest='hessian',
                        help='H itself instead of the phase (resolve, sublevel)')
    parser.add_argument('--seed', type=int, help='seed of every randomized step')
    parser.add_argument('--threads', type=int, help='worker threads (capped by OSCINT_THREADS)')
    parser.add_argument('--tol', type=float, help='relative tolerance of range enclosures')
    parser.add_argument('--output', help='output directory')
    parser.add_argument('--format', dest='formats', action='append', choices=['json', 'csv'],
                        help='output format, repeatable (default json and csv)')
    parser.add_argument('--mongo-uri', help='also archive the report in this MongoDB')
    parser.add_argument('-v', '--verbose', action='count', default=0)


def _grid(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--n', type=int, help='grid points per unit side')
    parser.add_argument('--restarts', type=int, help='random restarts of the maximizer')
    parser.add_argument('--iters', type=int, help='alternating-maximization sweeps per restart')
    parser.add_argument('--cutoff', choices=['indicator', 'bump'])
    parser.add_argument('--window', type=_window, help='grid domain x_lo,x_hi,y_lo,y_hi')
    parser.add_argument('--lambda-min', type=float)
    parser.add_argument('--lambda-max', type=float)
    parser.add_argument('--points', type=int, help='values in the lambda (or mu) range')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='oscint', description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest='subcommand', metavar='subcommand')
    sub.required = True
    parsers = {name: sub.add_parser(name, argument_default=argparse.SUPPRESS) for name in SUBCOMMANDS}
    for p in parsers.values():
        _common(p)

    parsers['analyze'].description = 'Newton polyhedron, order d and predicted decay of a phase.'

    p = parsers['resolve']
    p.description = 'Stopping-time resolution of H in a root sector, with audits.'
    p.add_argument('--edge', type=int, help='index of the Newton edge')
    p.add_argument('--root', type=int, help='index of the nonzero real root on that edge')
    p.add_argument('--j', type=int, action='append', dest='scales', help='sector scale, repeatable')
    p.add_argument('--mu', help='initial dyadic fraction of the square side')
    p.add_argument('--eps', type=float, help='sector half-width')
    p.add_argument('--delta', type=float, help='expansion threshold (default: a quarter of the Bernstein backstop)')
    p.add_argument('--max-depth', type=int)
    p.add_argument('--max-squares', type=int)
    p.add_argument('--samples', type=int, help='Monte-Carlo samples of the audits')
    p.add_argument('--audit-eps', type=float, help='dilation of the audited rectangles')

    p = parsers['decay']
    p.description = 'Operator norms and extremizer ratios along a lambda sweep.'
    _grid(p)
    p.add_argument('--c0', type=float, help='extremizer box width constant')

    p = parsers['sublevel']
    p.description = 'Sublevel-set norms along a mu sweep, or a shell sweep with --shell-mu.'
    _grid(p)
    p.add_argument('--domain', type=_text_or_file, help='inequality list, literal or file')
    p.add_argument('--mu-min', type=float)
    p.add_argument('--mu-max', type=float)
    p.add_argument('--conditions', type=_conditions, help='derivative orders "a1,b1;a2,b2"')
    p.add_argument('--shell-mu', type=float, help='run the shell-localised sweep at this mu')

    p = parsers['decompose']
    p.description = 'Curved-trapezoid decomposition of an algebraic domain.'
    p.add_argument('--domain', type=_text_or_file, help='inequality list, literal or file')
    p.add_argument('--nodes', type=int, help='Chebyshev nodes per slab')
    p.add_argument('--samples', type=int, help='Monte-Carlo samples of the area check')

    p = parsers['profile']
    p.description = 'Local operator norms on dyadic boxes.'
    p.add_argument('--lambda', type=float, dest='lambda_max')
    p.add_argument('--j-range', type=_int_range)
    p.add_argument('--k-range', type=_int_range)
    p.add_argument('--restarts', type=int)
    p.add_argument('--iters', type=int)
    return parser


def _sweep(args: Dict[str, Any], prefix: str, default) -> Optional[List[float]]:
    keys = ('{}_min'.format(prefix), '{}_max'.format(prefix), 'points')
    if not any(k in args for k in keys):
        return None
    lo, hi, points = (args.get(k, d) for k, d in zip(keys, default))
    return geometric_range(lo, hi, points)


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    values = dict(vars(args))
    for key in ('verbose', 'mongo_uri'):
        values.pop(key, None)
    sub = values['subcommand']

    mus = _sweep(values, 'mu', DEFAULT_MUS) if sub == 'sublevel' and 'shell_mu' not in values else None
    if mus is not None:
        values['mus'] = mus
        values.pop('points', None)
    if sub == 'profile' and 'lambda_max' in values:
        values['lambdas'] = [values.pop('lambda_max')]
    else:
        lambdas = _sweep(values, 'lambda', DEFAULT_LAMBDAS)
        if lambdas is not None:
            values['lambdas'] = lambdas
    for key in ('lambda_min', 'lambda_max', 'mu_min', 'mu_max', 'points'):
        values.pop(key, None)
    return ExperimentConfig(**values).check()


HINTS = {
    ParseError: 'polynomials use x, y, integers, p/q, +, -, * and ^',
    ValidationError: 'see `oscint {sub} --help` for the accepted values',
    DegeneratePhaseError: 'the phase has the form p(x) + q(y) + r(x + y); try `oscint analyze`',
    SamplingRuleError: 'raise --n or lower --lambda-max',
    GridError: 'adjust --n or --window',
    HypothesisError: 'choose a domain or mu where the derivative condition holds',
    InadmissibleRegionError: 'widen --eps, lower --j or pick another --root',
    EnclosureBudgetError: 'loosen --tol',
    TracingError: 'raise --nodes or simplify the domain',
    ReportError: 'choose a writable --output',
}


def _hint(error: Exception, sub: str) -> str:
    if isinstance(error, SamplingRuleError):
        return 'raise --n to at least {} or lower --lambda-max'.format(error.minimal_n)
    for cls, hint in HINTS.items():
        if isinstance(error, cls):
            return hint.format(sub=sub)
    return ''


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    verbose = getattr(args, 'verbose', 0)
    if verbose:
        set_level(logging.DEBUG if verbose > 1 else logging.INFO)

    sub = args.subcommand
    try:
        config = config_from_args(args)
        report = run(config)
        written = emit(report, config.output, config.formats)
        uri = getattr(args, 'mongo_uri', None)
        if uri:
            from .archive import ReportArchive
            ReportArchive.connect(uri).save(report)
    except (OscintError, ValueError) as e:
        msg = getattr(e, 'msg', str(e))
        print('oscint {}: error: {}'.format(sub, msg), file=sys.stderr)
        hint = _hint(e, sub)
        if hint:
            print('hint: {}'.format(hint), file=sys.stderr)
        return ERROR_EXIT

    for check in report.checks:
        print('{:<14} {}: {}'.format(check.verdict, check.name, check.comparison))
    print('{}: {} ({})'.format(sub, report.verdict, ', '.join(written)))
    return report.exit_code
