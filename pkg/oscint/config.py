"""
Experiment configuration record.

Every run is described by one :class:`ExperimentConfig`; argparse flags only
override its defaults, and the validated record is echoed into the report.
"""

from fractions import Fraction
from typing import List, Optional

from .fields import ArrayField, ChoiceField, IntField, ValidationError
from .model import BaseRecord
from .utils import *

__all__ = ['ExperimentConfig', 'SUBCOMMANDS', 'MAX_GRID']

SUBCOMMANDS = ('analyze', 'resolve', 'decay', 'sublevel', 'decompose', 'profile')
MAX_GRID = 1 << 14
CUTOFF_KINDS = ('indicator', 'bump')
REPORT_FORMATS = ('json', 'csv')


def _sorted_positive(values) -> bool:
    return bool(values) and all(v > 0 for v in values) and all(a < b for a, b in zip(values, values[1:]))


def _positive(value) -> bool:
    return value > 0


def _window(values) -> bool:
    return len(values) == 4 and values[0] < values[1] and values[2] < values[3]


def _pairs(values) -> bool:
    return all(len(v) == 2 and min(v) >= 0 and sum(v) > 0 for v in values)


class ExperimentConfig(BaseRecord):
    forbid_extra_data = True

    subcommand = ChoiceField(SUBCOMMANDS)
    # phase S, or H itself for resolve and sublevel when `hessian` is set
    phase: Optional[str]
    hessian: Optional[str]
    domain: str = ''
    cutoff = ChoiceField(CUTOFF_KINDS, default='bump')
    window: List[Fraction] = ['0', '1/8', '0', '1/8']
    n = IntField(min_value=32, max_value=MAX_GRID, default=256)
    lambdas: List[float] = [2.0 ** k for k in range(8, 13)]
    mus: List[float] = [2.0 ** -k for k in range(8, 3, -1)]
    restarts = IntField(min_value=4, default=8)
    iters: int = 200
    c0: float = 0.25
    tol: float = 1e-6

    # resolve
    scales: List[int] = [-6]
    mu: Fraction = '1'
    edge: int = 0
    root: int = 0
    eps: Optional[float]
    audit_eps: float = 0.125
    # overrides the Bernstein backstop delta0
    delta: Optional[float]
    max_depth: int = 20
    max_squares: Optional[int] = 200000
    samples: int = 20000

    # sublevel and profile
    conditions: List[List[int]] = []
    shell_mu: Optional[float]
    j_range: List[int] = [-4, -3, -2, -1]
    k_range: List[int] = [-4, -3, -2, -1]
    nodes: int = 64

    seed: int = 0
    threads: Optional[int]
    output: str = 'out'
    formats = ArrayField(ChoiceField(REPORT_FORMATS), min_length=1, default=['json', 'csv'])

    class Meta:
        required = ['subcommand']
        validators = {
            'window': _window,
            'lambdas': _sorted_positive,
            'mus': _sorted_positive,
            'iters': _positive,
            'c0': _positive,
            'tol': _positive,
            'scales': lambda v: bool(v) and all(j < 0 for j in v),
            'mu': is_dyadic,
            'eps': _positive,
            'delta': _positive,
            'audit_eps': lambda v: 0 < v < 0.5,
            'max_depth': lambda v: 0 <= v <= 40,
            'max_squares': _positive,
            'samples': _positive,
            'conditions': _pairs,
            'shell_mu': _positive,
            'nodes': lambda v: v >= 8,
            'seed': lambda v: 0 <= v < 1 << 64,
            'threads': _positive,
        }

    def check(self) -> 'ExperimentConfig':
        """Requirements that depend on the subcommand."""
        sub = self.subcommand
        if sub in ('analyze', 'decay', 'profile') and not self.get('phase'):
            raise ValidationError('{!r} needs a phase (--phase)'.format(sub))
        if sub in ('resolve', 'sublevel') and not (self.get('phase') or self.get('hessian')):
            raise ValidationError('{!r} needs --phase or --hessian'.format(sub))
        if sub == 'decay' and len(self.lambdas) < 5:
            raise ValidationError(
                'decay needs at least 5 lambdas, got {}; raise --points'.format(len(self.lambdas))
            )
        if sub == 'sublevel' and not self.get('shell_mu'):
            if len(self.mus) < 2:
                raise ValidationError('sublevel needs at least 2 values of mu')
            if not self.conditions:
                raise ValidationError('sublevel needs derivative conditions (--conditions "a,b;...")')
            if self.n < 64:
                raise ValidationError('sublevel grids need n >= 64, got {}'.format(self.n))
        return self
