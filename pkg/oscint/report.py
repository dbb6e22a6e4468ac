"""
Run reports and their on-disk form.

A report is written as one schema-versioned JSON document (``summary.json``)
plus one CSV file per table.
"""

import csv
import math
import os
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional

import numpy as np

from .fields import ValidationError
from .model import BaseRecord, EmbeddedRecord
from .utils import *

__all__ = [
    'SCHEMA',
    'PASS',
    'FAIL',
    'INCONCLUSIVE',
    'EXIT_CODES',
    'Check',
    'RunReport',
    'ReportError',
    'json_ready',
    'emit',
    'load_report',
    'overall_verdict',
]

SCHEMA = 'oscint/1'
PASS, FAIL, INCONCLUSIVE = 'pass', 'fail', 'inconclusive'
EXIT_CODES = {PASS: 0, FAIL: 2, INCONCLUSIVE: 3}


class ReportError(OscintError):
    pass


def json_ready(obj: Any) -> Any:
    """Plain JSON values: fractions as 'p/q', numpy scalars unwrapped, non-finite floats as None.

    >>> json_ready({'e': Fraction(1, 6), 'v': (np.float64(0.5), float('inf'))})
    {'e': '1/6', 'v': [0.5, None]}
    """

    if isinstance(obj, dict):
        return {str(k): json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_ready(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return json_ready(obj.tolist())
    if isinstance(obj, Fraction):
        return fraction_str(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    return obj


class Check(EmbeddedRecord):
    """One acceptance check; ``comparison`` spells out the inequality behind the verdict."""

    name: str
    verdict: str
    comparison: str
    measured: Any
    target: Any

    class Meta:
        required = ['name', 'verdict', 'comparison']
        validators = {'verdict': lambda v: v in (PASS, FAIL, INCONCLUSIVE)}

    @classmethod
    def compare(cls, name: str, measured: float, lo: Optional[float] = None, hi: Optional[float] = None,
                inconclusive: bool = False) -> 'Check':
        """Pass when lo <= measured <= hi."""
        ok = (lo is None or measured >= lo) and (hi is None or measured <= hi)
        parts = []
        if lo is not None:
            parts.append('{:.6g} <='.format(lo))
        parts.append('{:.6g}'.format(measured))
        if hi is not None:
            parts.append('<= {:.6g}'.format(hi))
        verdict = INCONCLUSIVE if inconclusive else (PASS if ok else FAIL)
        return cls(
            name=name,
            verdict=verdict,
            comparison=' '.join(parts),
            measured=json_ready(measured),
            target=json_ready([lo, hi]),
        )

    @classmethod
    def boolean(cls, name: str, ok: bool, comparison: str) -> 'Check':
        return cls(name=name, verdict=PASS if ok else FAIL, comparison=comparison, measured=bool(ok), target=True)


def overall_verdict(checks: Iterable[Check]) -> str:
    """fail if any check fails, else inconclusive if any is, else pass."""
    verdicts = [c.verdict for c in checks]
    if FAIL in verdicts:
        return FAIL
    if INCONCLUSIVE in verdicts:
        return INCONCLUSIVE
    return PASS


class RunReport(BaseRecord):
    schema: str = SCHEMA
    subcommand: str
    config: dict
    results: list = []
    constants: dict = {}
    checks: List[Check] = []
    # name -> rows, each written to <name>.csv
    tables: dict = {}
    timings: dict = {}
    verdict: str = PASS

    class Meta:
        required = ['subcommand', 'config']
        validators = {
            'schema': lambda v: v == SCHEMA,
            'verdict': lambda v: v in EXIT_CODES,
        }

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]

    def summary(self) -> DotSon:
        """Attribute view, e.g. ``report.summary().results[0].fitted_slope``."""
        return DotSon(dict(self.to_dict()))

    def canonical_json(self) -> str:
        """The JSON text without timings; identical across runs with one seed."""
        data = dict(self.to_dict())
        data.pop('timings', None)
        return type(self)(**data).to_json(indent=2)


def _write_table(path: str, rows: List[Dict[str, Any]]) -> None:
    columns: List[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    with open(path, 'w', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: json_ready(v) for k, v in row.items()})


def emit(report: RunReport, directory: str, formats: Iterable[str] = ('json', 'csv')) -> List[str]:
    """Write summary.json and one CSV per table into directory; returns the paths written."""
    formats = set(formats)
    if not formats <= {'json', 'csv'}:
        raise ValueError('unknown formats {!r}'.format(sorted(formats - {'json', 'csv'})))
    written = []
    try:
        os.makedirs(directory, exist_ok=True)
        if 'json' in formats:
            path = os.path.join(directory, 'summary.json')
            with open(path, 'w') as f:
                f.write(report.to_json(indent=2))
            written.append(path)
        if 'csv' in formats:
            for name, rows in report.tables.items():
                path = os.path.join(directory, '{}.csv'.format(name))
                _write_table(path, rows)
                written.append(path)
    except OSError as e:
        raise ReportError('cannot write the report to {!r}: {}'.format(directory, e)) from None
    debug('wrote {}'.format(', '.join(written)))
    return written


def load_report(path: str) -> RunReport:
    with open(path) as f:
        text = f.read()
    try:
        return RunReport.from_json(text)
    except ValidationError as e:
        raise ReportError('{} is not a valid report: {}'.format(path, e.msg)) from None
