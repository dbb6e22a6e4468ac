import logging
import math
import os
import time
from collections import abc
from fractions import Fraction
from keyword import iskeyword
from threading import Lock
from typing import (
    Mapping,
    List,
    Iterator,
    Callable,
    Optional,
    Sequence,
    Union,
    Any,
)

import numpy as np

__all__ = [
    'OscintError',
    'DotSon',
    'Timer',
    'Missing',
    'cachedproperty',
    'isclass',
    'to_fraction',
    'fraction_str',
    'is_dyadic',
    'dyadic_floor',
    'exact_log2',
    'geometric_range',
    'loglog_slope',
    'thread_count',
    'set_logger',
    'get_logger',
    'set_level',
    'debug',
    'info',
    'warn',
]

Rational = Union[int, Fraction]


class OscintError(Exception):
    def __init__(self, msg):
        self.msg = msg
        super().__init__(msg)


class DotSon(abc.Mapping):
    """A :class:`DotSon` is a special dict whose item can be accessed using dot notation.
    Reports are wrapped in it so that nested results read like attributes.

    >>> d = DotSon({'name': 'decay', 'results': [{'norm': 0.5}]})
    >>> d.name
    'decay'
    >>> d.results[0].norm
    0.5
    >>> type(d.results[0]) == DotSon
    True
    """

    def __new__(cls, obj: Any) -> Any:
        if isinstance(obj, abc.Mapping):
            return super().__new__(cls)
        elif isinstance(obj, abc.MutableSequence):
            # noinspection PyCallingNonCallable
            return [cls(item) for item in obj]
        else:
            return obj

    def __init__(self, mapping: Mapping):
        self._data = {}
        for key, value in mapping.items():
            if not key.isidentifier():
                raise AttributeError("invalid identifier: {!r}".format(key))
            if iskeyword(key):
                key += '_'
            self._data[key] = value

    def __getattr__(self, name: str) -> Any:
        if hasattr(self._data, name):
            return getattr(self._data, name)
        try:
            return DotSon(self._data[name])
        except KeyError:
            raise AttributeError('{!r} has no attribute {!r}'.format(self, name))

    def __getitem__(self, item: str) -> Any:
        return self._data[item]

    def __len__(self) -> int:
        return len(self._data)

    def __iter__(self) -> Iterator:
        return iter(self._data)

    def __str__(self) -> str:
        return str(self._data)


class Timer:
    """Record the time that a task has taken"""

    def __init__(self, func: Callable = time.perf_counter):
        self.elapsed = 0.0
        self._func = func
        self._start = None

    def start(self) -> None:
        if self._start is not None:
            raise RuntimeError('Already started')
        self._start = self._func()

    def stop(self) -> None:
        if self._start is None:
            raise RuntimeError('Not started')
        end = self._func()
        self.elapsed += end - self._start
        self._start = None

    def __enter__(self) -> 'Timer':
        self.start()
        return self

    def __exit__(self, *args) -> None:
        self.stop()


def isclass(obj: Any) -> bool:
    """Determine if an object is a `class` object

    >>> isclass(type)
    True
    >>> isclass({})
    False
    """

    return issubclass(type(obj), type)


class Missing:
    """A Singleton which indicates a value does not exist. NEVER try to subclass it.

    >>> Missing() == Missing()
    True
    """

    _instance = None

    def __new__(cls, *args, **kw):
        if cls._instance is None:
            cls._instance = super().__new__(cls, *args, **kw)
        return cls._instance

    def __str__(self):
        return '<Missing>'

    __repr__ = __str__


# noinspection PyPep8Naming
class cachedproperty:
    """Decorator that converts a method with a single self argument into a property cached on the instance."""

    fset = fdel = None

    def __init__(self, fget: Callable):
        self.fget = fget
        self.__doc__ = fget.__doc__

    def __get__(self, instance, cls=None) -> Any:
        if instance is None:
            return self
        res = instance.__dict__[self.fget.__name__] = self.fget(instance)
        return res


def to_fraction(value: Any) -> Fraction:
    """Convert ints, floats and 'p/q' strings to an exact fraction.
    Floats are converted exactly (every float is a binary rational).

    >>> to_fraction('3/2')
    Fraction(3, 2)
    >>> to_fraction(0.25)
    Fraction(1, 4)
    >>> to_fraction(' -7 ')
    Fraction(-7, 1)
    """

    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError('cannot convert a bool to a fraction')
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            raise ValueError('{!r} is not a finite number.'.format(value))
        return Fraction(float(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError('cannot convert {!r} to a fraction'.format(value))


def fraction_str(q: Rational) -> str:
    """Render a rational the way the polynomial text format writes it.

    >>> fraction_str(Fraction(1, 6))
    '1/6'
    >>> fraction_str(Fraction(4, 1))
    '4'
    """

    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return '{}/{}'.format(q.numerator, q.denominator)


def is_dyadic(value: Any) -> bool:
    """Whether value is an integer power of two (a dyadic scale).

    >>> is_dyadic(Fraction(1, 16))
    True
    >>> is_dyadic(3)
    False
    >>> is_dyadic(0)
    False
    """

    q = to_fraction(value)
    if q <= 0:
        return False
    num, den = q.numerator, q.denominator
    return (num & (num - 1)) == 0 and (den & (den - 1)) == 0 and (num == 1 or den == 1)


def exact_log2(value: Any) -> int:
    """Exponent of a dyadic scale.

    >>> exact_log2(Fraction(1, 8))
    -3
    >>> exact_log2(4)
    2
    """

    q = to_fraction(value)
    if not is_dyadic(q):
        raise ValueError('{} is not a power of two.'.format(q))
    if q.denominator == 1:
        return q.numerator.bit_length() - 1
    return -(q.denominator.bit_length() - 1)


def dyadic_floor(value: Any) -> int:
    """Exponent s of the largest power of two 2^s <= value.

    >>> dyadic_floor(Fraction(3, 16))
    -3
    >>> dyadic_floor(1)
    0
    >>> dyadic_floor(2 ** 0.5)
    0
    """

    q = to_fraction(value)
    if q <= 0:
        raise ValueError('{} must be positive.'.format(q))
    s = q.numerator.bit_length() - q.denominator.bit_length()
    # adjust the estimate so that 2^s <= q < 2^(s+1)
    while Fraction(2) ** s > q:
        s -= 1
    while Fraction(2) ** (s + 1) <= q:
        s += 1
    return s


def geometric_range(lo: float, hi: float, points: int) -> List[float]:
    """Geometrically spaced values from lo to hi inclusive.

    >>> geometric_range(2 ** 8, 2 ** 10, 3)
    [256.0, 512.0, 1024.0]
    >>> geometric_range(4.0, 4.0, 1)
    [4.0]
    """

    if points < 1:
        raise ValueError('points must be positive, not {!r}.'.format(points))
    if points == 1:
        return [float(lo)]
    values = np.geomspace(lo, hi, points)
    exponents = np.log2(values)
    # snap values lying on powers of two so sweeps stay exactly dyadic
    snapped = np.where(
        np.abs(exponents - np.round(exponents)) < 1e-12,
        np.exp2(np.round(exponents)),
        values,
    )
    return [float(v) for v in snapped]


def loglog_slope(
    xs: Sequence[float], ys: Sequence[float], drop_ends: bool = False
) -> float:
    """Least-squares slope of log2(y) against log2(x).

    >>> round(loglog_slope([1, 2, 4, 8], [1, 0.5, 0.25, 0.125]), 12)
    -1.0
    """

    x = np.log2(np.asarray(xs, dtype=float))
    y = np.log2(np.asarray(ys, dtype=float))
    if drop_ends:
        x, y = x[1:-1], y[1:-1]
    if len(x) < 2:
        raise ValueError('need at least two points to fit a slope')
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def thread_count(requested: Optional[int] = None) -> int:
    """Worker count, capped by the ``OSCINT_THREADS`` environment variable."""

    cap = os.environ.get('OSCINT_THREADS')
    count = requested or os.cpu_count() or 1
    if cap:
        try:
            count = min(count, max(1, int(cap)))
        except ValueError:
            warn('ignoring OSCINT_THREADS={!r}; not an integer'.format(cap))
    return max(1, count)


# Logging utils
DEFAULT_LOGGER_NAME = 'oscint'
DEFAULT_LOGGING_FORMAT = '[%(asctime)s] %(levelname)s in `oscint`: %(message)s'
DEFAULT_LOGGING_LEVEL = logging.WARNING

_logger: Optional[logging.Logger] = None
_lock = Lock()


def set_logger(logger: logging.Logger) -> None:
    global _logger
    _logger = logger


def get_logger() -> logging.Logger:
    if _logger is None:
        _set_default_logger()
    return _logger


def set_level(level: int) -> None:
    get_logger().setLevel(level)


def _set_default_logger() -> None:
    global _logger
    with _lock:
        _logger = logging.getLogger(DEFAULT_LOGGER_NAME)
        formatter = logging.Formatter(DEFAULT_LOGGING_FORMAT)
        handler = logging.StreamHandler()
        handler.setFormatter(formatter)
        _logger.addHandler(handler)
        _logger.setLevel(DEFAULT_LOGGING_LEVEL)


def debug(msg: str, *args, **kw) -> None:
    logger = get_logger()
    logger.log(logging.DEBUG, msg, *args, **kw)


def info(msg: str, *args, **kw) -> None:
    logger = get_logger()
    logger.log(logging.INFO, msg, *args, **kw)


def warn(msg: str, *args, **kw) -> None:
    logger = get_logger()
    logger.log(logging.WARNING, msg, *args, **kw)


if __name__ == '__main__':
    import doctest

    doctest.testmod()
