"""Value and time domains.

Timestamps and numbers share one exact representation (:class:`fractions.Fraction`),
so ``time(e)`` yields ordinary numbers and no rounding ever happens.

Values are plain Python objects:

* ``UNIT``          the single value of the unit type
* ``bool``          booleans
* ``Fraction``      numbers (integers embed)
* ``str``           strings
* ``TOP``           a maximal number, only produced inside generated validation specs

``BOTTOM`` marks the absence of a value (an "extended" value is a value or ``BOTTOM``).
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Union

Time = Fraction


class _Unit:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "()"

    def __reduce__(self):
        return (_Unit, ())


class _Bottom:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "⊥"

    def __bool__(self):
        return False

    def __reduce__(self):
        return (_Bottom, ())


class _Top:
    """Number larger than every Fraction. Equal only to itself."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "∞"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("streammon-top")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __reduce__(self):
        return (_Top, ())


UNIT = _Unit()
BOTTOM = _Bottom()
TOP = _Top()

Value = Union[_Unit, bool, Fraction, str, _Top]
ExtValue = Union[Value, _Bottom]


def is_num(v) -> bool:
    return type(v) is Fraction or v is TOP


def to_time(x) -> Time:
    """Coerce ``x`` into a non-negative exact timestamp."""
    if isinstance(x, bool):
        raise TypeError("booleans are not timestamps")
    if isinstance(x, float):
        raise TypeError("floating point timestamps are not supported; use str or Fraction")
    t = parse_number(x) if isinstance(x, str) else Fraction(x)
    if t < 0:
        raise ValueError(f"negative timestamp {x!r}")
    return t


def num(x) -> Fraction:
    """Build a numeric value from an int, Fraction or decimal string."""
    if isinstance(x, str):
        return parse_number(x)
    if isinstance(x, (bool, float)):
        raise TypeError(f"not an exact number: {x!r}")
    return Fraction(x)


_NUMBER_RE = re.compile(r"^-?(\d+)(\.\d+)?(/\d+)?$")


def parse_number(text: str) -> Fraction:
    """Parse ``12``, ``-3``, ``0.25`` or ``1/3`` exactly."""
    if not _NUMBER_RE.match(text):
        raise ValueError(f"bad number syntax: {text!r}")
    if "/" in text:
        n, d = text.split("/")
        if int(d) == 0:
            raise ValueError(f"zero denominator: {text!r}")
        return Fraction(parse_number(n)) / int(d)
    return Fraction(text)


def format_number(q) -> str:
    """Exact textual form: integer, terminating decimal, or ``n/d``."""
    if q is TOP:
        return "inf"
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    d = q.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{q.numerator}/{q.denominator}"
    digits = max(twos, fives)
    scaled = abs(q) * 10**digits
    assert scaled.denominator == 1
    s = str(scaled.numerator).rjust(digits + 1, "0")
    out = s[:-digits] + "." + s[-digits:]
    return ("-" if q < 0 else "") + out


def format_value(v) -> str:
    if v is UNIT:
        return "()"
    if v is True:
        return "true"
    if v is False:
        return "false"
    if is_num(v):
        return format_number(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t") + '"'
    if v is BOTTOM:
        return "⊥"
    raise TypeError(f"not a value: {v!r}")


def same_value(a, b) -> bool:
    """Type-aware equality (``True`` and ``Fraction(1)`` differ)."""
    return type(a) is type(b) and a == b


def value_type_name(v) -> str:
    if v is UNIT:
        return "Unit"
    if isinstance(v, bool):
        return "Bool"
    if is_num(v):
        return "Num"
    if isinstance(v, str):
        return "Str"
    raise TypeError(f"not a value: {v!r}")
