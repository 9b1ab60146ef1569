"""Time units and exact-arithmetic helpers.

All times in this package are microseconds. Quantities that may fall off the
integer grid (transmission times, equal-split WCETs, schedule offsets) are
held as :class:`fractions.Fraction` so that verifiers can compare intervals
exactly; plain ints are accepted anywhere a Fraction is.

Schedule offsets and frame windows live on a 0.1 us grid (``GRID_US``).
"""

from __future__ import annotations

import math
from fractions import Fraction

#: Finest time resolution used by the schedule synthesizers.
GRID_US = Fraction(1, 10)

Time = Fraction | int


def ceil_to_grid(t: Time) -> Fraction:
    """Round ``t`` up to the 0.1 us grid."""
    return Fraction(math.ceil(Fraction(t) / GRID_US)) * GRID_US


def floor_to_grid(t: Time) -> Fraction:
    """Round ``t`` down to the 0.1 us grid."""
    return Fraction(math.floor(Fraction(t) / GRID_US)) * GRID_US


def lcm_all(values) -> int:
    """Least common multiple of positive integers."""
    return math.lcm(*values)


def time_to_number(t: Time):
    """Exact int when integral, else float, for JSON output."""
    f = Fraction(t)
    if f.denominator == 1:
        return int(f)
    return float(f)


def time_to_json(t: Time):
    """JSON value that survives a round-trip without losing exactness.

    Integral values become ints. Values with a finite decimal expansion
    become floats (their ``repr`` is the exact decimal, so parsing the
    string form recovers the value). Anything else - e.g. a third of a
    millisecond - is emitted as an ``"a/b"`` string.
    """
    f = Fraction(t)
    if f.denominator == 1:
        return int(f)
    if Fraction(str(float(f))) == f:
        return float(f)
    return f"{f.numerator}/{f.denominator}"


def time_from_json(value) -> Fraction:
    """Inverse of :func:`time_to_json`."""
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


def fraction_to_decimal(f: Fraction, max_places: int = 12) -> str:
    """Render a Fraction as a decimal string, exact when possible.

    Used by the scenario printer: parsed documents only ever contain
    fractions with power-of-ten denominators, which render exactly.
    """
    f = Fraction(f)
    if f.denominator == 1:
        return str(f.numerator)
    sign = "-" if f < 0 else ""
    f = abs(f)
    whole, rem = divmod(f.numerator, f.denominator)
    digits = []
    for _ in range(max_places):
        if rem == 0:
            break
        rem *= 10
        d, rem = divmod(rem, f.denominator)
        digits.append(str(d))
    if rem != 0:  # not finitely decimal; best-effort rounding
        digits.append(str(round(Fraction(rem, f.denominator))))
    return f"{sign}{whole}." + "".join(digits)
