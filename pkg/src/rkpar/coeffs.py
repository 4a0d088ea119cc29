"""Coefficient arithmetic shared by tableaus and method builders.

Coefficients are either exact rationals (`fractions.Fraction`, including
plain ints) or high-precision binary floats (`mpmath.mpf`).  All inexact
work runs at WORK_PREC bits so that a documented verification tolerance of
1e-13 sits far above the arithmetic noise floor.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

import mpmath
from mpmath import mpf

#: Working precision (bits) for inexact coefficients.  Chebyshev nodes and
#: everything derived from them are carried at this precision.
WORK_PREC = 192

#: Magnitude below which an inexact value is treated as a structural zero
#: (half the working precision, in bits).
ZERO_EPS = mpf(2) ** (-WORK_PREC // 2)

Coefficient = Union[int, Fraction, mpf]


def workprec():
    """Context manager pinning mpmath to the package working precision."""
    return mpmath.workprec(WORK_PREC)


def is_exact(x: Coefficient) -> bool:
    return isinstance(x, (int, Fraction))


def is_zero(x: Coefficient) -> bool:
    """Exact zero for rationals; sub-noise-floor for inexact values."""
    if is_exact(x):
        return x == 0
    return abs(x) <= ZERO_EPS


def to_mpf(x: Coefficient) -> mpf:
    if isinstance(x, mpf):
        return x
    with workprec():
        if isinstance(x, Fraction):
            return mpf(x.numerator) / mpf(x.denominator)
        return mpf(x)


def to_float(x: Coefficient) -> float:
    return float(x)


def parse_entry(text: str) -> Coefficient:
    """Parse a single tableau entry.

    ``num/den`` and bare integers parse to exact rationals; anything with a
    decimal point or exponent parses to an mpf at WORK_PREC.
    """
    text = text.strip()
    if "/" in text:
        num, _, den = text.partition("/")
        d = int(den)
        if d == 0:
            raise ValueError(f"zero denominator in entry {text!r}")
        return Fraction(int(num), d)
    if any(ch in text for ch in ".eE") and not text.lstrip("+-").isdigit():
        with workprec():
            return mpf(text)
    return Fraction(int(text))


def format_entry(x: Coefficient) -> str:
    """Format an entry so that parse_entry round-trips it.

    Rationals round-trip bit-exactly.  Inexact values are printed with 62
    significant digits, enough to recover all WORK_PREC bits.
    """
    if is_exact(x):
        f = Fraction(x)
        if f.denominator == 1:
            return str(f.numerator)
        return f"{f.numerator}/{f.denominator}"
    with workprec():
        s = mpmath.nstr(x, 62, strip_zeros=True)
    if "." not in s and "e" not in s and "E" not in s:
        s += ".0"
    return s
