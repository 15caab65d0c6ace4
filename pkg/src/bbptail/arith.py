"""Numeric carriers: explicit-precision binary floats and exact rationals.

Approximate values are ``gmpy2.mpfr`` objects; each carries its own
``precision`` (in bits) and every elementary MPFR operation is correctly
rounded, so a single add/mul/div/sqrt/log/exp at precision ``p`` has
relative error at most ``2**(1 - p)``.  Exact values are
``fractions.Fraction``, which is always stored reduced with a positive
denominator.

Guard-bit convention used across the package: a routine that accumulates
``N`` terms for a target precision ``p`` works at ``guarded_bits(p, N)``.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from fractions import Fraction
from typing import Iterator, Union

import gmpy2
from gmpy2 import mpfr, mpq

PrecFloat = type(mpfr(0))
BigRational = Fraction

Real = Union[int, Fraction, "gmpy2.mpfr"]

MIN_BITS = 64
GUARD_BITS = 32

__all__ = [
    "BigRational",
    "MIN_BITS",
    "PrecFloat",
    "PrecisionError",
    "check_bits",
    "guarded_bits",
    "hex_digits_of_fraction",
    "negate",
    "to_precfloat",
    "working_precision",
]


class PrecisionError(ValueError):
    """Raised when a requested precision is below the supported minimum
    or insufficient for the requested output."""


def check_bits(bits: int) -> int:
    if not isinstance(bits, int) or isinstance(bits, bool):
        raise TypeError(f"bits must be an int, got {type(bits).__name__}")
    if bits < MIN_BITS:
        raise PrecisionError(f"bits must be >= {MIN_BITS}, got {bits}")
    return bits


def guarded_bits(bits: int, nterms: int = 1) -> int:
    """Working precision for summing ``nterms`` values to ``bits`` bits."""
    return bits + max(0, math.ceil(math.log2(max(1, nterms)))) + GUARD_BITS


@contextmanager
def working_precision(bits: int) -> Iterator[gmpy2.context]:
    """Thread-local MPFR context at ``bits`` bits, round-to-nearest."""
    with gmpy2.context(precision=bits) as ctx:
        yield ctx


def negate(x: PrecFloat) -> PrecFloat:
    """``-x`` at the precision of ``x`` (bare ``-x`` uses the ambient context)."""
    with working_precision(x.precision):
        return -x


def to_precfloat(x: Real, bits: int) -> PrecFloat:
    """Round ``x`` to a ``bits``-bit binary float (correctly rounded).

    Rationals go through MPFR's exact ``mpq`` conversion, so the relative
    error is at most ``2**(1 - bits)``; dyadic rationals that fit are exact.
    """
    check_bits(bits)
    if isinstance(x, Fraction):
        return mpfr(mpq(x.numerator, x.denominator), bits)
    if isinstance(x, int):
        return mpfr(mpq(x), bits)
    return mpfr(x, bits)


def hex_digits_of_fraction(x: PrecFloat, start: int, count: int) -> str:
    """Hex digits ``start .. start+count-1`` after the point of ``x`` in [0, 1).

    Position 0 is the first digit after the point.  The digits are those of
    the stored (already rounded) value, read by exact power-of-two scaling
    and truncation.
    """
    if start < 0 or count < 1:
        raise ValueError("need start >= 0 and count >= 1")
    if not (0 <= x < 1):
        raise ValueError(f"x must lie in [0, 1), got {x}")
    need = 4 * (start + count) + 64
    if x.precision < need:
        raise PrecisionError(
            f"{x.precision}-bit value cannot resolve hex digits up to "
            f"position {start + count - 1}; need >= {need} bits"
        )
    num, den = x.as_integer_ratio()
    scaled = (num << (4 * (start + count))) // den
    window = scaled % (16 ** count)
    return format(window, "X").rjust(count, "0")
