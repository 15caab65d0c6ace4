"""Hex digit extraction for pi and for the tails ``R_n`` and ``R'_n``.

Every series handled here is reduced to integer-weighted channels

    |x| = 16**scale_pow16 * sum_c w_c * sum_{k>=0} 16**-k / (8k + c)

and digit ``d`` onward is read from ``frac(16**d * |x|)``.  Each channel is a
classic BBP spigot: terms with ``k <= D`` use ``pow(16, D-k, 8k+c)`` and only
the fractional part is kept, later terms are summed directly.  All of it is
fixed-point integer arithmetic.

For the tails the Pochhammer denominators are split by partial fractions,
``(2n-1)! / (8k+q)_{2n} = sum_j (-1)**j C(2n-1, j) / (8k+q+j)``, so channel
offsets run up to ``2n + 7``.  The sign of the tail is reported separately;
digits always describe ``|x|``.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from gmpy2 import mpfr, mpq

from .series import LOG2_TAIL, PI_TAIL, BBPWeightTable, check_index

__all__ = [
    "ChannelSpec",
    "DigitResult",
    "LOW_CONFIDENCE_MARGIN",
    "MAX_COUNT",
    "channel_series_exact",
    "channels_for_pi",
    "channels_for_tail",
    "extract_digits",
    "frac_channel",
    "hex_digits_pi",
    "hex_digits_tail",
    "modpow16",
]

MAX_COUNT = 8
LOW_CONFIDENCE_MARGIN = 2.0**-20
MIN_FRACTION_BITS = 96
DEFAULT_TAIL_TERMS = 8

TABLES = {"pi": PI_TAIL, "log2": LOG2_TAIL}


@dataclass(frozen=True, order=True)
class ChannelSpec:
    offset: int
    weight: int
    scale_pow16: int = 0

    def __post_init__(self):
        if self.offset < 1:
            raise ValueError("channel offset must be >= 1")
        if self.weight == 0:
            raise ValueError("channel weight must be nonzero")


@dataclass(frozen=True)
class DigitResult:
    digits: str
    position: int
    sign: str
    confidence_margin: float
    error_bound: float

    @property
    def low_confidence(self) -> bool:
        return (
            self.confidence_margin < LOW_CONFIDENCE_MARGIN
            or self.confidence_margin <= self.error_bound
        )


def modpow16(e: int, m: int) -> int:
    """``16**e mod m``."""
    return pow(16, e, m)


def channels_for_pi() -> list[ChannelSpec]:
    """pi = sum_k 16**-k (4/(8k+1) - 2/(8k+4) - 1/(8k+5) - 1/(8k+6))."""
    return [ChannelSpec(1, 4), ChannelSpec(4, -2), ChannelSpec(5, -1), ChannelSpec(6, -1)]


def _integer_scaling(table: BBPWeightTable) -> tuple[dict[int, int], int]:
    """Smallest ``s >= 0`` making ``K(q) * global_scale * 16**s`` integral."""
    for s in range(0, 16):
        scaled = {q: w * table.global_scale * 16**s for q, w in table.entries}
        if all(v.denominator == 1 for v in scaled.values()):
            return {q: int(v) for q, v in scaled.items()}, -s
    raise ValueError(f"weights of {table.name!r} have a non-dyadic denominator")


def channels_for_tail(constant: str, n: int, merge: bool = True) -> list[ChannelSpec]:
    """Integer channels whose combination is ``|R_n|`` (pi) or ``|R'_n|`` (log2).

    With ``merge`` the channels sharing an offset are combined and zero
    weights dropped; otherwise one channel per ``(q, j)`` pair is returned.
    """
    table = _table(constant)
    check_index(n)
    weights, scale = _integer_scaling(table)
    raw = []
    for q, wq in weights.items():
        for j in range(2 * n):
            raw.append((q + j, wq * (-1) ** j * math.comb(2 * n - 1, j)))
    if not merge:
        return [ChannelSpec(c, w, scale) for c, w in raw]
    merged: dict[int, int] = defaultdict(int)
    for c, w in raw:
        merged[c] += w
    return sorted(ChannelSpec(c, w, scale) for c, w in merged.items() if w)


def _table(constant: str) -> BBPWeightTable:
    try:
        return TABLES[constant]
    except KeyError:
        raise ValueError(f"constant must be one of {sorted(TABLES)}, got {constant!r}") from None


def _channel_fixed(c: int, D: int, tail_terms: int, fbits: int) -> tuple[int, int]:
    """``floor``-accumulated ``frac(sum_k 16**(D-k)/(8k+c)) * 2**fbits``.

    Returns the fixed-point value and the number of truncated terms, each of
    which is low by less than one unit.
    """
    one = 1 << fbits
    acc = 0
    for k in range(0, D + 1):
        m = 8 * k + c
        acc += (pow(16, D - k, m) << fbits) // m
    start = max(0, D + 1)
    for k in range(start, D + tail_terms + 1):
        shift = fbits - 4 * (k - D)
        if shift < 0:
            break
        acc += (1 << shift) // (8 * k + c)
    nterms = max(0, D + 1) + (D + tail_terms + 1 - start)
    return acc % one, nterms


def frac_channel(c: int, d: int, tail_terms: int = DEFAULT_TAIL_TERMS, bits: int = 128) -> mpfr:
    """Fractional part of ``sum_{k>=0} 16**(d-k) / (8k+c)``.

    Absolute error below ``(d + tail_terms + 1) * 2**-bits + 2 * 16**-tail_terms``.
    """
    if c < 1:
        raise ValueError("c must be >= 1")
    if tail_terms < 1:
        raise ValueError("tail_terms must be >= 1")
    fixed, _ = _channel_fixed(c, d, tail_terms, bits)
    return mpfr(mpq(fixed, 1 << bits), bits)


def _plan(channels: Sequence[ChannelSpec], d: int, count: int) -> tuple[int, int]:
    """Fraction bits and tail length for a combined extraction."""
    wsum = sum(abs(ch.weight) for ch in channels)
    need = max(MIN_FRACTION_BITS, 4 * count + 64)
    nterms = d + 64 + need // 4
    fbits = need + math.ceil(math.log2(max(2, wsum * nterms))) + 3 + 8
    tail_terms = fbits // 4 + 2
    return fbits, tail_terms


def extract_digits(
    channels: Sequence[ChannelSpec], d: int, count: int, sign: str = "+"
) -> DigitResult:
    """Hex digits ``d .. d+count-1`` of ``16**scale * sum_c w_c * S_c``."""
    if d < 0:
        raise ValueError("position must be nonnegative")
    if not 1 <= count <= MAX_COUNT:
        raise ValueError(f"count must be in 1..{MAX_COUNT}, got {count}")
    if not channels:
        raise ValueError("no channels")
    fbits, tail_terms = _plan(channels, d, count)
    one = 1 << fbits
    total = 0
    err_units = 0
    # Fixed reduction order keeps the result reproducible.
    for ch in sorted(channels):
        D = d + ch.scale_pow16
        fixed, nterms = _channel_fixed(ch.offset, D, tail_terms, fbits)
        total += ch.weight * fixed
        # Truncation of each term (< 1 unit) plus the neglected tail
        # (< 2 * 16**-tail_terms, i.e. < 1 unit at this tail length).
        err_units += abs(ch.weight) * (nterms + 1)
    frac = total % one

    scaled = frac << (4 * count)
    window = scaled >> fbits
    digits = format(window, "X").rjust(count, "0")
    rem = Fraction(scaled & (one - 1), one)
    margin = float(min(rem, 1 - rem))
    error = float(Fraction(err_units << (4 * count), one))
    return DigitResult(digits, d, sign, margin, error)


def hex_digits_pi(d: int, count: int) -> DigitResult:
    """Hex digits of pi after the point, starting at position ``d``."""
    return extract_digits(channels_for_pi(), d, count)


def hex_digits_tail(constant: str, n: int, d: int, count: int) -> DigitResult:
    """Hex digits of ``|R_n|`` (``constant='pi'``) or ``|R'_n|`` (``'log2'``)."""
    table = _table(constant)
    check_index(n)
    sign = "+" if table.sign(n) > 0 else "-"
    return extract_digits(channels_for_tail(constant, n), d, count, sign)


def channel_series_exact(channels: Sequence[ChannelSpec], K: int) -> Fraction:
    """``sum_c w_c 16**scale sum_{k<=K} 16**-k/(8k+c)`` in exact arithmetic."""
    total = Fraction(0)
    for ch in channels:
        s = sum((Fraction(1, (8 * k + ch.offset) * 16**k) for k in range(K + 1)), Fraction(0))
        total += ch.weight * s * Fraction(16) ** ch.scale_pow16
    return total
