"""Partial sums, remainders and the base-16 tail series.

Two tails are covered:

* ``R_n  = pi/4 - S_n``, ``S_n = sum_{m<n} (-1)**m / (2m+1)``
* ``R'_n = log 2 - S'_n``, ``S'_n = sum_{1<=k<n} (-1)**(k-1) / k``

Both are expressed as ``prefactor(n) * sum_k 16**-k * sum_q K(q) / (8k+q)_{2n}``
with a fixed weight table ``K``.

Truncation bound
----------------
Let ``T(k) = |prefactor(n)| * 16**-k * sum_q |K(q)| / (8k+q)_{2n}``.  By the
triangle inequality ``|bracket_term(k)| <= T(k)``.  The rising factorial
``(8k+q)_{2n}`` is increasing in ``k``, so for ``k >= K``::

    T(k) <= 16**-(k-K) * T(K)

and the omitted mass is at most ``T(K) * 16/15``.  The same argument gives
``T(k+1) / T(k) < 1/16`` for every ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr, mpq

from .arith import PrecFloat, check_bits, guarded_bits, to_precfloat, working_precision

__all__ = [
    "BBPWeightTable",
    "EvalReport",
    "LOG2_TAIL",
    "PI_TAIL",
    "bbp_tail",
    "bbp_tail_log2",
    "bbp_tail_pi",
    "bracket_term",
    "exact_partial_tail",
    "partial_sum_alt_harmonic",
    "partial_sum_alt_harmonic_exact",
    "partial_sum_mgl",
    "partial_sum_mgl_exact",
    "pochhammer_rising",
    "reference_log2",
    "reference_pi",
    "s_qn_series",
    "term_bound",
    "truncation_bound",
]

# Pochhammer products computed incrementally are re-derived from scratch
# at every AUDIT_STRIDE-th index.
AUDIT_STRIDE = 16
EXACT_CHECK_MAX_N = 8
EXACT_CHECK_MAX_TERMS = 30


def check_index(n: int) -> int:
    if not isinstance(n, int) or isinstance(n, bool):
        raise TypeError(f"tail index must be an int, got {type(n).__name__}")
    if n < 1:
        raise ValueError(f"tail index must be >= 1, got {n}")
    return n


@dataclass(frozen=True)
class BBPWeightTable:
    """Weights ``K(q)`` on offsets ``q`` in 1..8 plus the tail prefactor.

    The prefactor at index ``n`` is
    ``(-1)**(n + sign_shift) * global_scale * (2n-1)!``.
    """

    name: str
    entries: tuple[tuple[int, Fraction], ...]
    global_scale: Fraction
    sign_shift: int

    def __post_init__(self):
        offsets = [q for q, _ in self.entries]
        if len(set(offsets)) != len(offsets):
            raise ValueError("offsets must be distinct")
        if any(not 1 <= q <= 8 for q in offsets):
            raise ValueError("offsets must lie in 1..8")

    @property
    def sign_rule(self) -> str:
        return "(-1)^n" if self.sign_shift % 2 == 0 else "(-1)^(n-1)"

    def sign(self, n: int) -> int:
        return -1 if (n + self.sign_shift) % 2 else 1

    def prefactor(self, n: int) -> Fraction:
        return self.sign(n) * self.global_scale * math.factorial(2 * n - 1)

    def weight(self, q: int) -> Fraction:
        return dict(self.entries).get(q, Fraction(0))


def _table(name, weights, scale, sign_shift) -> BBPWeightTable:
    entries = tuple((q, Fraction(w)) for q, w in sorted(weights.items()))
    return BBPWeightTable(name, entries, Fraction(scale), sign_shift)


PI_TAIL = _table("pi", {1: 8, 3: -4, 4: -4, 5: -2, 7: 1, 8: 1}, Fraction(1, 16), 0)
LOG2_TAIL = _table(
    "log2",
    {1: 1, 2: 1, 3: Fraction(1, 2), 5: Fraction(-1, 4), 6: Fraction(-1, 4), 7: Fraction(-1, 8)},
    1,
    1,
)


@dataclass(frozen=True)
class EvalReport:
    """Value of a tail together with rigorous bounds on its error.

    ``truncation_bound`` covers the omitted series terms, ``rounding_bound``
    the floating-point accumulation and the final rounding.
    """

    value: PrecFloat
    terms_used: int
    truncation_bound: PrecFloat
    rounding_bound: PrecFloat
    route: str

    @property
    def error_bound(self) -> PrecFloat:
        with gmpy2.context(precision=64, round=gmpy2.RoundUp):
            return self.truncation_bound + self.rounding_bound


def pochhammer_rising(a, m: int) -> Fraction:
    """Rising factorial ``a (a+1) ... (a+m-1)``; ``(a)_0 = 1``."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    a = Fraction(a)
    result = Fraction(1)
    for i in range(m):
        result *= a + i
    return result


def _int_pochhammer(a: int, m: int) -> int:
    return math.prod(range(a, a + m))


def partial_sum_mgl_exact(n: int) -> Fraction:
    check_index(n)
    return sum((Fraction((-1) ** m, 2 * m + 1) for m in range(n)), Fraction(0))


def partial_sum_mgl(n: int, bits: int) -> PrecFloat:
    """``S_n = 1 - 1/3 + ... + (-1)**(n-1)/(2n-1)``, summed exactly then rounded."""
    return to_precfloat(partial_sum_mgl_exact(n), bits)


def partial_sum_alt_harmonic_exact(n: int) -> Fraction:
    check_index(n)
    return sum((Fraction((-1) ** (k - 1), k) for k in range(1, n)), Fraction(0))


def partial_sum_alt_harmonic(n: int, bits: int) -> PrecFloat:
    """``S'_n = sum_{k=1}^{n-1} (-1)**(k-1)/k``; ``S'_1 = 0``."""
    return to_precfloat(partial_sum_alt_harmonic_exact(n), bits)


def _round_up(x, bits: int = 64) -> PrecFloat:
    if isinstance(x, Fraction):
        x = mpq(x.numerator, x.denominator)
    with gmpy2.context(precision=bits, round=gmpy2.RoundUp):
        return mpfr(x)


def reference_pi(bits: int) -> PrecFloat:
    """pi from the classic base-16 series, total error below ``2**(4-bits)``.

    Every bracket ``4/(8k+1) - 2/(8k+4) - 1/(8k+5) - 1/(8k+6)`` lies in
    (0, 8), so stopping after ``K`` terms leaves less than
    ``8 * 16**-K * 16/15``.
    """
    check_bits(bits)
    nterms = (bits + 8) // 4 + 2
    work = guarded_bits(bits, nterms)
    with working_precision(work):
        total = mpfr(0)
        for k in range(nterms):
            c = 8 * k
            bracket = (
                Fraction(4, c + 1) - Fraction(2, c + 4) - Fraction(1, c + 5) - Fraction(1, c + 6)
            ) / 16**k
            total += mpq(bracket.numerator, bracket.denominator)
    return mpfr(total, bits)


def reference_log2(bits: int) -> PrecFloat:
    """log 2 as ``sum_{k>=1} 1/(k 2**k)``; the tail after ``K`` terms is
    below ``2**-K``."""
    check_bits(bits)
    nterms = bits + 8
    work = guarded_bits(bits, nterms)
    with working_precision(work):
        total = mpfr(0)
        for k in range(1, nterms + 1):
            total += mpq(1, k << k)
    return mpfr(total, bits)


def bracket_term(table: BBPWeightTable, k: int, n: int) -> Fraction:
    """Exact term ``k`` of the full tail series, prefactors included."""
    check_index(n)
    if k < 0:
        raise ValueError("k must be nonnegative")
    inner = sum(
        (w / _int_pochhammer(8 * k + q, 2 * n) for q, w in table.entries), Fraction(0)
    )
    return table.prefactor(n) * inner / 16**k


def term_bound(table: BBPWeightTable, k: int, n: int) -> Fraction:
    """``T(k)``: absolute-weight majorant of ``|bracket_term(table, k, n)|``."""
    check_index(n)
    inner = sum(
        (abs(w) / _int_pochhammer(8 * k + q, 2 * n) for q, w in table.entries), Fraction(0)
    )
    return abs(table.prefactor(n)) * inner / 16**k


def truncation_bound(table: BBPWeightTable, n: int, K: int) -> Fraction:
    """Upper bound on ``sum_{k>=K} |bracket_term(table, k, n)|``.

    Equal to ``T(K) * 16/15``; see the module docstring for the proof.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    return term_bound(table, K, n) * Fraction(16, 15)


class _PochhammerStepper:
    """Integer ``(8k+q)_{2n}`` for k = 0, 1, ... updated in O(1) big-int ops.

    Uses ``(a+8)_m = (a)_m * (a+m)_8 / (a)_8`` (exact division).
    """

    def __init__(self, q: int, n: int):
        self.q, self.m = q, 2 * n
        self.k = 0
        self.value = _int_pochhammer(q, self.m)

    def advance(self) -> int:
        a = 8 * self.k + self.q
        self.value = self.value * _int_pochhammer(a + self.m, 8) // _int_pochhammer(a, 8)
        self.k += 1
        if self.k % AUDIT_STRIDE == 0:
            expected = pochhammer_rising(8 * self.k + self.q, self.m)
            if expected != self.value:
                raise ArithmeticError(
                    f"incremental Pochhammer mismatch at k={self.k}, q={self.q}"
                )
        return self.value


def bbp_tail(table: BBPWeightTable, n: int, bits: int, route: str = "bbp") -> EvalReport:
    """Sum the base-16 tail series for ``table`` at index ``n``.

    Stops at the first ``K`` with
    ``truncation_bound(K) <= 2**(-bits-8) * max(|partial sum|, 2**-bits)``.
    """
    check_index(n)
    check_bits(bits)
    # Terms shrink by at least 16x, so bits/4 + a few terms always suffice.
    nmax = bits // 4 + 8
    work = guarded_bits(bits, nmax)
    pref = table.prefactor(n)
    steppers = [(_PochhammerStepper(q, n), w) for q, w in table.entries]
    abs_weights = [abs(w) for _, w in table.entries]
    threshold = mpfr(2) ** (-bits - 8)
    floor_mag = mpfr(2) ** (-bits)
    majorant_sum = Fraction(0)

    with working_precision(work):
        acc = mpfr(0)
        k = 0
        while True:
            power = 16**k
            for step, w in steppers:
                t = pref * w / (step.value * power)
                acc += mpq(t.numerator, t.denominator)
            majorant_sum += sum(
                (aw / step.value for (step, _), aw in zip(steppers, abs_weights)), Fraction(0)
            ) * abs(pref) / power
            k += 1
            for step, _ in steppers:
                step.advance()
            tail = (
                sum((aw / step.value for (step, _), aw in zip(steppers, abs_weights)), Fraction(0))
                * abs(pref)
                / (16**k)
                * Fraction(16, 15)
            )
            tail_f = _round_up(tail)
            if tail_f <= threshold * max(abs(acc), floor_mag):
                break
            if k > 4 * nmax:
                raise ArithmeticError("tail series failed to reach its stopping rule")

    value = mpfr(acc, bits)
    # Each of the 6k term conversions and additions costs at most 2**(1-work)
    # relative to a quantity bounded by the majorant sum.
    nops = len(steppers) * k * 2
    with gmpy2.context(precision=64, round=gmpy2.RoundUp):
        rounding = mpfr(mpq(majorant_sum.numerator, majorant_sum.denominator)) * nops
        rounding = rounding * mpfr(2) ** (1 - work) + abs(mpfr(value)) * mpfr(2) ** (1 - bits)
    report = EvalReport(value, k, tail_f, rounding, route)

    if n <= EXACT_CHECK_MAX_N and k <= EXACT_CHECK_MAX_TERMS:
        exact = sum((bracket_term(table, j, n) for j in range(k)), Fraction(0))
        with working_precision(work):
            drift = abs(to_precfloat(exact, work) - value)
        if drift > report.rounding_bound:
            raise ArithmeticError(
                f"float accumulation drifted {drift} from the exact partial sum"
            )
    return report


def bbp_tail_pi(n: int, bits: int) -> EvalReport:
    """``R_n = pi/4 - S_n`` from the base-16 tail series."""
    return bbp_tail(PI_TAIL, n, bits)


def bbp_tail_log2(n: int, bits: int) -> EvalReport:
    """``R'_n = log 2 - S'_n`` from the base-16 tail series."""
    return bbp_tail(LOG2_TAIL, n, bits)


def s_qn_series(q: int, n: int, bits: int) -> PrecFloat:
    """Direct series ``sum_k 16**-k / (8k+q)_{2n}`` to about ``bits`` bits."""
    check_index(n)
    check_bits(bits)
    if q < 1:
        raise ValueError("q must be >= 1")
    nterms = bits // 4 + 4
    work = guarded_bits(bits, nterms)
    step = _PochhammerStepper(q, n)
    with working_precision(work):
        total = mpfr(0)
        for k in range(nterms):
            total += mpq(1, step.value * 16**k)
            step.advance()
    return mpfr(total, bits)


def exact_partial_tail(table: BBPWeightTable, n: int, K: int) -> Fraction:
    """``sum_{k<=K} bracket_term(table, k, n)`` in exact arithmetic."""
    return sum((bracket_term(table, k, n) for k in range(K + 1)), Fraction(0))

