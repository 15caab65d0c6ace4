"""Real digamma at arbitrary precision and the digamma route to ``R_n``.

``psi`` is evaluated by the upward recurrence ``psi(x) = psi(x+1) - 1/x``
until the argument clears a threshold, followed by the Bernoulli asymptotic
series

    psi(x) ~ ln x - 1/(2x) - sum_{k>=1} B_{2k} / (2k x^{2k}).

For real ``x > 0`` the remainder after any number of terms is bounded by
the first omitted term, which is what the truncation rule uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import gmpy2
from gmpy2 import mpfr, mpq

from .arith import PrecFloat, check_bits, guarded_bits, to_precfloat, working_precision
from .series import check_index

__all__ = [
    "DigammaConfig",
    "alt_sum_accelerated",
    "alt_sum_direct",
    "bernoulli_numbers",
    "digamma",
    "remainder_via_averaged_form",
    "remainder_via_digamma",
    "verify_gauss",
    "verify_lemma1",
]

MAX_BERNOULLI_TERMS = 2000


@dataclass(frozen=True)
class DigammaConfig:
    shift_threshold: float
    bernoulli_terms: int

    def __post_init__(self):
        if self.shift_threshold < 8:
            raise ValueError("shift_threshold must be >= 8")
        if self.bernoulli_terms < 4:
            raise ValueError("bernoulli_terms must be >= 4")

    @classmethod
    def for_bits(cls, bits: int) -> "DigammaConfig":
        # Asymptotic terms bottom out near exp(-2 pi x), so x >= 0.4 bits is
        # far past what a (bits + 8)-bit target needs.
        return cls(max(8, math.ceil(0.4 * bits)), MAX_BERNOULLI_TERMS)


@lru_cache(maxsize=None)
def _bernoulli_table(m_max: int) -> tuple[Fraction, ...]:
    b = [Fraction(1)]
    for m in range(1, m_max + 1):
        # sum_{k=0}^{m} C(m+1, k) B_k = 0
        s = sum((math.comb(m + 1, k) * b[k] for k in range(m)), Fraction(0))
        b.append(-s / (m + 1))
    return tuple(b)


def bernoulli_numbers(count: int) -> list[Fraction]:
    """``[B_0, B_1, ..., B_{2*count}]`` with ``B_1 = -1/2``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    # Reuse the largest cached table when it already covers the request.
    return list(_bernoulli_table(2 * count)[: 2 * count + 1])


def _even_bernoulli(k_max: int) -> tuple[Fraction, ...]:
    """``B_2, B_4, ..., B_{2 k_max}``, grown in blocks so the cache is reused."""
    block = 1 << max(4, (k_max - 1).bit_length())
    table = _bernoulli_table(2 * block)
    return tuple(table[2 * k] for k in range(1, k_max + 1))


def _as_mpfr(x, bits: int) -> PrecFloat:
    if isinstance(x, (int, Fraction)):
        return to_precfloat(Fraction(x), bits)
    return mpfr(x, bits)


def digamma(x, bits: int, config: DigammaConfig | None = None) -> PrecFloat:
    """``psi(x)`` for real ``x > 0``, absolute error <= ``2**(4-bits) * max(1, |psi(x)|)``.

    ``x`` may be an int, a Fraction or an mpfr; exact inputs are rounded once
    at the internal working precision.
    """
    check_bits(bits)
    if x <= 0:
        raise ValueError(f"digamma is only provided for x > 0, got {x}")
    cfg = config or DigammaConfig.for_bits(bits)
    nshift = max(0, math.ceil(cfg.shift_threshold - float(x)))
    work = guarded_bits(bits, nshift + 64)
    target = mpfr(2) ** (-bits - 8)

    with working_precision(work):
        z = _as_mpfr(x, work)
        shift_sum = mpfr(0)
        for i in range(nshift):
            shift_sum += 1 / (z + i)
        z = z + nshift
        inv2 = 1 / (z * z)
        result = gmpy2.log(z) - 1 / (2 * z)
        power = inv2
        evens = _even_bernoulli(32)
        k = 1
        while True:
            if k > cfg.bernoulli_terms:
                raise ArithmeticError(
                    f"digamma asymptotic series did not converge within {cfg.bernoulli_terms} terms"
                )
            if k > len(evens):
                evens = _even_bernoulli(2 * len(evens))
            b2k = evens[k - 1]
            term = mpq(b2k.numerator, b2k.denominator * 2 * k) * power
            if abs(term) < target:
                break
            result -= term
            power *= inv2
            k += 1
        result -= shift_sum
    return mpfr(result, bits)


def alt_sum_direct(z, terms: int, bits: int = 256) -> PrecFloat:
    """Partial sums of ``sum_t (-1)**t / (t + z)`` with the last two averaged.

    The averaged estimate is within ``1 / (2 (terms + z)**2)`` of the limit.
    Adequate as a coarse sanity check only.
    """
    if z <= 0:
        raise ValueError("z must be > 0")
    if terms < 1:
        raise ValueError("terms must be >= 1")
    work = guarded_bits(bits, terms)
    with working_precision(work):
        zf = _as_mpfr(z, work)
        s = mpfr(0)
        prev = s
        for t in range(terms):
            prev = s
            term = 1 / (t + zf)
            s = s + term if t % 2 == 0 else s - term
        est = s if terms == 1 else (s + prev) / 2
    return mpfr(est, bits)


def alt_sum_accelerated(z, bits: int) -> PrecFloat:
    """``sum_t (-1)**t / (t + z)`` via Cohen-Rodriguez Villegas-Zagier acceleration.

    The terms are moments ``int_0^1 x**t x**(z-1) dx`` of a positive measure,
    so ``N`` weighted terms are accurate to ``2 |S| / (3 + sqrt 8)**N``.
    Independent of ``digamma``.
    """
    check_bits(bits)
    if z <= 0:
        raise ValueError("z must be > 0")
    nterms = math.ceil((bits + 16) / math.log2(3 + math.sqrt(8))) + 2
    work = guarded_bits(bits, nterms)
    with working_precision(work):
        zf = _as_mpfr(z, work)
        d = (3 + gmpy2.sqrt(mpfr(8))) ** nterms
        d = (d + 1 / d) / 2
        b = mpfr(-1)
        c = -d
        s = mpfr(0)
        for k in range(nterms):
            c = b - c
            s += c / (k + zf)
            b = b * (k + nterms) * (k - nterms) / ((k + mpfr(0.5)) * (k + 1))
        result = s / d
    return mpfr(result, bits)


def verify_lemma1(z, bits: int) -> PrecFloat:
    """``|sum_t (-1)**t/(t+z) - (psi((z+1)/2) - psi(z/2))/2|``."""
    check_bits(bits)
    if z <= 0:
        raise ValueError("z must be > 0")
    work = bits + 16
    lhs = alt_sum_accelerated(z, work)
    if isinstance(z, (int, Fraction)):
        z = Fraction(z)
        a, b = (z + 1) / 2, z / 2
    else:
        with working_precision(work):
            zf = mpfr(z, work)
            a, b = (zf + 1) / 2, zf / 2
    with working_precision(work):
        rhs = (digamma(a, work) - digamma(b, work)) / 2
        return mpfr(abs(lhs - rhs), 64)


def verify_gauss(m: int, z, bits: int) -> PrecFloat:
    """``|psi(m z) - (1/m) sum_{r<m} psi(z + r/m) - log m|``."""
    check_bits(bits)
    if m < 1:
        raise ValueError("m must be >= 1")
    if z <= 0:
        raise ValueError("z must be > 0")
    work = bits + 16
    exact = isinstance(z, (int, Fraction))
    with working_precision(work):
        if exact:
            z = Fraction(z)
            lhs = digamma(m * z, work)
            shifted = [digamma(z + Fraction(r, m), work) for r in range(m)]
        else:
            zf = mpfr(z, work)
            lhs = digamma(zf * m, work)
            shifted = [digamma(zf + mpq(r, m), work) for r in range(m)]
        rhs = sum(shifted, mpfr(0)) / m + gmpy2.log(mpfr(m))
        return mpfr(abs(lhs - rhs), 64)


def remainder_via_digamma(n: int, bits: int) -> PrecFloat:
    """``R_n = (-1)**n / 4 * (psi((2n+3)/4) - psi((2n+1)/4))``."""
    check_index(n)
    check_bits(bits)
    work = bits + 16
    with working_precision(work):
        diff = digamma(Fraction(2 * n + 3, 4), work) - digamma(Fraction(2 * n + 1, 4), work)
        value = diff / 4 if n % 2 == 0 else -diff / 4
    return mpfr(value, bits)


def remainder_via_averaged_form(n: int, bits: int) -> PrecFloat:
    """``R_n = (-1)**n / 32 * sum_{r<8} [psi((2n+3)/32 + r/8) - psi((2n+1)/32 + r/8)]``."""
    check_index(n)
    check_bits(bits)
    work = guarded_bits(bits, 16)
    with working_precision(work):
        total = mpfr(0)
        for r in range(8):
            total += digamma(Fraction(2 * n + 3, 32) + Fraction(r, 8), work)
            total -= digamma(Fraction(2 * n + 1, 32) + Fraction(r, 8), work)
        value = total / 32 if n % 2 == 0 else -total / 32
    return mpfr(value, bits)


def digamma_route_budget(n: int, bits: int) -> PrecFloat:
    """Error bound of ``remainder_via_digamma`` from the per-call digamma bound."""
    with gmpy2.context(precision=64, round=gmpy2.RoundUp):
        # |psi| at these arguments stays below 1 + ln(n + 1).
        psi_mag = 1 + gmpy2.log(mpfr(n + 1))
        per_call = mpfr(2) ** (4 - (bits + 16)) * psi_mag
        return per_call / 2 + mpfr(2) ** (1 - bits)
