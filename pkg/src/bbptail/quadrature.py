"""Integral routes: tanh-sinh quadrature on (0, 1) and exact moment integrals.

Quadrature values are oracles: the reported ``agreement`` is the difference
between the last two mesh levels, a heuristic rather than a proof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import gmpy2
from gmpy2 import mpfr, mpq

from .arith import (
    PrecFloat,
    check_bits,
    guarded_bits,
    negate,
    to_precfloat,
    working_precision,
)
from .poly import U, RationalPoly
from .series import check_index, reference_log2, reference_pi

__all__ = [
    "MomentTriple",
    "QuadResult",
    "QuadratureConfig",
    "QuadratureError",
    "linear_form",
    "linear_form_integrand",
    "log2_tail_via_integral",
    "moment_exact",
    "quad01",
    "remainder_via_integral",
    "s_qn_via_integral",
]


class QuadratureError(ArithmeticError):
    """Successive mesh levels failed to agree before ``max_level``."""


@dataclass(frozen=True)
class QuadratureConfig:
    max_level: int = 12
    target_eps: float | None = None  # None: 2**-(bits - 4)

    def __post_init__(self):
        if self.max_level < 5:
            raise ValueError("max_level must be >= 5")
        if self.target_eps is not None and not self.target_eps > 0:
            raise ValueError("target_eps must be positive")


@dataclass(frozen=True)
class QuadResult:
    value: PrecFloat
    agreement: PrecFloat
    level: int


START_LEVEL = 3


@lru_cache(maxsize=64)
def _new_nodes(level: int, work: int) -> tuple[tuple[PrecFloat, PrecFloat, PrecFloat], ...]:
    """Nodes first appearing at ``level`` (all of them at level 0).

    Each entry is ``(t, small, weight)`` for ``t >= 0`` where
    ``small = 1 - u(t) = u(-t)`` and ``weight`` excludes the mesh width.
    """
    with working_precision(work):
        pi = gmpy2.const_pi()
        # Beyond t_max the weights fall under 2**-(work + 8).
        t_max = math.asinh((work + 8) / (math.pi * math.log2(math.e))) + 0.5
        h = mpfr(2) ** (-level)
        count = int(t_max * 2**level) + 1
        out = []
        for j in range(0, count + 1):
            if level > 0 and j % 2 == 0:
                continue
            t = j * h
            e = gmpy2.exp(pi * gmpy2.sinh(t))
            small = 1 / (1 + e)
            weight = pi * gmpy2.cosh(t) * small * (1 - small)
            out.append((t, small, weight))
    return tuple(out)


def quad01(
    f: Callable[[PrecFloat], PrecFloat],
    bits: int,
    cfg: QuadratureConfig | None = None,
) -> QuadResult:
    """Integrate ``f`` over (0, 1) by tanh-sinh with level doubling.

    ``f`` is called inside a working-precision context with an ``mpfr``
    argument.  Stops once two successive levels agree within the target.
    """
    check_bits(bits)
    cfg = cfg or QuadratureConfig()
    work = guarded_bits(bits, 1 << 16)
    target = cfg.target_eps if cfg.target_eps is not None else mpfr(2) ** (4 - bits)

    def level_sum(level: int) -> PrecFloat:
        s = mpfr(0)
        for t, small, w in _new_nodes(level, work):
            if t == 0:
                s += w * f(small)
            else:
                s += w * (f(small) + f(1 - small))
        return s

    with working_precision(work):
        acc = mpfr(0)
        for level in range(0, START_LEVEL + 1):
            acc += level_sum(level)
        prev = acc * mpfr(2) ** (-START_LEVEL)
        agreement = None
        for level in range(START_LEVEL + 1, cfg.max_level + 1):
            acc += level_sum(level)
            # u(t) maps the real line onto (0, 1) with du/dt = weight.
            estimate = acc * mpfr(2) ** (-level)
            agreement = abs(estimate - prev)
            prev = estimate
            if agreement <= target * max(1, abs(estimate)):
                return QuadResult(mpfr(estimate, bits), mpfr(agreement, 64), level)
    raise QuadratureError(
        f"tanh-sinh levels still differ by {agreement} at max_level={cfg.max_level}"
    )


def s_qn_via_integral(q: int, n: int, bits: int, cfg: QuadratureConfig | None = None) -> QuadResult:
    """``(1/(2n-1)!) int_0^1 u^(q-1) (1-u)^(2n-1) / (1 - u^8/16) du``."""
    check_index(n)
    if q < 1:
        raise ValueError("q must be >= 1")

    def f(u):
        return u ** (q - 1) * (1 - u) ** (2 * n - 1) / (1 - u**8 / 16)

    res = quad01(f, bits + 8, cfg)
    fact = math.factorial(2 * n - 1)
    with working_precision(bits + 8):
        value = res.value / fact
        agreement = res.agreement / fact
    return QuadResult(mpfr(value, bits), mpfr(agreement, 64), res.level)


def remainder_via_integral(n: int, bits: int, cfg: QuadratureConfig | None = None) -> QuadResult:
    """``R_n = (-1)**n int_0^1 v^(2n) / (1 + v^2) dv``."""
    check_index(n)
    res = quad01(lambda v: v ** (2 * n) / (1 + v * v), bits, cfg)
    value = res.value if n % 2 == 0 else negate(res.value)
    return QuadResult(value, res.agreement, res.level)


def log2_tail_via_integral(n: int, bits: int, cfg: QuadratureConfig | None = None) -> QuadResult:
    """``R'_n = (-1)**(n-1) int_0^1 2 v^(2n-1) / (1 + v^2) dv``."""
    check_index(n)
    res = quad01(lambda v: 2 * v ** (2 * n - 1) / (1 + v * v), bits, cfg)
    value = res.value if n % 2 == 1 else negate(res.value)
    return QuadResult(value, res.agreement, res.level)


@dataclass(frozen=True)
class MomentTriple:
    """Exact ``alpha + beta*pi + gamma*log 2``."""

    alpha: Fraction
    beta: Fraction
    gamma: Fraction

    def __add__(self, other: "MomentTriple") -> "MomentTriple":
        return MomentTriple(self.alpha + other.alpha, self.beta + other.beta, self.gamma + other.gamma)

    def __sub__(self, other: "MomentTriple") -> "MomentTriple":
        return self + other.scale(-1)

    def scale(self, c) -> "MomentTriple":
        c = Fraction(c)
        return MomentTriple(c * self.alpha, c * self.beta, c * self.gamma)

    def as_tuple(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.alpha, self.beta, self.gamma)

    def evaluate(self, bits: int) -> PrecFloat:
        work = bits + 16
        pi = reference_pi(work)
        log2 = reference_log2(work)
        with working_precision(work):
            total = (
                to_precfloat(self.alpha, work)
                + to_precfloat(self.beta, work) * pi
                + to_precfloat(self.gamma, work) * log2
            )
        return mpfr(total, bits)


ZERO_TRIPLE = MomentTriple(Fraction(0), Fraction(0), Fraction(0))


@lru_cache(maxsize=None)
def moment_exact(m: int) -> MomentTriple:
    """``J_m = int_0^1 x^m / (1 + x^2) dx`` as an exact triple.

    ``J_0 = pi/4``, ``J_1 = log(2)/2`` and ``J_m = 1/(m-1) - J_{m-2}``.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m == 0:
        return MomentTriple(Fraction(0), Fraction(1, 4), Fraction(0))
    if m == 1:
        return MomentTriple(Fraction(0), Fraction(0), Fraction(1, 2))
    # Fill from below so deep requests never hit the recursion limit.
    for j in range(2, m):
        moment_exact(j)
    prev = moment_exact(m - 2)
    return MomentTriple(Fraction(1, m - 1) - prev.alpha, -prev.beta, -prev.gamma)


def _integrand_poly(Q: RationalPoly, n: int) -> RationalPoly:
    return Q(1 - U) * RationalPoly.monomial(2 * n)


def linear_form(Q: RationalPoly, n: int) -> MomentTriple:
    """Exact ``int_0^1 Q(1-x) x^(2n) / (1 + x^2) dx``."""
    check_index(n)
    total = ZERO_TRIPLE
    for i, c in enumerate(_integrand_poly(Q, n).coeffs):
        if c:
            total = total + moment_exact(i).scale(c)
    return total


def linear_form_integrand(Q: RationalPoly, n: int) -> Callable[[PrecFloat], PrecFloat]:
    coeffs = [mpq(c.numerator, c.denominator) for c in Q.coeffs]

    def f(x):
        v = 1 - x
        acc = mpfr(0)
        for c in reversed(coeffs):
            acc = acc * v + c
        return acc * x ** (2 * n) / (1 + x * x)

    return f
