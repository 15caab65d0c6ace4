"""Exact polynomials over Q and the algebraic identities behind the tail series.

Rational-function identities are checked in cross-multiplied form, so each
check reduces to comparing coefficient lists of two polynomials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .series import LOG2_TAIL, PI_TAIL, BBPWeightTable, check_index, pochhammer_rising

__all__ = [
    "PartialFractionExpansion",
    "RationalPoly",
    "U",
    "absorption_chain_holds",
    "audit_partial_fractions",
    "core_identity_log2_holds",
    "core_identity_pi_holds",
    "pochhammer_partial_fractions",
    "poly_from_weights",
    "sophie_germain_holds",
    "verify_absorption_chain",
    "verify_core_identity_log2",
    "verify_core_identity_pi",
    "verify_sophie_germain",
]


class RationalPoly:
    """Dense polynomial with ``Fraction`` coefficients, lowest degree first.

    Trailing zeros are stripped on construction, so equal polynomials have
    equal coefficient tuples.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def monomial(cls, degree: int, coeff=1) -> "RationalPoly":
        return cls([0] * degree + [coeff])

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, i: int) -> Fraction:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = RationalPoly([other])
        if not isinstance(other, RationalPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"RationalPoly({[str(c) for c in self.coeffs]})"

    def __str__(self):
        if self.is_zero():
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "" if i == 0 else ("u" if i == 1 else f"u^{i}")
            if mono and abs(c) == 1:
                parts.append(("-" if c < 0 else "+") + mono)
            else:
                parts.append(f"{'-' if c < 0 else '+'}{abs(c)}{mono}")
        return " ".join(parts).lstrip("+")

    @staticmethod
    def _coerce(x) -> "RationalPoly":
        return x if isinstance(x, RationalPoly) else RationalPoly([x])

    def __add__(self, other):
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return RationalPoly(self.coeff(i) + other.coeff(i) for i in range(n))

    __radd__ = __add__

    def __neg__(self):
        return RationalPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        if self.is_zero() or other.is_zero():
            return RationalPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return RationalPoly(out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative powers are not polynomials")
        result, base = RationalPoly([1]), self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __call__(self, x):
        """Horner evaluation; ``x`` may be a number or another polynomial
        (composition)."""
        acc = RationalPoly() if isinstance(x, RationalPoly) else Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc


U = RationalPoly([0, 1])


def poly_from_weights(table: BBPWeightTable) -> RationalPoly:
    """``P(u) = sum_q K(q) u**(q-1)``."""
    out = [Fraction(0)] * 8
    for q, w in table.entries:
        out[q - 1] += w
    return RationalPoly(out)


# ``1 - u**8/16``: the generating-function denominator of the 16**-k sums.
GEOMETRIC_DENOM = 1 - Fraction(1, 16) * U**8
SG_PLUS = U**2 + 2 * U + 2
SG_MINUS = U**2 - 2 * U + 2


def sophie_germain_holds(left: RationalPoly = SG_PLUS, right: RationalPoly = SG_MINUS) -> bool:
    return left * right == U**4 + 4


def verify_sophie_germain() -> bool:
    """``(u^2 + 2u + 2)(u^2 - 2u + 2) = u^4 + 4``."""
    return sophie_germain_holds()


def core_identity_pi_holds(p: RationalPoly) -> bool:
    """``p / (1 - u^8/16) == -4 (u-1)(u^2+2u+2) / (1 + u^4/4)``, cross-multiplied."""
    lhs = p * (1 + Fraction(1, 4) * U**4)
    rhs = -4 * (U - 1) * SG_PLUS * GEOMETRIC_DENOM
    return lhs == rhs


def verify_core_identity_pi() -> bool:
    return core_identity_pi_holds(poly_from_weights(PI_TAIL))


def core_identity_log2_holds(p: RationalPoly) -> bool:
    """``p / (1 - u^8/16) == 2 / (u^2 - 2u + 2)``, cross-multiplied."""
    return p * SG_MINUS == 2 * GEOMETRIC_DENOM


def verify_core_identity_log2() -> bool:
    return core_identity_log2_holds(poly_from_weights(LOG2_TAIL))


def absorption_chain_holds(kernel: RationalPoly = SG_MINUS) -> bool:
    # -4(u-1)(u^2+2u+2)/(1+u^4/4) == -4(u-1) * 4/kernel, cross-multiplied,
    # and the kernel is (u-1)^2 + 1 so that v = 1-u gives 1 + v^2.
    lin = -4 * (U - 1)
    lhs = lin * SG_PLUS * kernel
    rhs = lin * 4 * (1 + Fraction(1, 4) * U**4)
    v = 1 - U
    return lhs == rhs and kernel == (U - 1) ** 2 + 1 and kernel(v) == 1 + U**2


def verify_absorption_chain() -> bool:
    """The step from the core identity to ``(1-u)^{2n} / ((u-1)^2 + 1)``."""
    return absorption_chain_holds()


@dataclass(frozen=True)
class PartialFractionExpansion:
    """``1/(x+q)_{2n} = sum_j c_j / (x+q+j)``."""

    n: int
    q: int
    terms: tuple[tuple[int, Fraction], ...]

    def __call__(self, x) -> Fraction:
        x = Fraction(x)
        return sum((c / (x + self.q + j) for j, c in self.terms), Fraction(0))

    def integer_weights(self) -> list[int]:
        """``(2n-1)! * c_j``, which equals ``(-1)**j * C(2n-1, j)``."""
        f = math.factorial(2 * self.n - 1)
        out = []
        for _, c in self.terms:
            w = f * c
            if w.denominator != 1:
                raise ArithmeticError("scaled residue is not an integer")
            out.append(int(w))
        return out


def _audit_points(count: int) -> list[Fraction]:
    # Nonnegative and non-integer-mixed points; x + q + j > 0 avoids every pole.
    base = [Fraction(1), Fraction(1, 2), Fraction(17), Fraction(101, 7)]
    extra = [Fraction(3 * i + 2, i + 3) + i for i in range(max(0, count - len(base)))]
    return (base + extra)[:count]


def pochhammer_partial_fractions(q: int, n: int, audit: bool = True) -> PartialFractionExpansion:
    """Residues ``c_j = (-1)**j / (j! (2n-1-j)!)`` of ``1/(x+q)_{2n}``.

    With ``audit`` the expansion is compared against ``pochhammer_rising`` at
    ``2n+1`` points, which pins down a rational function of this degree.
    """
    check_index(n)
    if q < 1:
        raise ValueError("q must be >= 1")
    m = 2 * n
    terms = tuple(
        (j, Fraction((-1) ** j, math.factorial(j) * math.factorial(m - 1 - j))) for j in range(m)
    )
    pf = PartialFractionExpansion(n, q, terms)
    if audit:
        for x in _audit_points(m + 1):
            if pf(x) != 1 / pochhammer_rising(x + q, m):
                raise ArithmeticError(f"partial fractions disagree at x={x}")
    return pf


def audit_partial_fractions(pf: PartialFractionExpansion, points: Sequence[Fraction]) -> bool:
    m = 2 * pf.n
    return all(pf(x) == 1 / pochhammer_rising(x + pf.q, m) for x in points)
