"""Command-line front end.

Subcommands: ``eval``, ``digits``, ``verify`` and ``linear-form``.  Each run
produces a :class:`RunReport`, printed as text or (``--format report``) as a
single JSON document with a fixed key order.

Exit codes: 0 ok, 1 verification failure or low confidence, 2 usage error,
3 numeric failure (quadrature non-convergence, or low confidence with
``--strict``).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import gmpy2
from gmpy2 import mpfr

from . import digamma as dg
from . import digits as dx
from . import poly, quadrature, series
from .arith import PrecisionError, check_bits, to_precfloat, working_precision

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

DEFAULT_BITS = 256
DEFAULT_N_MAX = 10
ROUTES_PI = ("bbp", "digamma", "integral", "reference")
ROUTES_LOG2 = ("bbp", "integral", "reference")


class UsageError(ValueError):
    pass


@dataclass
class RunReport:
    command: str
    inputs: dict[str, Any]
    outputs: dict[str, Any] = field(default_factory=dict)
    budgets: dict[str, str] = field(default_factory=dict)
    status: str = "ok"
    exit_code: int = EXIT_OK

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "budgets": self.budgets,
            "status": self.status,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text(self) -> str:
        lines = [f"{self.command}  [{self.status}]"]
        for k, v in self.inputs.items():
            lines.append(f"  input   {k:<22} {v}")
        for k, v in self.outputs.items():
            bound = self.budgets.get(k)
            suffix = f"   (+/- {bound})" if bound and bound != "exact" else (
                "   (exact)" if bound == "exact" else ""
            )
            lines.append(f"  output  {k:<22} {_text_value(v)}{suffix}")
        return "\n".join(lines)


def _text_value(v) -> str:
    if isinstance(v, dict):
        return ", ".join(f"{k}={x}" for k, x in v.items())
    if isinstance(v, list):
        return ", ".join(map(str, v))
    return str(v)


def sci(x, sig: int = 6) -> str:
    """Scientific-notation string of a nonnegative bound, rounded upward."""
    with gmpy2.context(precision=64, round=gmpy2.RoundUp):
        x = mpfr(x)
        if x == 0:
            return "0"
        mant, exp, _ = x.digits(10, sig)
    neg = mant.startswith("-")
    mant = mant.lstrip("-")
    return f"{'-' if neg else ''}{mant[0]}.{mant[1:]}e{exp - 1:+d}"


def decimal_str(x, bits: int) -> str:
    places = max(1, int((bits - 4) * math.log10(2)))
    return f"{x:.{places}f}"


def rational_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _ulp_budget(value, bits: int):
    with gmpy2.context(precision=64, round=gmpy2.RoundUp):
        return abs(mpfr(value)) * mpfr(2) ** (1 - bits)


def _add_up(*xs):
    with gmpy2.context(precision=64, round=gmpy2.RoundUp):
        total = mpfr(0)
        for x in xs:
            total += mpfr(x)
        return total


def _check_n(n: int, allow_zero: bool = False) -> None:
    if n < (0 if allow_zero else 1):
        raise UsageError(f"--n must be >= {0 if allow_zero else 1}, got {n}")


def _check_bits(bits: int) -> None:
    try:
        check_bits(bits)
    except PrecisionError as exc:
        raise UsageError(str(exc)) from None


# -- route evaluation ------------------------------------------------------


def evaluate_route(constant: str, n: int, bits: int, route: str):
    """Return ``(value, budget)`` for one route."""
    work = bits + 16
    if route == "bbp":
        rep = series.bbp_tail_pi(n, bits) if constant == "pi" else series.bbp_tail_log2(n, bits)
        return rep.value, rep.error_bound
    if route == "reference":
        with working_precision(work):
            if constant == "pi":
                full = series.reference_pi(work) / 4
                head = series.partial_sum_mgl(n, work)
            else:
                full = series.reference_log2(work)
                head = series.partial_sum_alt_harmonic(n, work)
            value = full - head
        value = mpfr(value, bits)
        # reference error 2**(4-work) (divided by 4 for pi) + head and
        # subtraction roundings + final rounding.
        with gmpy2.context(precision=64, round=gmpy2.RoundUp):
            budget = mpfr(2) ** (4 - work) + 2 * mpfr(2) ** (1 - work)
        return value, _add_up(budget, _ulp_budget(value, bits))
    if route == "integral":
        if constant == "pi":
            res = quadrature.remainder_via_integral(n, bits)
        else:
            res = quadrature.log2_tail_via_integral(n, bits)
        with gmpy2.context(precision=64, round=gmpy2.RoundUp):
            floor = mpfr(2) ** (4 - bits)
        return res.value, _add_up(res.agreement, floor, _ulp_budget(res.value, bits))
    if route == "digamma":
        if constant != "pi":
            raise UsageError("the digamma route is only available for --constant pi")
        value = dg.remainder_via_digamma(n, bits)
        return value, _add_up(dg.digamma_route_budget(n, bits), _ulp_budget(value, bits))
    if route == "averaged":
        if constant != "pi":
            raise UsageError("the averaged digamma route is only available for --constant pi")
        value = dg.remainder_via_averaged_form(n, bits)
        return value, _add_up(4 * dg.digamma_route_budget(n, bits), _ulp_budget(value, bits))
    raise UsageError(f"unknown route {route!r}")


def _max_discrepancy(values: dict[str, Any], budgets: dict[str, Any], bits: int):
    """Largest pairwise gap and whether each gap is within its pair's budget."""
    worst = mpfr(0)
    ok = True
    names = list(values)
    with working_precision(bits + 16):
        for i, a in enumerate(names):
            for b in names[i + 1 :]:
                gap = abs(values[a] - values[b])
                worst = max(worst, gap)
                if gap > _add_up(budgets[a], budgets[b]):
                    ok = False
        worst = mpfr(worst, 64)
    return worst, ok


# -- commands --------------------------------------------------------------


def cmd_eval(constant: str, n: int, bits: int = DEFAULT_BITS, route: str = "bbp") -> RunReport:
    report = RunReport("eval", {"constant": constant, "n": n, "bits": bits, "route": route})
    _check_constant(constant)
    _check_n(n)
    _check_bits(bits)
    if route == "all":
        routes = ROUTES_PI if constant == "pi" else ROUTES_LOG2
    else:
        routes = (route,)
    values, budgets = {}, {}
    for r in routes:
        values[r], budgets[r] = evaluate_route(constant, n, bits, r)
        report.outputs[r] = decimal_str(values[r], bits)
        report.budgets[r] = sci(budgets[r])
    if len(routes) > 1:
        worst, ok = _max_discrepancy(values, budgets, bits)
        report.outputs["max_discrepancy"] = sci(worst)
        report.budgets["max_discrepancy"] = sci(_add_up(*budgets.values()))
        if not ok:
            report.status = "error"
            report.exit_code = EXIT_FAILED
    return report


def _check_constant(constant: str) -> None:
    if constant not in ("pi", "log2"):
        raise UsageError(f"--constant must be pi or log2, got {constant!r}")


def cmd_digits(constant: str, n: int, pos: int, count: int = 4, strict: bool = False) -> RunReport:
    report = RunReport("digits", {"constant": constant, "n": n, "pos": pos, "count": count})
    _check_constant(constant)
    _check_n(n, allow_zero=True)
    if pos < 0:
        raise UsageError("--pos must be >= 0")
    if not 1 <= count <= dx.MAX_COUNT:
        raise UsageError(f"--count must be in 1..{dx.MAX_COUNT}")
    if constant == "pi" and n == 0:
        res = dx.hex_digits_pi(pos, count)
    else:
        # log 2 itself is the n = 1 tail.
        res = dx.hex_digits_tail(constant, max(n, 1), pos, count)
    report.outputs = {
        "digits": res.digits,
        "sign": res.sign,
        "position": res.position,
        "confidence_margin": f"{res.confidence_margin:.6e}",
    }
    report.budgets = {
        "digits": f"{res.error_bound:.6e}",
        "sign": "exact",
        "position": "exact",
        "confidence_margin": f"{res.error_bound:.6e}",
    }
    if res.low_confidence:
        report.status = "low_confidence"
        report.exit_code = EXIT_NUMERIC if strict else EXIT_FAILED
    return report


LEMMA1_POINTS = (
    Fraction(1, 4),
    Fraction(1, 2),
    Fraction(1),
    Fraction(3, 2),
    Fraction(17, 2),
    Fraction(101, 2),
)
GAUSS_MULTIPLIERS = (1, 2, 3, 4, 8)


def gauss_points(n_max: int) -> list[Fraction]:
    """Arguments ``(2n+3)/32`` and ``(2n+1)/32`` of the m = 8 averaged form."""
    pts = []
    for n in range(1, n_max + 1):
        pts += [Fraction(2 * n + 3, 32), Fraction(2 * n + 1, 32)]
    return sorted(set(pts))


def _mutation_checks() -> dict[str, bool]:
    """Every +/-1 perturbation of a coefficient of P or P' must be rejected."""
    out = {}
    for label, base, check in (
        ("P", poly.poly_from_weights(series.PI_TAIL), poly.core_identity_pi_holds),
        ("P'", poly.poly_from_weights(series.LOG2_TAIL), poly.core_identity_log2_holds),
    ):
        rejected = True
        for i in range(8):
            for delta in (1, -1):
                if check(base + poly.RationalPoly.monomial(i, delta)):
                    rejected = False
        out[f"mutations_rejected_{label}"] = rejected
    return out


def _verify_identities(report: RunReport) -> list[str]:
    checks = {
        "sophie_germain": poly.verify_sophie_germain(),
        "core_identity_pi": poly.verify_core_identity_pi(),
        "core_identity_log2": poly.verify_core_identity_log2(),
        "absorption_chain": poly.verify_absorption_chain(),
    }
    checks.update(_mutation_checks())
    for name, passed in checks.items():
        report.outputs[name] = "pass" if passed else "fail"
        report.budgets[name] = "exact"
    return [name for name, passed in checks.items() if not passed]


def _verify_lemmas(report: RunReport, n_max: int, bits: int) -> list[str]:
    failed = []
    bound = mpfr(2) ** (8 - bits)
    for z in LEMMA1_POINTS:
        name = f"lemma1[z={z}]"
        r = dg.verify_lemma1(z, bits)
        report.outputs[name] = sci(r)
        report.budgets[name] = sci(bound)
        if r > bound:
            failed.append(name)
    for m in GAUSS_MULTIPLIERS:
        for z in gauss_points(n_max):
            name = f"gauss[m={m},z={z}]"
            r = dg.verify_gauss(m, z, bits)
            report.outputs[name] = sci(r)
            report.budgets[name] = sci(bound)
            if r > bound:
                failed.append(name)
    return failed


def _verify_oracles(report: RunReport, n_max: int, bits: int) -> list[str]:
    failed = []
    for constant, routes in (("pi", ROUTES_PI + ("averaged",)), ("log2", ROUTES_LOG2)):
        for n in range(1, n_max + 1):
            values, budgets = {}, {}
            for r in routes:
                values[r], budgets[r] = evaluate_route(constant, n, bits, r)
            worst, ok = _max_discrepancy(values, budgets, bits)
            name = f"{constant}[n={n}]"
            report.outputs[name] = sci(worst)
            report.budgets[name] = sci(_add_up(*budgets.values()))
            if not ok:
                failed.append(name)
    return failed


def cmd_verify(suite: str, n_max: int = DEFAULT_N_MAX, bits: int = DEFAULT_BITS) -> RunReport:
    report = RunReport("verify", {"suite": suite, "n_max": n_max, "bits": bits})
    if n_max < 1:
        raise UsageError("--n-max must be >= 1")
    _check_bits(bits)
    if suite == "identities":
        failed = _verify_identities(report)
    elif suite == "lemmas":
        failed = _verify_lemmas(report, n_max, bits)
    elif suite == "oracles":
        failed = _verify_oracles(report, n_max, bits)
    else:
        raise UsageError(f"unknown suite {suite!r}")
    if failed:
        report.status = "error"
        report.exit_code = EXIT_FAILED
        report.outputs["failed"] = failed
    return report


def parse_poly(text: str) -> poly.RationalPoly:
    """Comma-separated rationals, lowest degree first (``"1,-1/2,3"``)."""
    try:
        coeffs = [Fraction(tok.strip()) for tok in text.split(",")]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot parse polynomial {text!r}: {exc}") from None
    return poly.RationalPoly(coeffs)


def cmd_linear_form(poly_text: str, n: int, bits: int = DEFAULT_BITS) -> RunReport:
    report = RunReport("linear-form", {"poly": poly_text, "n": n, "bits": bits})
    Q = parse_poly(poly_text)
    _check_n(n)
    _check_bits(bits)
    triple = quadrature.linear_form(Q, n)
    value = triple.evaluate(bits)
    quad = quadrature.quad01(quadrature.linear_form_integrand(Q, n), bits)
    with working_precision(bits + 16):
        residual = mpfr(abs(value - quad.value), 64)
    with gmpy2.context(precision=64, round=gmpy2.RoundUp):
        scale = 1 + abs(mpfr(to_precfloat(triple.alpha, 64))) + 4 * abs(
            mpfr(to_precfloat(triple.beta, 64))
        ) + abs(mpfr(to_precfloat(triple.gamma, 64)))
        value_budget = scale * mpfr(2) ** (4 - bits)
        residual_budget = value_budget + quad.agreement + mpfr(2) ** (4 - bits)
    report.outputs = {
        "alpha": rational_str(triple.alpha),
        "beta": rational_str(triple.beta),
        "gamma": rational_str(triple.gamma),
        "value": decimal_str(value, bits),
        "quadrature": decimal_str(quad.value, bits),
        "residual": sci(residual),
    }
    report.budgets = {
        "alpha": "exact",
        "beta": "exact",
        "gamma": "exact",
        "value": sci(value_budget),
        "quadrature": sci(_add_up(quad.agreement, mpfr(2) ** (4 - bits))),
        "residual": sci(residual_budget),
    }
    if residual > residual_budget:
        report.status = "error"
        report.exit_code = EXIT_FAILED
    return report


# -- argument parsing ------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bbptail",
        description="Base-16 tail series for pi/4 and log 2: evaluation, "
        "digit extraction and cross-route verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, constant=True):
        if constant:
            p.add_argument("constant_pos", nargs="?", choices=("pi", "log2"), metavar="CONSTANT")
            p.add_argument("--constant", choices=("pi", "log2"))
        p.add_argument("--format", choices=("text", "report"), default="text")
        p.add_argument("--strict", action="store_true")

    p = sub.add_parser("eval", help="evaluate R_n or R'_n by one or all routes")
    common(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--bits", type=int, default=DEFAULT_BITS)
    p.add_argument("--route", choices=ROUTES_PI + ("averaged", "all"), default="bbp")

    p = sub.add_parser("digits", help="hex digits of pi, log 2 or a tail")
    common(p)
    p.add_argument("--n", type=int, default=0, help="0 for the constant itself")
    p.add_argument("--pos", type=int, default=0)
    p.add_argument("--count", type=int, default=4)

    p = sub.add_parser("verify", help="run a verification suite")
    common(p, constant=False)
    p.add_argument("suite_pos", nargs="?", choices=("identities", "lemmas", "oracles"), metavar="SUITE")
    p.add_argument("--suite", choices=("identities", "lemmas", "oracles"))
    p.add_argument("--n-max", type=int, default=DEFAULT_N_MAX)
    p.add_argument("--bits", type=int, default=DEFAULT_BITS)

    p = sub.add_parser("linear-form", help="exact alpha + beta*pi + gamma*log2 for a polynomial Q")
    common(p, constant=False)
    p.add_argument("--poly", required=True, help="comma-separated rationals, constant term first")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--bits", type=int, default=DEFAULT_BITS)
    return parser


def _dispatch(args) -> tuple[str, dict, Callable[[], RunReport]]:
    if args.command in ("eval", "digits"):
        constant = args.constant or args.constant_pos
        if constant is None:
            raise UsageError("a constant (pi or log2) is required")
        if args.command == "eval":
            inputs = {"constant": constant, "n": args.n, "bits": args.bits, "route": args.route}
            return "eval", inputs, lambda: cmd_eval(constant, args.n, args.bits, args.route)
        inputs = {"constant": constant, "n": args.n, "pos": args.pos, "count": args.count}
        return "digits", inputs, lambda: cmd_digits(constant, args.n, args.pos, args.count, args.strict)
    if args.command == "verify":
        suite = args.suite or args.suite_pos
        if suite is None:
            raise UsageError("a suite (identities, lemmas, oracles) is required")
        inputs = {"suite": suite, "n_max": args.n_max, "bits": args.bits}
        return "verify", inputs, lambda: cmd_verify(suite, args.n_max, args.bits)
    inputs = {"poly": args.poly, "n": args.n, "bits": args.bits}
    return "linear-form", inputs, lambda: cmd_linear_form(args.poly, args.n, args.bits)


def run(argv: list[str] | None = None) -> tuple[RunReport, str]:
    """Parse ``argv`` and execute; returns the report and the output format.

    Malformed command lines are rejected by argparse itself (exit status 2).
    """
    args = build_parser().parse_args(argv)
    command, inputs = args.command, {}
    try:
        command, inputs, thunk = _dispatch(args)
        report = thunk()
    except (UsageError, PrecisionError, ValueError, TypeError) as exc:
        report = RunReport(command, inputs, {"error": str(exc)}, {}, "error", EXIT_USAGE)
    except ArithmeticError as exc:
        report = RunReport(command, inputs, {"error": str(exc)}, {}, "error", EXIT_NUMERIC)
    return report, args.format


def main(argv: list[str] | None = None) -> int:
    report, fmt = run(argv)
    print(report.to_json() if fmt == "report" else report.to_text())
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
