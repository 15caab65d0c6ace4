import json
import subprocess
import sys
from fractions import Fraction

import pytest

from bbptail.cli import main, parse_poly, rational_str, run, sci


def report(argv, capsys):
    code = main(argv + ["--format", "report"])
    out = capsys.readouterr().out
    return code, json.loads(out), out


def as_float(s):
    return float(s)


class TestEval:
    def test_pi_all_routes(self, capsys):
        code, rep, _ = report(["eval", "pi", "--n", "1", "--route", "all", "--bits", "128"], capsys)
        assert code == 0 and rep["status"] == "ok"
        for r in ("bbp", "digamma", "integral", "reference"):
            assert rep["outputs"][r].startswith("-0.214601836")
        assert as_float(rep["outputs"]["max_discrepancy"]) <= as_float(rep["budgets"]["max_discrepancy"])

    def test_log2_bbp(self, capsys):
        code, rep, _ = report(["eval", "--constant", "log2", "--n", "1", "--route", "bbp"], capsys)
        assert code == 0
        assert rep["outputs"]["bbp"].startswith("0.693147180")

    def test_log2_all_routes(self, capsys):
        code, rep, _ = report(["eval", "log2", "--n", "3", "--route", "all"], capsys)
        assert code == 0
        assert "digamma" not in rep["outputs"]

    def test_log2_digamma_is_usage_error(self, capsys):
        code, rep, _ = report(["eval", "log2", "--n", "1", "--route", "digamma"], capsys)
        assert code == 2 and rep["status"] == "error"

    def test_low_bits(self, capsys):
        code, rep, _ = report(["eval", "pi", "--n", "1", "--bits", "63"], capsys)
        assert code == 2 and rep["status"] == "error"

    def test_bad_n(self, capsys):
        code, rep, _ = report(["eval", "pi", "--n", "0"], capsys)
        assert code == 2 and rep["status"] == "error"

    def test_missing_constant(self, capsys):
        code, rep, _ = report(["eval", "--n", "1"], capsys)
        assert code == 2

    def test_every_output_has_budget(self, capsys):
        _, rep, _ = report(["eval", "pi", "--n", "4", "--route", "all"], capsys)
        assert set(rep["outputs"]) == set(rep["budgets"])

    def test_text_format(self, capsys):
        assert main(["eval", "pi", "--n", "1"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("eval  [ok]")
        assert "-0.214601836" in out


class TestDigits:
    @pytest.mark.parametrize(
        "argv, digits, sign",
        [
            (["digits", "pi", "--n", "0", "--pos", "0"], "243F", "+"),
            (["digits", "pi", "--n", "1", "--pos", "0"], "36F0", "-"),
            (["digits", "log2", "--n", "1", "--pos", "0"], "B172", "+"),
            (["digits", "log2", "--n", "0", "--pos", "0"], "B172", "+"),
        ],
    )
    def test_examples(self, capsys, argv, digits, sign):
        code, rep, _ = report(argv, capsys)
        assert code == 0
        assert rep["outputs"]["digits"] == digits
        assert rep["outputs"]["sign"] == sign
        assert rep["budgets"]["sign"] == "exact"

    @pytest.mark.parametrize(
        "argv",
        [
            ["digits", "pi", "--count", "9"],
            ["digits", "pi", "--pos", "-1"],
            ["digits", "pi", "--n", "-2"],
        ],
    )
    def test_invalid(self, capsys, argv):
        code, rep, _ = report(argv, capsys)
        assert code == 2 and rep["status"] == "error"

    def test_bad_constant_rejected_by_parser(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["digits", "e"])
        assert exc.value.code == 2
        capsys.readouterr()


class TestVerify:
    def test_identities(self, capsys):
        code, rep, _ = report(["verify", "identities"], capsys)
        assert code == 0
        assert all(v == "pass" for v in rep["outputs"].values())
        assert all(v == "exact" for v in rep["budgets"].values())
        assert "mutations_rejected_P" in rep["outputs"]

    def test_lemmas(self, capsys):
        code, rep, _ = report(["verify", "--suite", "lemmas", "--n-max", "3"], capsys)
        assert code == 0
        for k, v in rep["outputs"].items():
            assert as_float(v) <= as_float(rep["budgets"][k])

    def test_oracles(self, capsys):
        code, rep, _ = report(["verify", "oracles", "--n-max", "4"], capsys)
        assert code == 0 and rep["status"] == "ok"
        assert {"pi[n=4]", "log2[n=4]"} <= set(rep["outputs"])

    def test_missing_suite(self, capsys):
        code, _, _ = report(["verify"], capsys)
        assert code == 2

    def test_bad_n_max(self, capsys):
        code, _, _ = report(["verify", "identities", "--n-max", "0"], capsys)
        assert code == 2


class TestLinearForm:
    @pytest.mark.parametrize(
        "poly, n, expected",
        [("1", 1, ("1/1", "-1/4", "0/1")), ("0,1", 1, ("1/2", "-1/4", "1/2")), ("1", 2, ("-2/3", "1/4", "0/1"))],
    )
    def test_examples(self, capsys, poly, n, expected):
        code, rep, _ = report(["linear-form", "--poly", poly, "--n", str(n)], capsys)
        assert code == 0
        out = rep["outputs"]
        assert (out["alpha"], out["beta"], out["gamma"]) == expected
        assert as_float(out["residual"]) <= as_float(rep["budgets"]["residual"])

    def test_parse_error(self, capsys):
        code, rep, _ = report(["linear-form", "--poly", "1,x/2", "--n", "1"], capsys)
        assert code == 2 and rep["status"] == "error"

    def test_zero_denominator(self, capsys):
        code, _, _ = report(["linear-form", "--poly", "1/0", "--n", "1"], capsys)
        assert code == 2

    def test_parse_poly(self):
        assert parse_poly(" 1, -1/2 ,3").coeffs == (1, Fraction(-1, 2), 3)


class TestReportFormat:
    def test_key_order(self, capsys):
        _, rep, _ = report(["eval", "pi", "--n", "2"], capsys)
        assert list(rep) == ["command", "inputs", "outputs", "budgets", "status"]

    @pytest.mark.parametrize(
        "argv",
        [
            ["eval", "pi", "--n", "3", "--route", "all"],
            ["digits", "log2", "--n", "2", "--pos", "100"],
            ["linear-form", "--poly", "1/3,2,-5", "--n", "2"],
        ],
    )
    def test_deterministic(self, capsys, argv):
        _, _, a = report(argv, capsys)
        _, _, b = report(argv, capsys)
        assert a == b

    def test_rational_str(self):
        assert rational_str(Fraction(3)) == "3/1"
        assert rational_str(Fraction(-6, 4)) == "-3/2"

    def test_sci_rounds_up(self):
        assert sci(0) == "0"
        assert sci(Fraction(1, 3), 3) == "3.34e-1"
        assert sci(1234567, 3) == "1.24e+6"

    def test_run_returns_format(self):
        rep, fmt = run(["verify", "identities", "--format", "report"])
        assert fmt == "report" and rep.exit_code == 0

    def test_module_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "bbptail", "digits", "pi", "--format", "report"],
            capture_output=True,
            text=True,
            check=False,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["outputs"]["digits"] == "243F"
