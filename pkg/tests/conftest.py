import gmpy2

from bbptail.arith import hex_digits_of_fraction, to_precfloat
from bbptail.series import bbp_tail_log2, bbp_tail_pi, reference_pi

# (criterion, passed, detail) rows filled by the acceptance suite.
ACCEPTANCE = []


def absdiff(a, b, bits=1024):
    """|a - b| evaluated well above the precision of either operand."""
    with gmpy2.context(precision=bits):
        return abs(to_precfloat(a, bits) - to_precfloat(b, bits))


def oracle_digits(constant, n, d, count):
    """Hex digits of pi - 3 (n = 0) or of a tail, read off a high-precision float."""
    bits = 4 * (d + count) + 256
    if constant == "pi" and n == 0:
        with gmpy2.context(precision=bits):
            x = reference_pi(bits) - 3
    else:
        tail = bbp_tail_pi if constant == "pi" else bbp_tail_log2
        x = tail(n, bits).value
        with gmpy2.context(precision=bits):
            x = abs(x)
    return hex_digits_of_fraction(x, d, count)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
