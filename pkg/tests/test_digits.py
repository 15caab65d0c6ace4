from fractions import Fraction

import gmpy2
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bbptail.digits import (
    MAX_COUNT,
    ChannelSpec,
    DigitResult,
    channel_series_exact,
    channels_for_pi,
    channels_for_tail,
    extract_digits,
    frac_channel,
    hex_digits_pi,
    hex_digits_tail,
    modpow16,
)
from bbptail.series import LOG2_TAIL, PI_TAIL, exact_partial_tail, reference_pi

from conftest import absdiff, oracle_digits

class TestChannels:
    def test_pi_channels(self):
        chans = channels_for_pi()
        assert [(c.offset, c.weight) for c in chans] == [(1, 4), (4, -2), (5, -1), (6, -1)]
        assert sum(Fraction(c.weight, c.offset) for c in chans) == Fraction(47, 15)

    def test_pi_channels_sum_to_pi(self):
        s = channel_series_exact(channels_for_pi(), 60)
        with gmpy2.context(precision=400):
            assert absdiff(s, reference_pi(400)) < Fraction(1, 10**70)

    @pytest.mark.parametrize("constant, table", [("pi", PI_TAIL), ("log2", LOG2_TAIL)])
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_tail_channels_match_brackets(self, constant, table, n):
        K = 30
        exact = exact_partial_tail(table, n, K)
        assert channel_series_exact(channels_for_tail(constant, n), K) == table.sign(n) * exact

    def test_unmerged_count(self):
        raw = channels_for_tail("pi", 2, merge=False)
        assert len(raw) == 24
        assert all(c.scale_pow16 == -1 for c in raw)

    @pytest.mark.parametrize("n", [1, 2, 5])
    def test_weights_per_q_cancel(self, n):
        # sum_j (-1)^j C(2n-1, j) = 0 for every q.
        raw = channels_for_tail("pi", n, merge=False)
        per_q = len(raw) // 6
        for i in range(0, len(raw), per_q):
            assert sum(c.weight for c in raw[i : i + per_q]) == 0

    def test_merged_equals_unmerged(self):
        K = 12
        for constant in ("pi", "log2"):
            a = channel_series_exact(channels_for_tail(constant, 4), K)
            b = channel_series_exact(channels_for_tail(constant, 4, merge=False), K)
            assert a == b

    def test_log2_channels_integral(self):
        chans = channels_for_tail("log2", 1)
        assert all(isinstance(c.weight, int) for c in chans)
        assert {c.scale_pow16 for c in chans} == {-1}

    def test_rejects_unknown_constant(self):
        with pytest.raises(ValueError):
            channels_for_tail("e", 1)

    def test_channel_spec_invariants(self):
        with pytest.raises(ValueError):
            ChannelSpec(0, 1)
        with pytest.raises(ValueError):
            ChannelSpec(3, 0)


class TestSpigot:
    @given(st.integers(0, 5000), st.integers(1, 10**6))
    def test_modpow16(self, e, m):
        assert modpow16(e, m) == (16**e) % m

    def test_frac_channel_c1_d0(self):
        # frac(sum_k 16^-k / (8k+1)) from a long exact partial sum.
        exact = sum(Fraction(1, (8 * k + 1) * 16**k) for k in range(80)) - 1
        got = frac_channel(1, 0)
        assert absdiff(got, exact) < Fraction(9, 2**128) + Fraction(2, 16**8)
        assert str(frac_channel(1, 0, tail_terms=30)).startswith("0.00718447641467622864")

    @pytest.mark.parametrize("c", [1, 4, 5, 6, 11])
    @pytest.mark.parametrize("d", [0, 7, 50])
    def test_frac_channel_against_exact(self, c, d):
        s = sum(Fraction(16**d, (8 * k + c) * 16**k) for k in range(d + 60))
        exact = s - (s.numerator // s.denominator)
        tail_terms = 30
        bound = Fraction(d + tail_terms + 1, 2**160) + Fraction(2, 16**tail_terms)
        assert absdiff(frac_channel(c, d, tail_terms=tail_terms, bits=160), exact) < bound

    def test_frac_channel_validation(self):
        with pytest.raises(ValueError):
            frac_channel(0, 0)
        with pytest.raises(ValueError):
            frac_channel(1, 0, tail_terms=0)


class TestExtraction:
    @pytest.mark.parametrize("d, expected", [(0, "243F"), (10, None), (1000, None)])
    def test_pi_digits(self, d, expected):
        res = hex_digits_pi(d, 4)
        assert res.digits == oracle_digits("pi", 0, d, 4)
        if expected:
            assert res.digits == expected
        assert not res.low_confidence

    def test_pi_known_prefix(self):
        assert hex_digits_pi(0, 8).digits == "243F6A88"

    @pytest.mark.parametrize(
        "constant, n", [("pi", 1), ("pi", 2), ("pi", 5), ("log2", 1), ("log2", 2), ("log2", 5)]
    )
    @pytest.mark.parametrize("d", [0, 10, 100, 1000])
    def test_tail_grid(self, constant, n, d):
        res = hex_digits_tail(constant, n, d, 4)
        assert res.digits == oracle_digits(constant, n, d, 4)
        assert not res.low_confidence

    def test_tail_signs(self):
        assert hex_digits_tail("pi", 1, 0, 4).sign == "-"
        assert hex_digits_tail("pi", 2, 0, 4).sign == "+"
        assert hex_digits_tail("log2", 1, 0, 4).sign == "+"
        assert hex_digits_tail("log2", 2, 0, 4).sign == "-"

    def test_pi_n1_prefix(self):
        assert hex_digits_tail("pi", 1, 0, 4).digits == "36F0"

    def test_log2_n1_is_log2(self):
        assert hex_digits_tail("log2", 1, 0, 4).digits == "B172"

    @pytest.mark.parametrize("constant, n", [("pi", 3), ("log2", 3)])
    def test_position_shift(self, constant, n):
        whole = hex_digits_tail(constant, n, 20, 4).digits
        parts = hex_digits_tail(constant, n, 20, 2).digits + hex_digits_tail(constant, n, 22, 2).digits
        assert whole == parts

    def test_reproducible(self):
        a = hex_digits_tail("pi", 4, 123, 6)
        b = hex_digits_tail("pi", 4, 123, 6)
        assert a == b

    def test_count_limits(self):
        with pytest.raises(ValueError):
            hex_digits_pi(0, MAX_COUNT + 1)
        with pytest.raises(ValueError):
            hex_digits_pi(0, 0)
        with pytest.raises(ValueError):
            hex_digits_pi(-1, 4)

    def test_no_channels(self):
        with pytest.raises(ValueError):
            extract_digits([], 0, 4)

    def test_low_confidence_flag(self):
        assert DigitResult("0000", 0, "+", 2.0**-30, 0.0).low_confidence
        assert DigitResult("0000", 0, "+", 0.01, 0.02).low_confidence
        assert not DigitResult("0000", 0, "+", 0.01, 1e-12).low_confidence
