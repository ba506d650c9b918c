import math

import mpmath as mp
import pytest

from ldmlab import fibonacci_model
from ldmlab._util import ln_big
from ldmlab.fibonacci_model import (
    boundary_unroll,
    dyadic_targets,
    fib_kk,
    fib_scaling_curve,
    fib_sequence,
    genfun_check,
)

A033485_PREFIX = [1, 2, 3, 5, 7, 10, 13, 18, 23, 30, 37, 47, 57, 70, 83, 101]


class TestSequence:
    def test_known_prefix(self):
        assert fib_sequence(16)[1:] == A033485_PREFIX

    def test_examples(self):
        assert fib_kk(1) == 1
        assert fib_kk(2) == 2
        assert fib_kk(4) == 5
        assert fib_kk(8) == 18

    def test_defining_relation(self):
        F = fib_sequence(500)
        for n in range(2, 501):
            assert F[n] - F[n - 1] == F[n // 2]

    def test_window_matches_full_table(self):
        F = fib_sequence(3000)
        for n in (1, 2, 3, 17, 256, 999, 3000):
            assert fib_kk(n) == F[n]

    def test_strictly_increasing(self):
        F = fib_sequence(2000)
        assert all(F[n] > F[n - 1] for n in range(2, 2001))

    def test_growth_ratio_trends_to_one(self):
        # F(n)/F(n-1) = 1 + F(n/2)/F(n-1) decays along dyadic samples,
        # consistent with sub-exponential n^(c ln n) growth
        F = fib_sequence(1 << 14)
        ratios = [F[n] / F[n - 1] for n in (1 << 4, 1 << 6, 1 << 8, 1 << 10, 1 << 12, 1 << 14)]
        assert all(a >= b for a, b in zip(ratios, ratios[1:]))
        assert ratios[-1] < 1.01

    def test_memory_guard(self, monkeypatch):
        monkeypatch.setattr(fibonacci_model, "MEMORY_BUDGET_BYTES", 10_000)
        with pytest.raises(MemoryError, match="feasible"):
            fib_kk(10**6)


class TestBoundaryUnroll:
    def test_examples(self):
        assert boundary_unroll(1) == 1
        assert boundary_unroll(2) == 2
        assert boundary_unroll(8) == 18
        assert boundary_unroll(8) == fib_kk(8)

    def test_identity_sample(self):
        F = fib_sequence(2000)
        for n in range(1, 2001, 7):
            assert boundary_unroll(n) == F[n]


class TestGeneratingFunction:
    def test_small_order_exact(self):
        report = genfun_check(16)
        assert report.ok

    def test_specific_coefficients(self):
        F = fib_sequence(8)
        assert F[1] == 1
        assert F[8] == 18

    def test_mid_order(self):
        assert genfun_check(512).ok

    def test_order_cap(self):
        with pytest.raises(ValueError):
            genfun_check(5000)


class TestScalingCurve:
    def test_value_at_n8(self):
        (_, lnF, scaled), = fib_scaling_curve([8])
        assert lnF == pytest.approx(math.log(18), rel=1e-12)
        assert scaled == pytest.approx(math.log(18 * 9) / math.log(8) ** 2, rel=1e-12)

    def test_monotone_decrease_toward_the_scaling_constant(self):
        # strictly decreasing over the desk-scale dyadic range, starting
        # above 1/(2 ln 2) and ending below it (the curve crosses the
        # asymptotic constant on its way to the large-n dip)
        ns = [2**k for k in range(3, 21)]
        curve = fib_scaling_curve(ns)
        vals = [sc for _, _, sc in curve]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        c = 1 / (2 * math.log(2))
        assert vals[0] > c
        assert vals[-1] < c

    def test_positive_log(self):
        assert all(lnF > 0 for _, lnF, _ in fib_scaling_curve([2, 5, 100]))

    def test_dyadic_targets(self):
        assert dyadic_targets(64) == [2, 4, 8, 16, 32, 64]


class TestLnBig:
    def test_matches_math_log_in_range(self):
        for v in (5, 12345, 2**52 + 7, 10**15):
            assert ln_big(v) == pytest.approx(math.log(v), rel=1e-13)

    def test_beyond_float_range(self):
        x = 7**800  # ~2246 bits, far beyond float
        assert ln_big(x) == pytest.approx(float(800 * mp.log(7)), rel=1e-13)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            ln_big(0)
