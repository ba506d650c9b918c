import math
from collections import Counter
from fractions import Fraction as Fr

import numpy as np
import pytest
from scipy import stats as sps

from ldmlab.exact_recursion import branch_distribution, enumerate_pdf, transition
from ldmlab.lambda_walk import (
    HAVE_NUMBA,
    draw_k,
    walk,
    walk_ensemble,
    walk_log_domain,
    _walk_python,
    _walk_uniforms,
)


class TestDrawK:
    def test_all_ones_distribution(self):
        # exact branch law at (1,1,1,1): 1/2, 1/4, 1/4
        rng = np.random.default_rng(2)
        draws = Counter(draw_k((1.0, 1.0, 1.0, 1.0), u) for u in rng.random(200000))
        expected = {k: float(p) for k, p in branch_distribution((1, 1, 1, 1))}
        for k, p in expected.items():
            sigma = math.sqrt(p * (1 - p) / 200000)
            assert abs(draws[k] / 200000 - p) < 4 * sigma

    def test_huge_first_entry_never_lands_first(self):
        lams = (1e15, 1.0, 1.0, 1.0)
        # P(k=1) = lam_m/(lam_1+lam_m) ~ 1e-15, so any ordinary u gives k >= 2
        for u in (1e-9, 0.3, 0.6, 0.99):
            assert draw_k(lams, u) >= 2
        # only the sliver u < ~1e-15 selects the first slot
        assert draw_k(lams, 0.0) == 1

    def test_frequencies_match_exact_probabilities_on_general_tuple(self):
        lams = (3.0, 2.0, 2.0, 1.0, 1.0)
        rng = np.random.default_rng(5)
        n_draws = 150000
        draws = Counter(draw_k(lams, u) for u in rng.random(n_draws))
        for k, p in branch_distribution((3, 2, 2, 1, 1)):
            p = float(p)
            sigma = math.sqrt(p * (1 - p) / n_draws)
            assert abs(draws[k] / n_draws - p) < 4 * sigma

    def test_too_short(self):
        with pytest.raises(ValueError):
            draw_k((1.0, 2.0), 0.5)


class TestWalk:
    def test_degenerate_sizes(self):
        assert walk(2, seed=0) == 1.0
        # both branches of (1,1,1) end at (2,1)
        for seed in range(5):
            assert walk(3, seed=seed) == 1.0

    def test_n4_support_and_frequencies(self):
        stats = walk_ensemble(4, 30000, seed=3, keep_samples=True)
        freqs = Counter(stats.samples)
        assert set(freqs) == {1.0, 2.0}
        p1 = freqs[1.0] / 30000
        sigma = math.sqrt((2 / 3) * (1 / 3) / 30000)
        assert abs(p1 - 2 / 3) < 4 * sigma
        assert abs(stats.mean_lambda2 - 4 / 3) < 4 * stats.stderr

    def test_n3_zero_variance(self):
        stats = walk_ensemble(3, 500, seed=1, keep_samples=True)
        assert stats.stderr == 0.0
        assert set(stats.samples) == {1.0}

    def test_chi_square_against_enumeration(self):
        trials = 60000
        for n in (5, 7, 8):
            exact = enumerate_pdf(n).coeffs
            stats = walk_ensemble(n, trials, seed=9 + n, keep_samples=True)
            observed = Counter(stats.samples)
            support = sorted(exact)
            assert set(observed) <= {float(k) for k in support}
            f_obs = [observed.get(float(k), 0) for k in support]
            f_exp = [float(exact[k]) * trials for k in support]
            res = sps.chisquare(f_obs, f_exp)
            assert res.pvalue > 1e-3, "n=%d pvalue %.4g" % (n, res.pvalue)

    def test_walk_reuses_transition(self):
        # drive the python walk and an explicit transition chain with the
        # same uniforms; they must agree exactly
        n, seed = 12, 31
        uniforms = _walk_uniforms(n, 1, seed)[0]
        lams = tuple([1.0] * n)
        for step in range(n - 2):
            k = draw_k(lams, uniforms[step])
            lams = transition(lams, k)
        assert _walk_python(n, uniforms) == lams[1]

    @pytest.mark.skipif(not HAVE_NUMBA, reason="needs the jitted kernel")
    def test_kernel_matches_python_bitwise(self):
        for n in (2, 3, 4, 9, 50):
            fast = walk_ensemble(n, 96, seed=13, keep_samples=True, use_numba=True)
            slow = walk_ensemble(n, 96, seed=13, keep_samples=True, use_numba=False)
            assert np.array_equal(fast.samples, slow.samples)

    def test_log_domain_agrees(self):
        n, seed = 32, 41
        uniforms = _walk_uniforms(n, 4, seed)
        for row in uniforms:
            linear = _walk_python(n, row)
            assert walk_log_domain(n, row) == pytest.approx(math.log(linear), abs=1e-9)

    def test_uniform_budget_is_one_per_step(self):
        assert _walk_uniforms(10, 1, 0).shape == (1, 8)

    def test_histogram_normalized(self):
        stats = walk_ensemble(16, 4000, seed=7)
        width = stats.hist_edges[1] - stats.hist_edges[0]
        assert math.fsum(stats.hist_density) * width == pytest.approx(1.0, abs=1e-9)

    def test_mean_converges_to_exact_value(self):
        # <lambda_2> at n=6 from the exact enumeration
        exact = float(sum(Fr(k) * p for k, p in enumerate_pdf(6).coeffs.items()))
        stats = walk_ensemble(6, 60000, seed=29)
        assert abs(stats.mean_lambda2 - exact) < 4 * stats.stderr
