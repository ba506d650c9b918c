from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from ldmlab.core_ldm import SimConfig, sample_mean_ldm
from ldmlab.exact_recursion import (
    ExpMixture,
    branch_distribution,
    branch_probability,
    enumerate_pdf,
    mean_uniform_scale,
    mixture_mean,
    transition,
)
from ldmlab.lambda_walk import sample_final_difference

lam_tuples = st.lists(st.integers(min_value=1, max_value=9), min_size=3, max_size=7).map(tuple)


class TestBranchProbability:
    def test_all_ones_examples(self):
        assert branch_probability((1, 1, 1, 1), 1) == Fr(1, 2)
        assert branch_probability((1, 1, 1, 1), 3) == Fr(1, 4)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            branch_probability((1, 1, 1), 0)
        with pytest.raises(ValueError):
            branch_probability((1, 1, 1), 3)

    @given(lam_tuples)
    @settings(max_examples=100, deadline=None)
    def test_probabilities_sum_to_one_exactly(self, lams):
        dist = branch_distribution(lams)
        assert sum(p for _, p in dist) == 1
        assert all(p >= 0 for _, p in dist)
        for k, p in dist:
            assert branch_probability(lams, k) == p


class TestTransition:
    def test_examples(self):
        assert transition((1, 1, 1, 1), 1) == (2, 1, 1)
        assert transition((1, 1, 1), 2) == (2, 1)

    def test_float_instantiation_shares_the_code_path(self):
        assert transition((1.0, 1.0, 1.0, 1.0), 2) == (2.0, 2.0, 1.0)

    @given(lam_tuples, st.data())
    @settings(max_examples=100, deadline=None)
    def test_length_drops_by_one(self, lams, data):
        k = data.draw(st.integers(min_value=1, max_value=len(lams) - 1))
        child = transition(lams, k)
        assert len(child) == len(lams) - 1
        assert all(v > 0 for v in child)


TABLE_AKN = {
    4: {1: Fr(2, 3), 2: Fr(1, 3)},
    5: {1: Fr(13, 24), 2: Fr(1, 6), 3: Fr(7, 24)},
    6: {1: Fr(41, 120), 2: Fr(5, 18), 3: Fr(7, 72), 4: Fr(41, 180), 5: Fr(1, 18)},
    7: {1: Fr(49, 180), 2: Fr(1, 8), 3: Fr(1073, 4320), 4: Fr(47, 720), 5: Fr(53, 360),
        6: Fr(7, 72), 7: Fr(161, 4320), 8: Fr(1, 135)},
    8: {1: Fr(431, 2520), 2: Fr(527, 3456), 3: Fr(3079, 38880), 4: Fr(1229, 5600),
        5: Fr(149, 2100), 6: Fr(486359, 5443200), 7: Fr(343, 4320), 8: Fr(11, 144),
        9: Fr(26083, 604800), 10: Fr(859, 77760), 11: Fr(941, 155520), 12: Fr(1, 1050),
        13: Fr(1, 1800)},
}


class TestEnumerate:
    def test_n3_collapses_to_single_branch(self):
        assert enumerate_pdf(3).coeffs == {1: Fr(1)}

    def test_n4(self):
        assert enumerate_pdf(4).coeffs == TABLE_AKN[4]

    def test_n8_spot_values(self):
        coeffs = enumerate_pdf(8).coeffs
        assert coeffs[1] == Fr(431, 2520)
        assert coeffs[13] == Fr(1, 1800)

    def test_cap(self):
        with pytest.raises(ValueError, match="too large"):
            enumerate_pdf(13)
        # explicit override is allowed
        assert sum(enumerate_pdf(9, max_n=9).coeffs.values()) == 1

    def test_mixture_validation(self):
        with pytest.raises(ValueError, match="sum to 1"):
            ExpMixture(n=4, coeffs={1: Fr(1, 2)})


class TestMixtureMean:
    def test_examples(self):
        assert mixture_mean(ExpMixture(4, {1: Fr(2, 3), 2: Fr(1, 3)})) == Fr(5, 6)
        assert mixture_mean(ExpMixture(5, {5: Fr(1)})) == Fr(1, 5)
        assert mean_uniform_scale(3) == Fr(1, 4)
        assert mean_uniform_scale(4) == Fr(1, 6)


class TestStochasticConsistency:
    def test_walk_samples_match_mixture_cdf(self):
        # one-sample KS of walk-generated final differences vs the exact cdf
        for n in (4, 6, 8):
            mix = enumerate_pdf(n)
            samples = sample_final_difference(n, 4000, seed=21 + n)
            res = sps.kstest(samples, mix.cdf)
            assert res.pvalue > 1e-3, "n=%d pvalue %.4g" % (n, res.pvalue)

    def test_lemma_exponential_splitting(self):
        # X1 ~ EXP(1), X2 ~ EXP(2): P(X1 < X2) = 1/3; conditioned on that
        # event X1 ~ EXP(3) and X2 - X1 ~ EXP(2), independently
        rng = np.random.default_rng(17)
        trials = 200000
        x1 = rng.exponential(scale=1.0, size=trials)
        x2 = rng.exponential(scale=0.5, size=trials)
        won = x1 < x2
        phat = won.mean()
        sigma = np.sqrt(phat * (1 - phat) / trials)
        assert abs(phat - 1 / 3) < 3 * sigma
        cond = x1[won]
        assert sps.kstest(cond, sps.expon(scale=1 / 3).cdf).pvalue > 1e-3
        assert sps.kstest(x2[won] - cond, sps.expon(scale=1 / 2).cdf).pvalue > 1e-3

    def test_exact_mean_matches_monte_carlo_at_n5(self):
        exact = float(mean_uniform_scale(5))
        stats = sample_mean_ldm(SimConfig(n=5, trials=100000, bits=64, seed=23))
        assert abs(stats.mean - exact) < 3 * stats.stderr
