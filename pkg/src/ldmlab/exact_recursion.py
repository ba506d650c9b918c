"""Exact branching recursion over exponential-parameter tuples.

A tuple (lam_1, ..., lam_m) encodes a sorted list of partial sums of
independent exponentials X_i ~ EXP(lam_i).  One differencing step removes
the two largest entries and re-inserts their difference, an EXP(lam_m)
variate, at a random position k; enumerating the whole branch tree from
the all-ones tuple gives the exact mixture of exponentials for the final
difference, with rational coefficients.
"""

from dataclasses import dataclass
from fractions import Fraction

DEFAULT_MAX_N = 12


def branch_probability(lams, k):
    """Probability that the re-inserted difference lands at position k.

    For k <= m-2 this is lam_m/(lam_k+lam_m) * prod_{i<k} lam_i/(lam_i+lam_m);
    for k = m-1 it is prod_{i<=m-2} lam_i/(lam_i+lam_m).  Exact when fed
    ints or Fractions.
    """
    m = len(lams)
    if m < 2:
        raise ValueError("tuple too short")
    if not 1 <= k <= m - 1:
        raise ValueError("k out of range")
    lm = lams[-1]
    prod = Fraction(1)
    for i in range(k - 1):
        prod *= Fraction(lams[i], lams[i] + lm)
    if k <= m - 2:
        return prod * Fraction(lm, lams[k - 1] + lm)
    return prod


def branch_distribution(lams):
    """All (k, probability) pairs; the probabilities sum to 1 exactly."""
    m = len(lams)
    lm = lams[-1]
    out = []
    prod = Fraction(1)
    for k in range(1, m - 1):
        out.append((k, prod * Fraction(lm, lams[k - 1] + lm)))
        prod *= Fraction(lams[k - 1], lams[k - 1] + lm)
    out.append((m - 1, prod))
    return out


def transition(lams, k):
    """Next tuple after the difference lands at position k (length m-1).

    Works for any numeric entry type; the float walk reuses this code path.
    """
    m = len(lams)
    if m < 3:
        raise ValueError("terminal tuple has no transition")
    if not 1 <= k <= m - 1:
        raise ValueError("k out of range")
    lm = lams[-1]
    if k <= m - 2:
        return tuple(lams[i] + lm for i in range(k)) + tuple(lams[k - 1 : m - 2])
    return tuple(lams[i] + lm for i in range(m - 2)) + (lm,)


@dataclass
class ExpMixture:
    """Mixture pdf p(x) = sum_k a_k * k * exp(-k x), exact coefficients."""

    n: int
    coeffs: dict  # parameter k -> Fraction weight

    def __post_init__(self):
        tot = sum(self.coeffs.values())
        if tot != 1:
            raise ValueError("mixture weights must sum to 1 exactly, got %s" % tot)
        if any(a < 0 for a in self.coeffs.values()):
            raise ValueError("negative mixture weight")

    def mean(self):
        return mixture_mean(self)

    def cdf(self, x):
        import numpy as np

        x = np.asarray(x, dtype=float)
        pos = np.maximum(x, 0.0)
        out = sum(float(a) * -np.expm1(-k * pos) for k, a in self.coeffs.items())
        return out if out.shape else float(out)

    def pdf(self, x):
        import numpy as np

        x = np.asarray(x, dtype=float)
        out = sum(float(a) * k * np.exp(-k * np.maximum(x, 0.0)) for k, a in self.coeffs.items())
        out = np.where(x < 0, 0.0, out)
        return out if out.shape else float(out)


def enumerate_pdf(n, max_n=DEFAULT_MAX_N):
    """Exact mixture coefficients a_k for the final difference at size n.

    Walks the full branch tree from (1,...,1) level by level, merging
    identical tuples by adding their probabilities (the branch count still
    grows fast; n above `max_n` is refused).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if n > max_n:
        raise ValueError("branch tree too large (n=%d > %d); pass max_n to override" % (n, max_n))
    states = {tuple([1] * n): Fraction(1)}
    while len(next(iter(states))) > 2:
        merged = {}
        for lams, p in states.items():
            for k, q in branch_distribution(lams):
                child = transition(lams, k)
                merged[child] = merged.get(child, Fraction(0)) + p * q
        states = merged
    coeffs = {}
    for lams, p in states.items():
        k = lams[1]
        coeffs[k] = coeffs.get(k, Fraction(0)) + p
    return ExpMixture(n=n, coeffs=dict(sorted(coeffs.items())))


def mixture_mean(mix):
    """Exact mean of the mixture: sum_k a_k / k (an EXP(k) variate has
    mean 1/k).  Divide by n+1 to convert to the uniform-input scale."""
    return sum(Fraction(a, 1) / k for k, a in mix.coeffs.items())


def mean_uniform_scale(n, max_n=DEFAULT_MAX_N):
    """Exact expected LDM discrepancy on n uniform [0,1) inputs."""
    if n == 1:
        return Fraction(1, 2)
    if n == 2:
        # terminal tuple (1,1): an EXP(1) variate, rescaled by n+1
        return Fraction(1, 3)
    return mixture_mean(enumerate_pdf(n, max_n=max_n)) / (n + 1)
