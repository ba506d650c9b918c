"""Deterministic mean-field evolution of the average parameter tuple.

Replaces the stochastic branching step by its expectation: each entry
either copies its lower neighbor or gains the current top entry, weighted
by the probability profile P_i = prod_{j<i} lam_j/(lam_j+lam_top).  The
state shrinks by one per iteration; the surviving entry after n-1 steps
is the deterministic analogue of the final-difference parameter.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._util import LN2

PROB_CUTOFF = 1e-300
_BLOCK = 256
FIELD_CAP_N = 4096


@dataclass
class RateState:
    lambdas: np.ndarray
    t: int
    n: int

    def __post_init__(self):
        if self.lambdas.size != self.n - self.t:
            raise ValueError("state length must be n - t")


def initial_state(n):
    if n < 2:
        raise ValueError("n must be >= 2")
    return RateState(np.ones(n), 0, n)


def prob_profile(lam, cutoff=PROB_CUTOFF):
    """P_i for i = 1..m-1 (0-indexed i-1): running product with early exit.

    P_1 = 1 always; once the product drops below `cutoff` the remaining
    entries are left at zero, matching their asymptotic role.
    """
    m = lam.size
    lnt = lam[-1]
    P = np.zeros(m - 1)
    if m < 2:
        raise ValueError("profile needs length >= 2")
    P[0] = 1.0
    prod = 1.0
    pos = 1
    while pos < m - 1 and prod >= cutoff:
        j = min(pos + _BLOCK, m - 1)
        head = lam[pos - 1 : j - 1]
        seg = prod * np.cumprod(head / (head + lnt))
        P[pos:j] = seg
        prod = seg[-1]
        pos = j
    return P


def step(state):
    """One rate-equation iteration (length m -> m-1)."""
    lam = state.lambdas
    m = lam.size
    if m < 2:
        raise ValueError("cannot step a terminal state")
    lnt = lam[-1]
    new = np.empty(m - 1)
    if m == 2:
        new[0] = lam[1]  # boundary with P_1 = 1: copy the top entry
    else:
        P = prob_profile(lam)
        new[0] = lam[0] + lnt  # P_1 = 1 exactly
        if m > 3:
            body = slice(1, m - 2)
            new[body] = lam[0 : m - 3] * (1.0 - P[body]) + (lam[body] + lnt) * P[body]
        new[m - 2] = lam[m - 3] * (1.0 - P[m - 2]) + lnt * P[m - 2]
    return RateState(new, state.t + 1, state.n)


def solve(n, keep_field=False):
    """Iterate from the all-ones state down to a single entry.

    Returns (final value, field) where field is the list of per-iteration
    vectors when requested (O(n^2) memory) and None otherwise.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if math.log(n) ** 2 / (2.0 * LN2) > 700.0:
        raise ValueError(
            "peak values exceed double range at this size; a log-domain mode would be required"
        )
    state = initial_state(n)
    field = [state.lambdas.copy()] if keep_field else None
    while state.lambdas.size > 1:
        state = step(state)
        if keep_field:
            field.append(state.lambdas.copy())
    return float(state.lambdas[0]), field


def contour_field(n, cap=FIELD_CAP_N):
    """Full triangular field for contour diagnostics (list indexed by t)."""
    if n > cap:
        raise ValueError("field is O(n^2) values; n=%d exceeds cap %d" % (n, cap))
    _, field = solve(n, keep_field=True)
    return field


def log_field_rows(field):
    """(t, i, ln lambda_i^t) rows, i 1-based, for external plotting."""
    rows = []
    for t, lam in enumerate(field):
        ln = np.log(lam)
        rows.extend((t, i + 1, float(ln[i])) for i in range(lam.size))
    return rows


def scaled_final(n):
    """ln(lambda_1^{n-1} (n+1)) / ln^2 n, the comparison-plot ordinate."""
    lam1, _ = solve(n)
    return (math.log(lam1) + math.log(n + 1)) / math.log(n) ** 2
