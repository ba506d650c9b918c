"""Single-path random walk down the exponential-parameter tuple tree.

Instead of enumerating every branch, draw the insertion position k from
its exact distribution (one uniform per step, inverted against the
running product) and follow a single trajectory until the tuple has
length two; the surviving lam_2 parameterizes the final difference.
A full walk costs O(n^2).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _heapsim
from .exact_recursion import transition

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

# beyond this scale a walk would take > 1e14 steps anyway; the log-domain
# variant exists for headroom experiments, not for routine use
LOG_DOMAIN_N = 10**7


def draw_k(lams, u):
    """Position index k drawn by cumulative-product inversion.

    P(k <= l) = 1 - prod_{j<=l} lam_j/(lam_j+lam_m) for l < m-1, else 1;
    a single uniform u in [0,1) decides k.
    """
    m = len(lams)
    if m < 3:
        raise ValueError("tuple too short to step")
    lm = lams[-1]
    prod = 1.0
    for l in range(1, m - 1):
        prod *= lams[l - 1] / (lams[l - 1] + lm)
        if prod < 1.0 - u:
            return l
    return m - 1


@dataclass
class WalkState:
    lambdas: tuple
    t: int


def walk(n, seed=0):
    """Terminal lam_2 of one walk from the all-ones tuple (python path)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    uniforms = _walk_uniforms(n, 1, seed)[0]
    return _walk_python(n, uniforms)


def _walk_python(n, uniforms):
    lams = tuple([1.0] * n)
    for step in range(n - 2):
        k = draw_k(lams, uniforms[step])
        lams = transition(lams, k)
    return lams[1]


def walk_log_domain(n, uniforms):
    """Walk carrying ln(lam) instead of lam; same draws, overflow-proof."""
    ln_lams = [0.0] * n
    m = n
    for step in range(n - 2):
        u = uniforms[step]
        ln_lm = ln_lams[m - 1]
        log_prod = 0.0
        k = m - 1
        threshold = math.log1p(-u) if u < 1.0 else -math.inf
        for l in range(1, m - 1):
            log_prod += ln_lams[l - 1] - np.logaddexp(ln_lams[l - 1], ln_lm)
            if log_prod < threshold:
                k = l
                break
        if k <= m - 2:
            tail = ln_lams[k - 1 : m - 2]
            ln_lams[k : m - 1] = tail
            for j in range(k):
                ln_lams[j] = np.logaddexp(ln_lams[j], ln_lm)
        else:
            for j in range(m - 2):
                ln_lams[j] = np.logaddexp(ln_lams[j], ln_lm)
            ln_lams[m - 2] = ln_lm
        m -= 1
    return ln_lams[1]


if HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def _walk_batch(uniforms, n, out):
        # Logical entry j lives at buf[base + j]; a step rewrites only the
        # j <= k prefix and slides base down by one, so the untouched tail
        # re-indexes for free.  Since k is O(1) on average, a whole walk
        # costs ~O(n) instead of the O(n^2) of naive tuple rebuilding.
        T = uniforms.shape[0]
        buf = np.empty(2 * n + 2)
        for t in range(T):
            base = n
            for j in range(1, n + 1):
                buf[base + j] = 1.0
            m = n
            for step in range(n - 2):
                u = uniforms[t, step]
                lm = buf[base + m]
                k = m - 1
                prod = 1.0
                for l in range(1, m - 1):
                    prod *= buf[base + l] / (buf[base + l] + lm)
                    if prod < 1.0 - u:
                        k = l
                        break
                nb = base - 1
                if k <= m - 2:
                    for j in range(1, k + 1):
                        buf[nb + j] = buf[base + j] + lm
                else:
                    for j in range(1, m - 1):
                        buf[nb + j] = buf[base + j] + lm
                    buf[nb + m - 1] = lm
                base = nb
                m -= 1
            out[t] = buf[base + 2]


def _walk_chunk_trials(n):
    # cap both the trial count and the uniforms-buffer footprint per chunk
    return max(1, min(_heapsim.CHUNK_TRIALS, 4_000_000 // max(n, 2)))


def _walk_uniforms(n, trials, seed, chunk_index=0):
    rng = _heapsim.substream(seed, _heapsim.STREAM_WALK, chunk_index)
    return rng.random(size=(trials, max(n - 2, 1)))


@dataclass
class WalkStats:
    n: int
    trials: int
    seed: int
    mean_lambda2: float
    stderr: float
    hist_edges: np.ndarray
    hist_density: np.ndarray
    samples: np.ndarray = None


def walk_ensemble(n, trials, seed=0, keep_samples=False, hist_bins=80, hist_range=None, use_numba=None):
    """Aggregate terminal lam_2 over independent walks.

    Chunked substreams as in the LDM sampler; the numba and python paths
    see identical uniforms.  The histogram is the pdf of lam_2/<lam_2>;
    the default range (0, max ratio) makes it integrate to 1.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if n > LOG_DOMAIN_N:
        raise ValueError("n too large for the linear-domain ensemble; use walk_log_domain")
    if use_numba is None:
        use_numba = HAVE_NUMBA
    all_samples = []
    per_chunk = _walk_chunk_trials(n)
    nchunks = (trials + per_chunk - 1) // per_chunk
    for c in range(nchunks):
        t = min(per_chunk, trials - c * per_chunk)
        uniforms = _walk_uniforms(n, t, seed, c)
        if use_numba and n > 2:
            out = np.empty(t)
            _walk_batch(uniforms, n, out)
            all_samples.append(out)
        else:
            all_samples.append(np.array([_walk_python(n, uniforms[i]) for i in range(t)]))
    samples = np.concatenate(all_samples)
    mean = math.fsum(samples) / trials
    stderr = float(samples.std(ddof=1)) / math.sqrt(trials) if trials > 1 else 0.0
    ratios = samples / mean
    rng_lo, rng_hi = hist_range if hist_range else (0.0, float(ratios.max()) * (1.0 + 1e-12))
    counts, edges = np.histogram(ratios, bins=hist_bins, range=(rng_lo, rng_hi))
    width = edges[1] - edges[0]
    density = counts / (trials * width)
    return WalkStats(
        n=n,
        trials=trials,
        seed=seed,
        mean_lambda2=mean,
        stderr=stderr,
        hist_edges=edges,
        hist_density=density,
        samples=samples if keep_samples else None,
    )


def sample_final_difference(n, trials, seed=0, use_numba=None):
    """Samples of the final difference itself: EXP(lam_2) draws riding on
    walk trajectories.  One extra uniform per trial, from a shifted stream."""
    stats = walk_ensemble(n, trials, seed=seed, keep_samples=True, use_numba=use_numba)
    rng = _heapsim.substream(seed, _heapsim.STREAM_WALK + 1000, 0)
    u = rng.random(trials)
    return -np.log1p(-u) / stats.samples
