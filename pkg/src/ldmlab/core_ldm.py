"""Differencing heuristics on integer instances.

The two largest numbers are repeatedly replaced by their difference
(largest differencing, LDM); the rooted-tree bookkeeping recovers the
actual two-partition behind the final number.  Also provides the
parallel paired differencing method (PDM), an exhaustive optimum for
small instances, and seeded bulk sampling of the LDM discrepancy on
uniform random ell-bit inputs.
"""

import heapq
import math
from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _heapsim
from ._util import LN2, frac_to_float, ln_big, ratio_array

BRUTE_FORCE_MAX_N = 30


def default_bits(n):
    """Bit width that keeps discrepancies ~n^(-ln(n)/(2 ln 2)) resolvable.

    Three times the expected number of cancelled bits plus 64 guard bits,
    never below 64.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    cancelled = 3.0 * math.log(n) ** 2 / (2.0 * LN2) / LN2
    return max(64, math.ceil(cancelled) + 64)


@dataclass
class Instance:
    """List of nonnegative ell-bit integers standing for value/2^ell in [0,1)."""

    values: list
    bits: int

    def __post_init__(self):
        if len(self.values) < 1:
            raise ValueError("empty instance")
        if self.bits < 1:
            raise ValueError("bits must be >= 1")
        lim = 1 << self.bits
        for v in self.values:
            if not (0 <= v < lim):
                raise ValueError("value out of range for %d bits" % self.bits)

    @property
    def n(self):
        return len(self.values)


@dataclass
class Partition:
    """Side labels (0/1 per element) and the achieved integer discrepancy."""

    side: list
    discrepancy: int

    def recompute_discrepancy(self, instance):
        s0 = sum(v for v, s in zip(instance.values, self.side) if s == 0)
        s1 = sum(v for v, s in zip(instance.values, self.side) if s == 1)
        return abs(s0 - s1)


@dataclass
class DiffForest:
    """Rooted trees built during differencing: parent links plus join edges."""

    parent: list
    edges: list = field(default_factory=list)
    root: int = 0
    root_label: int = 0

    def two_color(self):
        """0/1 labels by depth parity from the final root."""
        n = len(self.parent)
        children = [[] for _ in range(n)]
        for i, p in enumerate(self.parent):
            if p >= 0:
                children[p].append(i)
        side = [0] * n
        stack = [(self.root, 0)]
        while stack:
            node, color = stack.pop()
            side[node] = color
            for c in children[node]:
                stack.append((c, 1 - color))
        return side


@dataclass
class SimConfig:
    """Bulk-sampling parameters; bits may be 'auto'."""

    n: int
    trials: int
    bits: object = "auto"
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    def resolved_bits(self):
        return default_bits(self.n) if self.bits == "auto" else int(self.bits)


def uniform_instance(n, bits, rng):
    """Instance of n i.i.d. uniform `bits`-bit integers from a numpy Generator."""
    vals = _heapsim.draw_limb_chunk(rng, 1, n, bits)[0]
    return Instance([_heapsim.limbs_to_int(vals[i]) for i in range(n)], bits)


def ldm(instance, want_forest=False):
    """Largest differencing method with partition recovery.

    Repeatedly joins the two largest roots x >= y, relabels x with x - y.
    Ties break by insertion order (stable); zeros stay in play until
    consumed.  O(n log n) heap operations.
    """
    values = instance.values
    n = len(values)
    if n == 0:
        raise ValueError("empty instance")
    parent = [-1] * n
    edges = []
    # heap entries: (-label, tie_order, node); labels may repeat, order may not
    heap = [(-v, i, i) for i, v in enumerate(values)]
    heapq.heapify(heap)
    order = n
    while len(heap) > 1:
        negx, _, x = heapq.heappop(heap)
        negy, _, y = heapq.heappop(heap)
        parent[y] = x
        edges.append((x, y))
        heapq.heappush(heap, (negx - negy, order, x))
        order += 1
    root_label = -heap[0][0]
    forest = DiffForest(parent=parent, edges=edges, root=heap[0][2], root_label=root_label)
    part = Partition(side=forest.two_color(), discrepancy=root_label)
    if want_forest:
        return part, forest
    return part


def pdm(instance):
    """Paired differencing: sort descending, difference adjacent pairs in
    parallel each round, carry an unpaired smallest element unchanged."""
    vals = list(instance.values)
    if not vals:
        raise ValueError("empty instance")
    while len(vals) > 1:
        vals.sort(reverse=True)
        m = len(vals)
        nxt = [vals[i] - vals[i + 1] for i in range(0, m - 1, 2)]
        if m % 2 == 1:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def brute_force_optimum(instance):
    """Minimum discrepancy over all 2^(n-1) sign assignments (meet in the
    middle), with one witness partition."""
    values = instance.values
    n = len(values)
    if n == 0:
        raise ValueError("empty instance")
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError("instance too large for exhaustive search")
    total = sum(values)
    h = n // 2
    left, right = values[:h], values[h:]

    def subset_sums(vals):
        sums = [(0, 0)]
        for i, v in enumerate(vals):
            sums += [(s + v, m | (1 << i)) for s, m in sums]
        return sums

    lsums = subset_sums(left)
    rsums = sorted(subset_sums(right))
    rkeys = [s for s, _ in rsums]
    best = None
    for a, maska in lsums:
        # want a + b as close as possible to total/2
        pos = bisect_left(rkeys, (total - 2 * a + 1) // 2)
        for j in (pos - 1, pos, pos + 1):
            if 0 <= j < len(rsums):
                b, maskb = rsums[j]
                d = abs(2 * (a + b) - total)
                if best is None or d < best[0]:
                    best = (d, maska, maskb)
    d, maska, maskb = best
    side = [(maska >> i) & 1 for i in range(h)] + [(maskb >> i) & 1 for i in range(n - h)]
    return Partition(side=side, discrepancy=d)


@dataclass
class LdmSampleStats:
    """Aggregates of rescaled discrepancies L = value / 2^bits."""

    n: int
    trials: int
    bits: int
    seed: int
    mean: float
    stderr: float
    neg_log_mean: float
    zero_fraction: float
    low_bits_warning: bool
    hist_edges: np.ndarray
    hist_density: np.ndarray
    samples: list = None


def sample_mean_ldm(config, keep_samples=False, hist_bins=80, hist_range=None):
    """Sample the LDM discrepancy on `trials` uniform instances.

    Deterministic in the config (exact integer accumulation, fixed chunk
    layout).  Sets `low_bits_warning` when more than 1% of the trials
    produced an unresolvable zero discrepancy.  The histogram is the pdf
    of L / <L>; with the default range (0, max ratio) it integrates to 1.
    """
    bits = config.resolved_bits()
    samples = _heapsim.ldm_discrepancy_samples(config.n, config.trials, bits, config.seed)
    trials = config.trials
    total = sum(samples)
    zero_count = sum(1 for s in samples if s == 0)
    zero_fraction = zero_count / trials
    low_bits_warning = zero_fraction > 0.01
    scale = 1 << bits
    mean = frac_to_float(total, trials * scale)
    if total > 0:
        neg_log_mean = bits * LN2 + math.log(trials) - ln_big(total)
        sumsq = sum(s * s for s in samples)
        # var of the sample mean, exact until the final rounding; rescale
        # inside the Fraction so the float conversion cannot overflow
        var_num = Fraction(sumsq, trials) - Fraction(total, trials) ** 2
        var_mean = var_num / (trials - 1) if trials > 1 else Fraction(0)
        stderr = math.sqrt(float(var_mean / (scale * scale))) if var_mean > 0 else 0.0
        ratios = ratio_array(samples, total, trials)
        rng_lo, rng_hi = hist_range if hist_range else (0.0, max(ratios) * (1.0 + 1e-12))
        counts, edges = np.histogram(ratios, bins=hist_bins, range=(rng_lo, rng_hi))
        width = edges[1] - edges[0]
        density = counts / (trials * width)
    else:
        neg_log_mean = math.inf
        stderr = 0.0
        edges = np.linspace(0.0, 8.0, hist_bins + 1)
        density = np.zeros(hist_bins)
    return LdmSampleStats(
        n=config.n,
        trials=trials,
        bits=bits,
        seed=config.seed,
        mean=mean,
        stderr=stderr,
        neg_log_mean=neg_log_mean,
        zero_fraction=zero_fraction,
        low_bits_warning=low_bits_warning,
        hist_edges=edges,
        hist_density=density,
        samples=samples if keep_samples else None,
    )


def pdm_mean(n, trials, bits=62, seed=0):
    """Mean rescaled PDM discrepancy over random uniform instances.

    Vectorized over trials in int64 (needs bits <= 62); agrees with
    running `pdm` on each drawn instance.  Returns (mean, stderr).
    """
    if bits > 62:
        raise ValueError("pdm_mean is int64-based; needs bits <= 62")
    total = 0
    sumsq = 0
    nchunks = (trials + _heapsim.CHUNK_TRIALS - 1) // _heapsim.CHUNK_TRIALS
    for c in range(nchunks):
        t = min(_heapsim.CHUNK_TRIALS, trials - c * _heapsim.CHUNK_TRIALS)
        rng = _heapsim.substream(seed, _heapsim.STREAM_PDM, c)
        a = rng.integers(0, 1 << bits, size=(t, n), dtype=np.int64)
        while a.shape[1] > 1:
            a = -np.sort(-a, axis=1)
            m = a.shape[1]
            d = a[:, 0 : m - 1 : 2] - a[:, 1:m:2]
            a = np.concatenate([d, a[:, m - 1 :]], axis=1) if m % 2 else d
        final = a[:, 0]
        total += int(final.astype(object).sum())
        sumsq += int((final.astype(object) ** 2).sum())
    scale = 1 << bits
    mean = frac_to_float(total, trials * scale)
    var_num = Fraction(sumsq, trials) - Fraction(total, trials) ** 2
    var_mean = var_num / (trials - 1) if trials > 1 else Fraction(0)
    stderr = math.sqrt(float(var_mean / (scale * scale))) if var_mean > 0 else 0.0
    return mean, stderr
