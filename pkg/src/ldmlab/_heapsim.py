"""Fixed-width multi-limb max-heap kernel for bulk LDM sampling.

Values are rows of big-endian uint64 limbs, so a single differencing run
is exact for any bit width that is a multiple-of-64 bound.  The jitted
kernel only produces discrepancies; partition bookkeeping lives in
:mod:`ldmlab.core_ldm` on the slow exact path.

Random draws come from fixed-size chunks, each chunk seeded by
``SeedSequence((seed, stream, chunk_index))``.  The chunk layout depends
only on (seed, trials), never on how chunks are scheduled, so results
are bit-identical across runs and across the numba / pure-python paths.
"""

import heapq

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

# Stream labels keep different sampling operations on disjoint substreams.
STREAM_LDM = 0
STREAM_PDM = 1
STREAM_WALK = 2

CHUNK_TRIALS = 512


def substream(seed, stream, chunk_index):
    """Independent generator for one chunk of one sampling operation."""
    ss = np.random.SeedSequence(entropy=(int(seed), int(stream), int(chunk_index)))
    return np.random.default_rng(ss)


def draw_limb_chunk(rng, trials, n, bits):
    """(trials, n, L) uint64 array of uniform `bits`-bit integers."""
    nlimbs = (bits + 63) // 64
    vals = rng.integers(0, 2**64, size=(trials, n, nlimbs), dtype=np.uint64)
    top = bits - 64 * (nlimbs - 1)
    if top < 64:
        vals[:, :, 0] &= np.uint64((1 << top) - 1)
    return vals


def limbs_to_int(row):
    return int.from_bytes(np.ascontiguousarray(row, dtype=">u8").tobytes(), "big")


if HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def _row_less(h, a, b, L):
        for l in range(L):
            if h[a, l] < h[b, l]:
                return True
            if h[a, l] > h[b, l]:
                return False
        return False

    @numba.njit(cache=True, nogil=True)
    def _sift_down(h, i, size, L):
        while True:
            c = 2 * i + 1
            if c >= size:
                return
            if c + 1 < size and _row_less(h, c, c + 1, L):
                c += 1
            if _row_less(h, i, c, L):
                for l in range(L):
                    t = h[i, l]
                    h[i, l] = h[c, l]
                    h[c, l] = t
                i = c
            else:
                return

    @numba.njit(cache=True, nogil=True)
    def _ldm_one(h, L):
        # In-place max-heap run; the discrepancy ends up in row 0.
        n = h.shape[0]
        tmp = np.empty(L, np.uint64)
        for i in range(n // 2 - 1, -1, -1):
            _sift_down(h, i, n, L)
        size = n
        while size > 1:
            for l in range(L):
                tmp[l] = h[0, l]
            size -= 1
            for l in range(L):
                h[0, l] = h[size, l]
            _sift_down(h, 0, size, L)
            # tmp (old max) minus new max, with borrow across limbs
            borrow = np.uint64(0)
            for l in range(L - 1, -1, -1):
                x = tmp[l]
                y = h[0, l]
                d = x - y - borrow
                if x < y or (x == y and borrow == np.uint64(1)):
                    borrow = np.uint64(1)
                else:
                    borrow = np.uint64(0)
                tmp[l] = d
            for l in range(L):
                h[0, l] = tmp[l]
            _sift_down(h, 0, size, L)

    @numba.njit(cache=True, nogil=True)
    def _ldm_batch(vals, out):
        T, n, L = vals.shape
        for t in range(T):
            _ldm_one(vals[t], L)
            for l in range(L):
                out[t, l] = vals[t, 0, l]


def ldm_int_heapq(values):
    """Reference LDM on python ints via heapq (exact, any width)."""
    if not values:
        raise ValueError("empty instance")
    h = [-v for v in values]
    heapq.heapify(h)
    while len(h) > 1:
        x = -heapq.heappop(h)
        heapq.heapreplace(h, -(x - -h[0]))
    return -h[0]


def _ldm_chunk_python(vals):
    T = vals.shape[0]
    return [ldm_int_heapq([limbs_to_int(vals[t, i]) for i in range(vals.shape[1])]) for t in range(T)]


def ldm_discrepancy_samples(n, trials, bits, seed, use_numba=None):
    """Discrepancies of `trials` random uniform instances, as python ints.

    Deterministic in (n, trials, bits, seed); the numba and pure-python
    paths consume identical random chunks and agree bit for bit.
    """
    if use_numba is None:
        use_numba = HAVE_NUMBA
    nlimbs = (bits + 63) // 64
    samples = []
    nchunks = (trials + CHUNK_TRIALS - 1) // CHUNK_TRIALS
    for c in range(nchunks):
        t = min(CHUNK_TRIALS, trials - c * CHUNK_TRIALS)
        rng = substream(seed, STREAM_LDM, c)
        vals = draw_limb_chunk(rng, t, n, bits)
        if use_numba:
            out = np.zeros((t, nlimbs), np.uint64)
            _ldm_batch(vals, out)
            samples.extend(limbs_to_int(out[i]) for i in range(t))
        else:
            samples.extend(_ldm_chunk_python(vals))
    return samples
