"""Continuum-limit solution and its asymptotics.

The similarity-reduced continuum dynamics gamma'(s) = n*gamma(2s-1) with
gamma = 1 on [-1,0] integrates piecewise into polynomials gamma_k on
[1-2^(1-k), 1-2^(-k)]; the s->1 limit is the entire function

    f(n) = sum_j n^j / (j! 2^(j(j-1)/2)),

which obeys f'(n) = f(n/2) and grows like n^(ln n/(2 ln 2)).  f is
evaluated in the log domain with configurable mpmath precision; a moving
saddle point j0 solving j*2^(j-1) = n drives the asymptotic expansion of
ln[f(n)(n+1)]/ln^2 n and the explicit prefactor form.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath as mp

from ._util import LN2

DEFAULT_PRECISION = 256

# fixed coefficients of the asymptotic expansion, shared with the fitting
# module: scaled value ~ C0 + A1/ln n + A2/ln^2 n + (log-log terms)
_LNLN2 = math.log(LN2)
SCALING_CONSTANT = 1.0 / (2.0 * LN2)  # 0.72134752...
COEFF_INV_LN = (_LNLN2 + 1.0) / LN2 + 1.5
COEFF_INV_LN2 = (LN2 + 4.0 * _LNLN2) / 8.0 - _LNLN2**2 / (2.0 * LN2)
COEFF_LNLN_LN = -1.0 / LN2
COEFF_LNLN_LN2 = -1.0
COEFF_LNLN2_LN2 = 1.0 / (2.0 * LN2)


# ---------------------------------------------------------------------------
# piecewise polynomials gamma_k


def gamma_piece_index(s):
    """Piece k whose domain [1-2^(1-k), 1-2^(-k)] contains s."""
    if not -1.0 <= s < 1.0:
        raise ValueError("s must lie in [-1, 1)")
    if s <= 0.0:
        return 0
    return max(1, math.ceil(-math.log2(1.0 - s) - 1e-12))


def gamma_eval(s, n, piece=None):
    """gamma(s) for scale parameter n: sum_{j<=k} of the piece-k polynomial.

    Identical term order across pieces makes shared endpoints evaluate
    bit-identically from either side; `piece` forces a specific k at such
    endpoints.
    """
    k = gamma_piece_index(s) if piece is None else int(piece)
    total = 0.0
    coef = 1.0  # n^j / (j! 2^C(j,2))
    for j in range(k + 1):
        if j > 0:
            coef *= n / (j * 2.0 ** (j - 1))
        base = 2.0 ** (j - 1) * (s - 1.0) + 1.0 if j > 0 else 1.0
        total += coef * base**j
    return total


def _adaptive_simpson(f, a, b, tol):
    def rec(a, m, b, fa, fm, fb, whole, tol, depth):
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm = f(lm)
        frm = f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        if depth <= 0 or abs(left + right - whole) < 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return rec(a, lm, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(
            m, rm, b, fm, frm, fb, right, tol / 2.0, depth - 1
        )

    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return rec(a, m, b, fa, fm, fb, whole, tol, 48)


def gamma_recursion_check(k, n, samples=9, s_values=None, quad_tol=1e-12):
    """Residual of gamma_{k+1}(s) = gamma_k(1-2^-k) + n * integral of
    gamma_k(2 xi - 1), checked by adaptive Simpson quadrature.

    Returns the max relative residual over sampled s in piece k+1.
    """
    if k > 20:
        raise ValueError("k capped at 20")
    lo = 1.0 - 2.0 ** (-k)
    hi = 1.0 - 2.0 ** (-k - 1)
    if s_values is None:
        s_values = [lo + (hi - lo) * (i + 1) / (samples + 1) for i in range(samples)]
    anchor = gamma_eval(lo, n)
    worst = 0.0
    for s in s_values:
        if not lo <= s <= hi:
            raise ValueError("sample point outside piece %d" % (k + 1))
        integral = _adaptive_simpson(lambda xi: gamma_eval(2.0 * xi - 1.0, n), lo, s, quad_tol)
        direct = gamma_eval(s, n)
        worst = max(worst, abs(anchor + n * integral - direct) / max(1.0, abs(direct)))
    return worst


# ---------------------------------------------------------------------------
# the series f(n) in the log domain


def stirling_cutoff(prec):
    """Smallest j above which the Stirling series can reach 2^-(prec+16)."""
    return max(32, math.ceil((prec + 24) * LN2 / (2.0 * math.pi)))


def log_factorial(j, prec=None):
    """ln j! — exact accumulation below the Stirling cutoff, Stirling
    series with a checked error bound above."""
    prec = prec or mp.mp.prec
    with mp.workprec(prec + 16):
        if j <= stirling_cutoff(prec):
            return mp.fsum(mp.ln(i) for i in range(2, j + 1)) if j > 1 else mp.mpf(0)
        return _stirling_ln_factorial(mp.mpf(j), prec)


def _stirling_ln_factorial(x, prec):
    # ln x! = (x + 1/2) ln x - x + ln(2 pi)/2 + sum B_2k / (2k(2k-1) x^(2k-1))
    target = mp.mpf(2) ** (-(prec + 8))
    total = (x + mp.mpf(1) / 2) * mp.ln(x) - x + mp.ln(2 * mp.pi) / 2
    correction = mp.mpf(0)
    prev = mp.inf
    k = 1
    while True:
        term = mp.bernoulli(2 * k) / (2 * k * (2 * k - 1) * x ** (2 * k - 1))
        if abs(term) >= abs(prev):
            raise ValueError("Stirling series diverged before reaching target accuracy")
        correction += term
        if abs(term) < target * abs(total):
            return total + correction
        prev = term
        k += 1


@dataclass
class LogBigValue:
    """A positive quantity carried as its natural log at fixed precision."""

    ln_value: mp.mpf
    precision: int
    n_terms: int = 0

    def scaled(self, ln_n):
        """ln[value * (n+1)] / ln^2 n (n+1 ~ n beyond ~2^53)."""
        ln_n = mp.mpf(ln_n)
        ln_np1 = ln_n + mp.log1p(mp.exp(-ln_n)) if ln_n < 40 else ln_n
        return (self.ln_value + ln_np1) / ln_n**2


def f_series(ln_n, precision_bits=DEFAULT_PRECISION):
    """ln f(n) by log-sum-exp over term logs phi_j = j ln n - ln j! -
    C(j,2) ln 2, stopping once terms fall 2^-(precision+16) below the peak.

    Takes ln n directly so n = 2^2000 is as routine as n = 10.
    """
    if precision_bits < 64:
        raise ValueError("precision must be >= 64 bits")
    with mp.workprec(precision_bits + 16):
        ln_n = mp.mpf(ln_n)
        if mp.isinf(ln_n) and ln_n < 0:
            # n = 0: only the j = 0 term survives
            return LogBigValue(ln_value=mp.mpf(0), precision=precision_bits, n_terms=1)
        if ln_n < 0:
            raise ValueError("ln_n must be >= 0")
        ln2 = mp.ln(2)
        drop = (precision_bits + 16) * ln2
        # loop guard only; covers the saddle position plus the
        # precision-driven tail width sqrt(2 (prec+16))
        max_terms = int(4 * (float(ln_n) / LN2 + 10) + 4 * math.sqrt(2 * (precision_bits + 16)))
        cutoff = stirling_cutoff(precision_bits)
        phis = []
        peak = mp.mpf("-inf")
        lnfact = mp.mpf(0)
        j = 0
        while True:
            if j > 0:
                lnfact = lnfact + mp.ln(j) if j <= cutoff else _stirling_ln_factorial(
                    mp.mpf(j), precision_bits
                )
            phi = j * ln_n - lnfact - (j * (j - 1) // 2) * ln2
            if phi < peak - drop and j >= 2:
                break
            phis.append(phi)
            if phi > peak:
                peak = phi
            j += 1
            if j > max_terms:
                raise ValueError("term budget exceeded; raise precision_bits or check ln_n")
        total = mp.fsum(mp.exp(p - peak) for p in phis)
        return LogBigValue(ln_value=peak + mp.ln(total), precision=precision_bits, n_terms=len(phis))


def f_direct_rational(n, terms=20):
    """Plain partial sum of the series with exact rational arithmetic;
    independent small-n oracle for f_series."""
    total = Fraction(0)
    for j in range(terms):
        total += Fraction(n) ** j / (math.factorial(j) * 2 ** (j * (j - 1) // 2))
    return total


# ---------------------------------------------------------------------------
# saddle point and asymptotic expansion


@dataclass
class SaddlePoint:
    ln_n: float
    root: float  # numeric root of j * 2^(j-1) = n
    expansion: float  # four-term moving-saddle expansion
    difference: float


def saddle_point(ln_n):
    """Both determinations of the saddle index j0."""
    ln_n = float(ln_n)
    if ln_n <= 0:
        raise ValueError("ln_n must be > 0")

    def g(j):
        return math.log(j) + (j - 1.0) * LN2 - ln_n

    lo, hi = 1e-12, ln_n / LN2 + 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-13 * max(1.0, hi):
            break
    root = 0.5 * (lo + hi)
    L = ln_n / LN2
    expansion = L - math.log(L) / LN2 + 1.0 + math.log(L) / (LN2 * ln_n) - 1.0 / ln_n
    return SaddlePoint(ln_n=ln_n, root=root, expansion=expansion, difference=abs(root - expansion))


def log_poly_correction(ln_n):
    """The log-polynomial correction C(n) entering the prefactor form."""
    ln_n = mp.mpf(ln_n)
    ln2 = mp.ln(2)
    q = mp.ln(ln_n / ln2)
    return -(ln_n / ln2) * (q - 1 - ln2 / 2) + (q**2 / (2 * ln2) - q)


@dataclass
class AsymptoticEval:
    ln_n: mp.mpf
    saddle_root: float
    saddle_expansion: float
    correction: mp.mpf  # C(n)
    ln_prefactor_form: mp.mpf  # ln of (2^(1/8)/sqrt(ln 2)) exp(ln^2 n/(2 ln 2) + C(n))
    expansion_scaled: mp.mpf  # six-term expansion of ln[f(n)(n+1)] / ln^2 n


def asympt_expansion(ln_n, precision_bits=DEFAULT_PRECISION):
    """All six terms of the scaled expansion plus the prefactor form."""
    with mp.workprec(precision_bits + 16):
        ln_n = mp.mpf(ln_n)
        if ln_n <= 1:
            raise ValueError("ln_n must be > 1")
        ln2 = mp.ln(2)
        lnln2 = mp.ln(ln2)
        lnln = mp.ln(ln_n)
        expansion = (
            1 / (2 * ln2)
            + ((lnln2 + 1) / ln2 + mp.mpf(3) / 2) / ln_n
            + ((ln2 + 4 * lnln2) / 8 - lnln2**2 / (2 * ln2)) / ln_n**2
            - lnln / (ln_n * ln2)
            - lnln / ln_n**2
            + lnln**2 / (ln_n**2 * 2 * ln2)
        )
        corr = log_poly_correction(ln_n)
        ln_pref = ln2 / 8 - lnln2 / 2 + ln_n**2 / (2 * ln2) + corr
        sp = saddle_point(float(ln_n))
        return AsymptoticEval(
            ln_n=ln_n,
            saddle_root=sp.root,
            saddle_expansion=sp.expansion,
            correction=corr,
            ln_prefactor_form=ln_pref,
            expansion_scaled=expansion,
        )
