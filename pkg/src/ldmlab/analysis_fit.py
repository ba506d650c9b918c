"""Scaling transforms and least-squares fits for the model comparison.

Every model (direct simulation, rate equation, half-index Fibonacci,
continuum series) is reduced to the common ordinate
ln[Z(n)(n+1)] / ln^2 n.  The structured fit freezes the known constant,
1/ln n and 1/ln^2 n coefficients of the asymptotic expansion and solves
ordinary least squares for the three log-log correction amplitudes; the
naive fit is the straight line -ln<L_n> = a + c ln^2 n.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._util import ln_big
from .continuum_series import (
    COEFF_INV_LN,
    COEFF_INV_LN2,
    SCALING_CONSTANT,
)

# model tags for ScalingPoint
MODEL_SIMULATION = "simulation"  # Z = 1/<n L_n>
MODEL_RATE = "rate"  # Z = final rate-equation value
MODEL_FIBONACCI = "fibonacci"  # Z = F(n)
MODEL_SERIES = "series"  # Z = f(n)
MODELS = (MODEL_SIMULATION, MODEL_RATE, MODEL_FIBONACCI, MODEL_SERIES)

# proven corridor n^{-b ln n} <= <L_n> <= n^{-a ln n} has b >= a >= c with
# c the conjectured common constant
BOUND_CONSTANT = SCALING_CONSTANT


@dataclass
class ScalingPoint:
    """One model evaluation, carried as ln Z to survive any magnitude."""

    n: int
    ln_z: float
    model: str = MODEL_SERIES

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if not math.isfinite(self.ln_z):
            raise ValueError("ln Z must be finite")
        if self.model not in MODELS:
            raise ValueError("unknown model tag %r" % self.model)

    @property
    def ln_n(self):
        return ln_big(self.n)


def scaled_value(point):
    """(ln Z + ln(n+1)) / ln^2 n; needs ln^2 n > 1, i.e. n >= 3."""
    if point.n < 3:
        raise ValueError("scaled value needs n >= 3")
    ln_n = point.ln_n
    return (point.ln_z + ln_big(point.n + 1)) / ln_n**2


def fixed_expansion_part(ln_n):
    """The frozen (non-fitted) terms of the structured fit."""
    return SCALING_CONSTANT + COEFF_INV_LN / ln_n + COEFF_INV_LN2 / ln_n**2


def loglog_basis(ln_n):
    lnln = math.log(ln_n)
    return (lnln / ln_n, lnln / ln_n**2, lnln**2 / ln_n**2)


@dataclass
class FitResult:
    c1: float
    c2: float
    c3: float
    residual_norm: float
    condition: float

    def predict(self, ln_n):
        b = loglog_basis(ln_n)
        return fixed_expansion_part(ln_n) + self.c1 * b[0] + self.c2 * b[1] + self.c3 * b[2]


def fit_loglog(points):
    """Least squares for the three log-log amplitudes on scaled data.

    Needs at least 6 points spanning at least 3 dyadic decades; raises on
    a rank-deficient design matrix (with its condition number).
    """
    pts = list(points)
    if len(pts) < 6:
        raise ValueError("need at least 6 points")
    ln_ns = [p.ln_n for p in pts]
    if max(ln_ns) - min(ln_ns) < 3 * math.log(2) - 1e-9:
        raise ValueError("points must span at least 3 dyadic decades")
    A = np.array([loglog_basis(ln) for ln in ln_ns])
    y = np.array([scaled_value(p) - fixed_expansion_part(ln) for p, ln in zip(pts, ln_ns)])
    coef, _, rank, sv = np.linalg.lstsq(A, y, rcond=None)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf
    if rank < 3:
        raise ValueError("rank-deficient design matrix (rank %d, condition %.3g)" % (rank, cond))
    resid = float(np.linalg.norm(A @ coef - y))
    return FitResult(c1=float(coef[0]), c2=float(coef[1]), c3=float(coef[2]), residual_norm=resid, condition=cond)


def single_constant_residual(points):
    """Residual norm of the best fit with one overall constant offset
    (goodness-of-fit baseline for the structured fit)."""
    pts = list(points)
    y = np.array([scaled_value(p) - fixed_expansion_part(p.ln_n) for p in pts])
    return float(np.linalg.norm(y - y.mean()))


def naive_fit(points):
    """OLS of -ln<L_n> against ln^2 n; returns (intercept, slope).

    `points` are (n, neg_ln_mean) pairs with neg_ln_mean = -ln<L_n>
    (finite, so the underlying mean is positive).
    """
    pts = list(points)
    if len(pts) < 3:
        raise ValueError("need at least 3 points")
    x = np.array([math.log(n) ** 2 for n, _ in pts])
    y = np.array([v for _, v in pts])
    if not np.all(np.isfinite(y)):
        raise ValueError("every point needs a finite -ln<L>")
    slope, intercept = np.polyfit(x, y, 1)
    return float(intercept), float(slope)
