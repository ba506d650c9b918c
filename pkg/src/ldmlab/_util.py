"""Small shared numeric helpers."""

import math
from fractions import Fraction

LN2 = math.log(2.0)


def ln_big(x):
    """Natural log of a positive python int, exact to ~53 bits.

    Uses bit length plus the top 64 bits, so it works far beyond the
    float range (math.log overflows above 2**1024 on some inputs).
    """
    if x <= 0:
        raise ValueError("ln_big needs a positive integer")
    nbits = x.bit_length()
    if nbits <= 64:
        return math.log(x)
    shift = nbits - 64
    return math.log(x >> shift) + shift * LN2


def frac_to_float(num, den):
    """Round num/den (big ints) correctly to a float."""
    return float(Fraction(num, den))


def ratio_array(samples, total, trials):
    """samples[i] * trials / total as floats, exact to 2**-64."""
    scale = 1 << 64
    return [((s * trials * scale) // total) / scale for s in samples]
