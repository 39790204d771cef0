"""
Approximations of the modified Bessel functions I0 (polynomial) and K0 (series and Chebyshev).
"""

from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike

from .constants import EULER_GAMMA

# Coefficients in ascending powers, evaluated with Horner's scheme.
_I0_SMALL = (1.0, 3.5156229, 3.0899424, 1.2067492, 0.2659732, 0.0360768, 0.0045813)
_I0_LARGE = (
    0.39894228, 0.01328592, 0.00225319, -0.00157565, 0.00916281,
    -0.02057706, 0.02635537, -0.01647633, 0.00392377,
)
# Chebyshev coefficients of exp(x) sqrt(x) K0(x) in t = 8/x - 2, x > 2, leading term first.
_K0_CHEBYSHEV = (
    5.30043377268626276149e-18, -1.64758043015242134646e-17, 5.21039150503902756861e-17,
    -1.67823109680541210385e-16, 5.51205597852431940784e-16, -1.84859337734377901440e-15,
    6.34007647740507060557e-15, -2.22751332699166985548e-14, 8.03289077536357521100e-14,
    -2.98009692317273043925e-13, 1.14034058820847496303e-12, -4.51459788337394416547e-12,
    1.85594911495471785253e-11, -7.95748924447710747776e-11, 3.57739728140030116597e-10,
    -1.69753450938905987466e-9, 8.57403401741422608519e-9, -4.66048989768794782956e-8,
    2.76681363944501510342e-7, -1.83175552271911948767e-6, 1.39498137188764993662e-5,
    -1.28495495816278026384e-4, 1.56988388573005337491e-3, -3.14481013119645005427e-2,
    2.44030308206595545468e0,
)
_K0_SERIES_TERMS = 30


def _horner(coefficients: Sequence[float], t: np.ndarray) -> np.ndarray:
    """Evaluate sum(coefficients[k] * t**k)."""
    result = np.full_like(t, coefficients[-1])
    for coefficient in reversed(coefficients[:-1]):
        result = result * t + coefficient
    return result


def _chebyshev(coefficients: Sequence[float], t: np.ndarray) -> np.ndarray:
    """Clenshaw recurrence for a Chebyshev series stored leading term first, halved c0."""
    b0 = np.full_like(t, coefficients[0])
    b1 = np.zeros_like(t)
    b2 = np.zeros_like(t)
    for coefficient in coefficients[1:]:
        b2 = b1
        b1 = b0
        b0 = t * b1 - b2 + coefficient
    return 0.5 * (b0 - b2)


def _k0_series(x: np.ndarray) -> np.ndarray:
    """Power series -(log(x/2) + gamma) I0(x) + sum q^k H_k / (k!)^2, q = x^2/4."""
    q = 0.25 * x * x
    term = np.ones_like(x)
    i0 = np.ones_like(x)
    tail = np.zeros_like(x)
    harmonic = 0.0
    for k in range(1, _K0_SERIES_TERMS + 1):
        term = term * q / (k * k)
        harmonic += 1.0 / k
        i0 = i0 + term
        tail = tail + harmonic * term
    with np.errstate(divide='ignore'):
        return -(np.log(0.5 * x) + EULER_GAMMA) * i0 + tail


def bessel_i0(x: ArrayLike) -> np.ndarray:
    """
    Modified Bessel function of the first kind, order zero.

    Args:
        x: Real argument(s)

    Returns:
        I0(x), same shape as x
    """
    shape = np.shape(x)
    ax = np.abs(np.atleast_1d(np.asarray(x, dtype=float)))
    small = ax <= 3.75
    out = np.empty_like(ax)
    t = (ax[small] / 3.75) ** 2
    out[small] = _horner(_I0_SMALL, t)
    big = ax[~small]
    out[~small] = np.exp(big) / np.sqrt(big) * _horner(_I0_LARGE, 3.75 / big)
    return out.reshape(shape)


def bessel_k0(x: ArrayLike) -> np.ndarray:
    """
    Modified Bessel function of the second kind, order zero.

    Up to x = 2 the power series carries the -log(x/2) I0(x) singularity explicitly;
    beyond, a Chebyshev expansion in 8/x - 2 multiplies exp(-x)/sqrt(x). Both are accurate
    to about 1e-14 relative.

    Args:
        x: Positive argument(s)

    Returns:
        K0(x), same shape as x; +inf at 0
    """
    shape = np.shape(x)
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa < 0):
        raise ValueError("K0 is defined for nonnegative arguments only")
    out = np.empty_like(xa)
    small = xa <= 2.0
    out[small] = _k0_series(xa[small])
    xl = xa[~small]
    out[~small] = np.exp(-xl) / np.sqrt(xl) * _chebyshev(_K0_CHEBYSHEV, 8.0 / xl - 2.0)
    return out.reshape(shape)
