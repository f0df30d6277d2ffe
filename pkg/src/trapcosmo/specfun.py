"""Complex gamma and upper incomplete gamma functions.

Only what the de Sitter closed forms need: Γ(z) for complex z (purely
imaginary arguments included), Γ(z, b) and Q(z, b) = Γ(z, b) / Γ(z).
Everything is on the principal branch, with ``b**z = exp(z * log(b))``.
"""

from __future__ import annotations

import cmath
import math

from .errors import ConvergenceError, PoleError

# Lanczos coefficients, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)

POLE_TOL = 1e-14
MAX_ITER = 10_000
_EPS = 2.220446049250313e-16
_TINY = 1e-300


def _sinpi_complex(z):
    # sin(pi z) with the real part reduced first, so zeros at the integers
    # are hit exactly rather than through pi * k rounding.
    x, y = z.real, z.imag
    n = round(x)
    r = x - n
    sign = -1.0 if n % 2 else 1.0
    s = math.sin(math.pi * r)
    c = math.cos(math.pi * r)
    py = math.pi * y
    return sign * complex(s * math.cosh(py), c * math.sinh(py))


def _check_pole(z):
    if z.real <= 0.5 and abs(z.imag) <= POLE_TOL:
        k = round(z.real)
        if k <= 0 and abs(z.real - k) <= POLE_TOL:
            raise PoleError(f"gamma has a pole at z={z!r}")


def gamma(z):
    """Complex gamma function Γ(z).

    Lanczos approximation for Re z >= 1/2, reflection formula below that.

    Raises
    ------
    PoleError
        If ``z`` lies within 1e-14 of 0, -1, -2, ...
    """
    z = complex(z)
    _check_pole(z)
    if z.real < 0.5:
        return math.pi / (_sinpi_complex(z) * gamma(1.0 - z))
    w = z - 1.0
    acc = _LANCZOS_COEF[0]
    for k in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[k] / (w + k)
    t = w + _LANCZOS_G + 0.5
    return _SQRT_2PI * cmath.exp((w + 0.5) * cmath.log(t) - t) * acc


def _lower_series(z, b):
    """γ(z, b) = b^z e^{-b} Σ_k b^k / (z (z+1) ... (z+k))."""
    term = 1.0 / z
    total = term
    for k in range(1, MAX_ITER + 1):
        term *= b / (z + k)
        total += term
        if abs(term) <= _EPS * abs(total):
            return cmath.exp(z * cmath.log(b)) * cmath.exp(-b) * total
    raise ConvergenceError(
        f"incomplete gamma series did not converge for z={z!r}, b={b!r}")


def _upper_continued_fraction(z, b):
    """Γ(z, b) from the Legendre continued fraction, modified Lentz."""
    bk = b + 1.0 - z
    c = 1.0 / _TINY
    d = 1.0 / bk if bk != 0 else 1.0 / _TINY
    h = d
    for i in range(1, MAX_ITER + 1):
        an = -i * (i - z)
        bk += 2.0
        d = an * d + bk
        if abs(d) < _TINY:
            d = _TINY
        c = bk + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) <= _EPS:
            return cmath.exp(z * cmath.log(b)) * cmath.exp(-b) * h
    raise ConvergenceError(
        f"incomplete gamma continued fraction did not converge for "
        f"z={z!r}, b={b!r}")


def upper_incomplete_gamma(z, b):
    """Upper incomplete gamma function Γ(z, b) = ∫_b^∞ x^{z-1} e^{-x} dx.

    The power series for the lower function is used when |b| < |z| + 1, the
    continued fraction otherwise.  For purely imaginary ``b`` the value is
    the one reached by integrating along the ray from ``b`` and rotating it
    onto the positive real axis.

    Raises
    ------
    ValueError
        For ``b == 0`` with Re z <= 0, where the integral diverges (Re z < 0)
        or only oscillates without a limit (Re z = 0).
    PoleError
        When the series branch needs Γ(z) at a pole.
    ConvergenceError
        If neither branch converges within 10 000 iterations.
    """
    z = complex(z)
    b = complex(b)
    if not (cmath.isfinite(z) and cmath.isfinite(b)):
        raise ValueError("non-finite argument")
    if b == 0:
        if z.real <= 0:
            raise ValueError(
                f"Γ(z, 0) does not converge for Re z <= 0 (z={z!r})")
        return gamma(z)
    if abs(b) < abs(z) + 1.0:
        return gamma(z) - _lower_series(z, b)
    try:
        return _upper_continued_fraction(z, b)
    except ConvergenceError:
        # the fraction stalls near the negative real axis; the series still
        # converges there, just slowly
        return gamma(z) - _lower_series(z, b)


def regularized_q(z, b):
    """Q(z, b) = Γ(z, b) / Γ(z)."""
    return upper_incomplete_gamma(z, b) / gamma(z)
