"""Independent reference computations shared by the test modules."""

import math

import numpy as np

from trapcosmo.numerics import QuadratureSettings, integrate_complex


def damped_thermal_integral(kappa, detuning, mode_frequency, eps):
    """(1/kappa) int_0^inf u^(i beta - 1) e^((i alpha - eps) u) du by brute force."""
    beta, alpha = detuning / kappa, mode_frequency / kappa
    c = 1j * alpha - eps
    s0 = -20.0
    upper = 2000.0 / alpha
    quarter = 0.5 * math.pi / alpha
    edges = np.log(np.arange(quarter, upper, quarter))
    edges = edges[edges > s0]

    def f(s):
        return np.exp(1j * beta * s) * np.exp(c * np.exp(s))

    body, _ = integrate_complex(f, s0, math.log(upper), QuadratureSettings(rel_tol=1e-11),
                                breakpoints=np.concatenate((np.arange(s0 + 1, edges[0], 1.0), edges)))
    # beta -> beta - i0 limit of the piece below u0 = e^s0
    head = np.exp(s0 * 1j * beta) / (1j * beta)
    g = upper ** (1j * beta - 1)
    dg = (1j * beta - 1) * upper ** (1j * beta - 2)
    tail = np.exp(c * upper) * (-g / c + dg / c**2)
    return (body + head + tail) / kappa
