"""Adaptive quadrature and bracketing root finding.

The quadrature is a global adaptive Gauss-Kronrod 7-15 scheme: the interval
with the largest error estimate is bisected until the summed estimate meets
the tolerance.  Integrands are evaluated on all 15 nodes of a panel at once,
so ``f`` must accept a numpy array.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import NoSignChangeError, QuadratureError

# Kronrod abscissae on [-1, 1] (non-negative half, descending) and weights.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
# Gauss weights for the 7-point rule, living on _XGK[1], _XGK[3], _XGK[5], _XGK[7].
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KWEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[[1, 3, 5]] = _WG[:3]
_GWEIGHTS[[13, 11, 9]] = _WG[:3]
_GWEIGHTS[7] = _WG[3]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureSettings:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-14
    max_depth: int = 60

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")


def gauss_kronrod_15(f, a, b):
    """Apply the 7-15 rule pair once on [a, b].

    Returns ``(kronrod, error, resabs)`` where ``error = |K15 - G7|`` and
    ``resabs`` is the Kronrod estimate of the integral of ``|f|``, used for the
    round-off floor.
    """
    half = 0.5 * (b - a)
    centre = 0.5 * (a + b)
    values = np.asarray(f(centre + half * _NODES), dtype=complex)
    kronrod = half * np.dot(_KWEIGHTS, values)
    gauss = half * np.dot(_GWEIGHTS, values)
    resabs = abs(half) * np.dot(_KWEIGHTS, np.abs(values))
    return kronrod, abs(kronrod - gauss), resabs


def integrate_complex(f, a, b, settings=None, breakpoints=None):
    """Integrate a complex-valued function over a finite interval.

    Parameters
    ----------
    f : callable
        Vectorised integrand, ``f(x: ndarray) -> complex ndarray``.
    a, b : float
        Finite limits with ``a < b``.  Infinite ranges must be mapped to a
        finite one by the caller.
    settings : QuadratureSettings, optional
    breakpoints : sequence of float, optional
        Interior points that seed the initial panel split, e.g. window edges
        or a grid fine enough to resolve the fastest oscillation.

    Returns
    -------
    value : complex
    error : float
        Sum of the per-panel ``|K15 - G7|`` estimates (with a round-off floor).

    Raises
    ------
    QuadratureError
        If a panel needing refinement is already ``max_depth`` bisections deep.
        The best estimate is attached.
    """
    settings = settings or QuadratureSettings()
    a = float(a)
    b = float(b)
    if not np.isfinite(a) or not np.isfinite(b):
        raise ValueError("integration limits must be finite")
    if not a < b:
        raise ValueError(f"need a < b, got a={a}, b={b}")

    edges = [a]
    if breakpoints is not None:
        edges.extend(sorted(float(x) for x in breakpoints if a < x < b))
    edges.append(b)

    heap = []
    total = 0j
    total_err = 0.0
    # Entries are (-err, seq, lo, hi, value, err, floor, depth); seq keeps
    # ordering deterministic when errors tie.
    seq = 0
    # all seed panels in one vectorised call
    edges = np.unique(np.asarray(edges))
    los, his = edges[:-1], edges[1:]
    halves = 0.5 * (his - los)
    nodes = (0.5 * (los + his))[:, None] + halves[:, None] * _NODES
    values = np.asarray(f(nodes.ravel()), dtype=complex).reshape(nodes.shape)
    kronrods = halves * (values @ _KWEIGHTS)
    gausses = halves * (values @ _GWEIGHTS)
    resabss = np.abs(halves) * (np.abs(values) @ _KWEIGHTS)
    for lo, hi, value, gauss, resabs in zip(los, his, kronrods, gausses, resabss):
        floor = 50.0 * _EPS * resabs
        err = max(abs(value - gauss), floor)
        heapq.heappush(heap, (-err, seq, float(lo), float(hi), complex(value),
                              err, floor, 0))
        seq += 1
        total += value
        total_err += err

    while heap:
        tol = max(settings.abs_tol, settings.rel_tol * abs(total))
        if total_err <= tol:
            break
        _, _, lo, hi, value, err, floor, depth = heap[0]
        if err <= floor:
            # worst panel is already at round-off; bisecting cannot help
            break
        if depth >= settings.max_depth:
            raise QuadratureError(
                f"max depth {settings.max_depth} reached on [{lo!r}, {hi!r}]; "
                f"achieved error {total_err:.3g} vs tolerance {tol:.3g}",
                estimate=total, error=total_err)
        heapq.heappop(heap)
        total -= value
        total_err -= err
        mid = 0.5 * (lo + hi)
        for sub_lo, sub_hi in ((lo, mid), (mid, hi)):
            sub_val, sub_err, sub_abs = gauss_kronrod_15(f, sub_lo, sub_hi)
            sub_floor = 50.0 * _EPS * sub_abs
            sub_err = max(sub_err, sub_floor)
            heapq.heappush(heap, (-sub_err, seq, sub_lo, sub_hi, sub_val,
                                  sub_err, sub_floor, depth + 1))
            seq += 1
            total += sub_val
            total_err += sub_err

    # Re-sum in a fixed order so the result does not depend on the
    # accumulated rounding of the add/subtract bookkeeping above.
    panels = sorted(heap, key=lambda entry: entry[2])
    total = sum((entry[4] for entry in panels), 0j)
    total_err = float(sum(entry[5] for entry in panels))
    return complex(total), total_err


def find_root_monotone(f, lo, hi, tol=1e-12):
    """Root of a monotone function on a sign-changing bracket.

    The bracket is shrunk (Brent's method) until its width is below ``tol``.
    """
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if np.sign(flo) == np.sign(fhi):
        raise NoSignChangeError(
            f"f({lo!r})={flo!r} and f({hi!r})={fhi!r} have the same sign")
    return float(brentq(f, lo, hi, xtol=tol, rtol=4 * _EPS, maxiter=500))


def adaptive_simpson(f, a, b, rel_tol=1e-10, max_depth=30):
    """Adaptive Simpson quadrature of a real scalar function on [a, b].

    The tolerance is relative to the coarse Simpson estimate of the whole
    interval and is halved at every bisection.
    """
    def simpson(fa, fm, fb, h):
        return h / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        flm = f(0.5 * (a + m))
        frm = f(0.5 * (m + b))
        left = simpson(fa, flm, fm, m - a)
        right = simpson(fm, frm, fb, b - m)
        delta = left + right - whole
        if depth >= max_depth or abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return (recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
                + recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1))

    if a == b:
        return 0.0
    fa, fb = f(a), f(b)
    fm = f(0.5 * (a + b))
    whole = simpson(fa, fm, fb, b - a)
    tol = rel_tol * max(abs(whole), np.finfo(float).tiny)
    return recurse(a, b, fa, fm, fb, whole, tol, 0)
