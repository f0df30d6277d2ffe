"""Response of a laser-modulated ion acting as a two-level detector.

To lowest order the excitation probability of ion m is

    A_m = (Omega0 eta)^2 sum_p [b_m^(p)]^2 / sqrt(mu_p)
          * | int dchi F(chi) exp(-i Delta t(chi)) exp(-i nu_p chi) |^2

:func:`response_numeric` evaluates the mode integrals by quadrature for any
scale factor.  For de Sitter expansion with a sharp window the integrals are
incomplete gamma functions, giving the closed forms in
:func:`response_desitter_infinite` and :func:`response_desitter_finite`.
Frequencies are in units of the trap frequency nu, times in 1/nu.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .cosmo import ScaleFactorModel, WindowSpec, build_conformal_map
from .errors import DomainError, QuadratureError
from .numerics import QuadratureSettings, integrate_complex
from .specfun import gamma, regularized_q

METHODS = ("numeric", "analytic_infinite", "analytic_finite")
EXTENSION_NOTE = "detector-picture extension (n > 2)"
# guard against windows with more oscillations than quadrature can follow
MAX_PANELS = 2_000_000


@dataclass(frozen=True)
class DetectorSpec:
    """Which ion is probed and how the laser is driven.

    ``detuning`` is Delta = omega_A - omega_L in units of nu: positive values
    probe the red sideband, negative ones the blue sideband.  ``coupling`` is
    the product Omega0 * eta and only sets the overall scale.
    """

    ion_index: int = 1
    detuning: float = 1.0
    coupling: float = 1.0
    n_dim: int = 2
    window: WindowSpec = field(default_factory=WindowSpec)

    def __post_init__(self):
        if int(self.ion_index) != self.ion_index or self.ion_index < 1:
            raise ValueError("ion_index must be a positive integer")
        if self.detuning == 0 or not math.isfinite(self.detuning):
            raise ValueError("detuning must be finite and nonzero")
        if not self.coupling > 0:
            raise ValueError("coupling must be positive")
        if int(self.n_dim) != self.n_dim or self.n_dim < 2:
            raise ValueError("n_dim must be an integer >= 2")

    def with_detuning(self, detuning):
        return DetectorSpec(self.ion_index, detuning, self.coupling, self.n_dim, self.window)


@dataclass(frozen=True, eq=False)
class ResponseResult:
    total: float
    per_mode: np.ndarray
    quadrature_error: float
    method: str
    notes: tuple = ()

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")


def gibbons_hawking_temperature(kappa):
    """T_GH = kappa / 2 pi (natural units, kappa in units of nu)."""
    return kappa / (2.0 * math.pi)


def _bose(x):
    # 1 / (e^x - 1) without overflow for large positive x
    if x > 0:
        return math.exp(-x) / -math.expm1(-x)
    return 1.0 / math.expm1(x)


def _thermal_prefactor(coupling, kappa, detuning):
    beta = detuning / kappa
    return coupling**2 / (kappa * detuning) * 2.0 * math.pi * _bose(2.0 * math.pi * beta)


def _result(per_mode, method, error=0.0, notes=()):
    per_mode = np.asarray(per_mode, dtype=float)
    return ResponseResult(float(np.sum(per_mode)), per_mode, float(error), method, tuple(notes))


def _oscillation_breakpoints(t_lo, t_hi, rate, min_rate=0.0):
    """Panel edges no wider than a quarter period of ``rate(t)``.

    ``min_rate`` is a known lower bound on the rate, used to give up early.
    """
    quarter = 0.5 * math.pi
    if (t_hi - t_lo) * min_rate / quarter > MAX_PANELS:
        _too_many_panels(t_lo, t_hi)
    edges = [t_lo]
    t = t_lo
    while t < t_hi:
        h = quarter / rate(t)
        h = quarter / max(rate(t), rate(min(t + h, t_hi)))
        t = min(t + h, t_hi)
        edges.append(t)
        if len(edges) > MAX_PANELS:
            _too_many_panels(t_lo, t_hi)
    return edges


def _too_many_panels(t_lo, t_hi):
    raise QuadratureError(
        f"window [{t_lo}, {t_hi}] needs more than {MAX_PANELS} panels; "
        "use the closed form or a shorter window")


def response_numeric(modes, spec, model, cmap, settings=None):
    """Excitation probability by direct quadrature of the mode integrals.

    The chi-integral is pulled back to cosmic time with d chi = dt / a(t), so
    each mode contributes

        int dt f(t) a(t)^((4 - n)/2) / a(t) exp(-i Delta t - i nu_p chi(t)),

    which is smooth where the conformal-time form has the de Sitter horizon
    at chi -> 0-.  Panels are pre-split to a quarter period of the local
    phase rate |Delta| + nu_p / a(t) before adaptive refinement.

    Parameters
    ----------
    modes : NormalModes
    spec : DetectorSpec
    model : ScaleFactorModel
    cmap : ConformalMap
        Must cover the window [t_init, t_final].
    settings : QuadratureSettings, optional
        Tolerances for each mode amplitude (default rel 1e-9).

    Returns
    -------
    ResponseResult
        ``quadrature_error`` bounds the error of ``total`` propagated from the
        amplitude error estimates.
    """
    settings = settings or QuadratureSettings()
    window = spec.window
    lo, hi = cmap.domain
    if window.t_init < lo or window.t_final > hi:
        raise DomainError(
            f"window [{window.t_init}, {window.t_final}] not inside map domain {cmap.domain}")
    weights = modes.mode_weights(spec.ion_index)
    delta = spec.detuning
    power = (4.0 - spec.n_dim) / 2.0 - 1.0

    def a_of(t):
        return float(model.scale_factor(t))

    per_mode = np.empty(modes.n_ions)
    error = 0.0
    for p, nu_p in enumerate(modes.frequencies):
        def integrand(t, nu_p=nu_p):
            envelope = window(t) * model.scale_factor(t) ** power
            return envelope * np.exp(-1j * (delta * t + nu_p * cmap.forward(t)))

        def rate(t, nu_p=nu_p):
            return abs(delta) + nu_p / a_of(t)

        edges = _oscillation_breakpoints(window.t_init, window.t_final, rate, abs(delta))
        edges = sorted(set(edges).union(window.breakpoints()))
        amp, amp_err = integrate_complex(integrand, window.t_init, window.t_final,
                                         settings, breakpoints=edges[1:-1])
        scale = spec.coupling**2 * weights[p]
        per_mode[p] = scale * abs(amp) ** 2
        error += scale * (2.0 * abs(amp) * amp_err + amp_err**2)

    notes = (EXTENSION_NOTE,) if spec.n_dim > 2 else ()
    return _result(per_mode, "numeric", error, notes)


def _require_two_dim(spec):
    if spec.n_dim != 2:
        raise ValueError("the de Sitter closed forms hold for n_dim = 2 only")


def response_desitter_infinite(modes, spec, kappa):
    """Always-on de Sitter detector: a Planck spectrum at T = kappa / 2 pi.

    A_m = (Omega0 eta)^2 / (kappa Delta) * 2 pi / (exp(2 pi Delta / kappa) - 1)
          * sum_p [b_m^(p)]^2 / sqrt(mu_p)
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    _require_two_dim(spec)
    weights = modes.mode_weights(spec.ion_index)
    prefactor = _thermal_prefactor(spec.coupling, kappa, spec.detuning)
    return _result(prefactor * weights, "analytic_infinite")


def _q_difference(beta, alpha, t_init, t_final, kappa):
    z = 1j * beta
    q_final = regularized_q(z, -1j * alpha * math.exp(-kappa * t_final))
    q_init = regularized_q(z, -1j * alpha * math.exp(-kappa * t_init))
    return q_final - q_init


def response_desitter_finite(modes, spec, kappa, t_init, t_final):
    """De Sitter detector switched on sharply at t_init and off at t_final.

    Each mode integral is a difference of upper incomplete gamma functions;
    in terms of Q(z, b) = Gamma(z, b) / Gamma(z)

        A_m = (Omega0 eta)^2 / (kappa Delta) * 2 pi / (exp(2 pi Delta / kappa) - 1)
              * sum_p [b_m^(p)]^2 / sqrt(mu_p)
                * | Q(i Delta/kappa, -i (nu_p/kappa) e^{-kappa t_final})
                    - Q(i Delta/kappa, -i (nu_p/kappa) e^{-kappa t_init}) |^2

    ``t_final == t_init`` gives an empty window and zero response.
    """
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    if t_final < t_init:
        raise ValueError("need t_final >= t_init")
    _require_two_dim(spec)
    weights = modes.mode_weights(spec.ion_index)
    beta = spec.detuning / kappa
    alphas = modes.frequencies / kappa
    r_terms = np.array([
        abs(_q_difference(beta, alpha, t_init, t_final, kappa)) ** 2 for alpha in alphas])
    prefactor = _thermal_prefactor(spec.coupling, kappa, spec.detuning)
    return _result(prefactor * weights * r_terms, "analytic_finite")


def thermal_integral(kappa, detuning, mode_frequency):
    """Per-mode amplitude of the always-on de Sitter detector.

    (1/kappa) int_0^inf du u^(i beta - 1) e^(i alpha u), beta = Delta / kappa,
    alpha = nu_p / kappa.  With the convergence factors alpha -> alpha + i0,
    beta -> beta - i0 this is Gamma(i beta) alpha^(-i beta) e^(-pi beta / 2) / kappa;
    the rotation of (-i alpha)^(i beta) is applied in closed form.
    """
    if not (kappa > 0 and mode_frequency > 0):
        raise ValueError("kappa and mode_frequency must be positive")
    if detuning == 0:
        raise ValueError("detuning must be nonzero")
    beta = detuning / kappa
    alpha = mode_frequency / kappa
    return gamma(1j * beta) * cmath.exp(-1j * beta * math.log(alpha)) \
        * math.exp(-0.5 * math.pi * beta) / kappa


def ratio_signature(modes, spec, kappa, t_init, t_final):
    """Red/blue sideband ratio A_m(Delta) / A_m(-Delta) for a finite window.

    Equals exp(-2 pi Delta / kappa) * R(Delta) / R(-Delta).
    """
    red = response_desitter_finite(modes, spec, kappa, t_init, t_final)
    blue = response_desitter_finite(modes, spec.with_detuning(-spec.detuning),
                                    kappa, t_init, t_final)
    if blue.total < 1e-300:
        raise ZeroDivisionError(
            f"blue-sideband response {blue.total!r} too small to form a ratio")
    return red.total / blue.total


ORACLE_KAPPAS = (0.05, 0.2, 0.5)
ORACLE_DETUNINGS = (-2.0, -1.0, -0.5, 0.5, 1.0, 2.0)
ORACLE_DURATIONS = (2.0, 5.0, 10.0)  # kappa * T


def oracle_equivalence(modes, ion_index=1, settings=None, kappas=ORACLE_KAPPAS,
                       detunings=ORACLE_DETUNINGS, durations=ORACLE_DURATIONS):
    """Quadrature against the incomplete-gamma closed form on a de Sitter grid.

    Yields ``(kappa, detuning, kappa_T, numeric_total, analytic_total,
    relative_gap)`` for windows [0, T].
    """
    for kappa in kappas:
        model = ScaleFactorModel.de_sitter(kappa)
        cmap = build_conformal_map(model)
        for detuning in detunings:
            for kappa_t in durations:
                t_final = kappa_t / kappa
                spec = DetectorSpec(ion_index, detuning, 1.0, 2, WindowSpec(0.0, t_final))
                num = response_numeric(modes, spec, model, cmap, settings).total
                exact = response_desitter_finite(modes, spec, kappa, 0.0, t_final).total
                yield kappa, detuning, kappa_t, num, exact, abs(num - exact) / exact
