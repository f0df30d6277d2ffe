"""Scale factors, conformal-time maps and detector-picture schedules.

Cosmic time ``t`` and conformal (laboratory) time ``chi`` are related by
d chi = dt / a(t).  In the detector picture the ion chain is left alone and
the whole expansion is pushed into the laser: the detector gap becomes
a(t(chi)) * Delta and the window picks up a(t(chi))**((4 - n) / 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import PchipInterpolator

from .errors import DomainError
from .numerics import adaptive_simpson, find_root_monotone

KINDS = ("flat", "de_sitter", "power_law", "tabulated")
SHAPES = ("rectangular", "tukey")
DEFAULT_RAMP_FRACTION = 0.05

# relative slack allowed at domain edges before an evaluation is rejected
_EDGE_SLACK = 1e-12

_GL_NODES, _GL_WEIGHTS = leggauss(16)


@dataclass(frozen=True)
class ScaleFactorModel:
    """An FLRW scale factor a(t).

    Times are in units of 1/nu and ``kappa`` in units of nu.  ``exponent`` and
    ``t0`` describe a(t) = (t / t0)**exponent.  A tabulated model carries
    strictly positive samples ``table = ((t, a), ...)`` and optionally the
    point ``anchor = (t, chi)`` that fixes the integration constant.
    """

    kind: str = "flat"
    kappa: float = 0.0
    exponent: float = 0.0
    t0: float = 1.0
    table: tuple | None = None
    anchor: tuple | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scale factor kind {self.kind!r}")
        if self.kind == "de_sitter" and not self.kappa > 0:
            raise ValueError("de Sitter model needs kappa > 0")
        if self.kind == "power_law" and not self.t0 > 0:
            raise ValueError("power-law model needs t0 > 0")
        if self.kind == "tabulated":
            if self.table is None or len(self.table) < 2:
                raise ValueError("tabulated model needs at least two samples")
            t, a = np.asarray(self.table, dtype=float).T
            if np.any(np.diff(t) <= 0):
                raise ValueError("tabulated times must be strictly increasing")
            if np.any(a <= 0) or not np.all(np.isfinite(a)):
                raise ValueError("nonpositive scale factor in table")
            object.__setattr__(
                self, "table", tuple((float(x), float(y)) for x, y in zip(t, a)))

    @classmethod
    def flat(cls):
        return cls("flat")

    @classmethod
    def de_sitter(cls, kappa):
        return cls("de_sitter", kappa=float(kappa))

    @classmethod
    def power_law(cls, exponent, t0=1.0):
        return cls("power_law", exponent=float(exponent), t0=float(t0))

    @classmethod
    def tabulated(cls, t, a, anchor=None):
        table = tuple(zip(np.asarray(t, float).tolist(), np.asarray(a, float).tolist()))
        if anchor is not None:
            anchor = (float(anchor[0]), float(anchor[1]))
        return cls("tabulated", table=table, anchor=anchor)

    @property
    def natural_domain(self):
        """Largest t-interval on which a(t) is defined."""
        if self.kind == "power_law":
            return (0.0, math.inf)
        if self.kind == "tabulated":
            return (self.table[0][0], self.table[-1][0])
        return (-math.inf, math.inf)

    @cached_property
    def _log_a(self):
        t, a = np.asarray(self.table).T
        return PchipInterpolator(t, np.log(a), extrapolate=False)

    def scale_factor(self, t):
        """a(t), vectorised over ``t``."""
        t = np.asarray(t, dtype=float)
        if self.kind == "flat":
            return np.ones_like(t)
        if self.kind == "de_sitter":
            return np.exp(self.kappa * t)
        lo, hi = self.natural_domain
        if self.kind == "power_law":
            if np.any(t <= 0):
                raise DomainError("power-law scale factor needs t > 0")
            return (t / self.t0) ** self.exponent
        if np.any((t < lo) | (t > hi)):
            raise DomainError(f"t outside the tabulated range [{lo}, {hi}]")
        return np.exp(self._log_a(t))


class ConformalMap:
    """Monotone map t -> chi on a t-interval, with its inverse.

    Built by :func:`build_conformal_map`.  ``forward``, ``inverse`` and
    ``derivative`` accept scalars or arrays and raise :class:`DomainError`
    outside the configured interval instead of extrapolating.
    """

    def __init__(self, model, domain, forward, inverse, derivative):
        self.model = model
        self.domain = domain
        self._forward = forward
        self._inverse = inverse
        self._derivative = derivative
        self.chi_domain = (float(forward(np.float64(domain[0]))),
                           float(forward(np.float64(domain[1]))))

    def __repr__(self):
        return f"ConformalMap({self.model.kind}, t in {self.domain})"

    @staticmethod
    def _clip(x, lo, hi, name):
        x = np.asarray(x, dtype=float)
        slack_lo = _EDGE_SLACK * max(1.0, abs(lo)) if math.isfinite(lo) else 0.0
        slack_hi = _EDGE_SLACK * max(1.0, abs(hi)) if math.isfinite(hi) else 0.0
        if np.any(np.isnan(x)) or np.any(x < lo - slack_lo) or np.any(x > hi + slack_hi):
            raise DomainError(f"{name} outside the map domain [{lo}, {hi}]")
        return np.clip(x, lo, hi)

    def _out(self, value):
        return float(value) if np.ndim(value) == 0 else value

    def forward(self, t):
        t = self._clip(t, *self.domain, "t")
        return self._out(self._forward(t))

    def inverse(self, chi):
        chi = self._clip(chi, *self.chi_domain, "chi")
        return self._out(self._inverse(chi))

    def derivative(self, t):
        """d chi / dt = 1 / a(t)."""
        t = self._clip(t, *self.domain, "t")
        return self._out(self._derivative(t))

    def scale_factor_at_chi(self, chi):
        """Omega(chi) = a(t(chi))."""
        return self._out(self.model.scale_factor(self.inverse(chi)))


def _open_interval_ok(domain, natural):
    lo, hi = domain
    nlo, nhi = natural
    if not lo < hi:
        return False
    if nlo == 0.0:  # power law: t must stay strictly positive
        return lo > 0 and hi <= nhi
    return lo >= nlo and hi <= nhi


def build_conformal_map(model, domain=None):
    """Conformal-time map for ``model`` on the t-interval ``domain``.

    Integration constants: de Sitter has chi(0) = -1/kappa, flat has
    chi(0) = 0, a power law has chi(t0) = 0 and a tabulated model uses its
    ``anchor`` (default: chi = 0 at the first sample).

    Closed forms are used except for tabulated models, where log a(t) is
    interpolated with a monotone cubic, 1/a is integrated between samples
    by adaptive Simpson quadrature and the inverse is found by bracketing.
    """
    natural = model.natural_domain
    if domain is None:
        if model.kind == "power_law":
            raise ValueError("power-law maps need an explicit domain with t > 0")
        domain = natural
    domain = (float(domain[0]), float(domain[1]))
    if not _open_interval_ok(domain, natural):
        raise DomainError(f"domain {domain} not inside the model domain {natural}")

    if model.kind == "flat":
        return ConformalMap(model, domain, lambda t: t + 0.0, lambda c: c + 0.0,
                            lambda t: np.ones_like(t))

    if model.kind == "de_sitter":
        k = model.kappa
        return ConformalMap(
            model, domain,
            lambda t: -np.exp(-k * t) / k,
            lambda c: -np.log(-k * c) / k,
            lambda t: np.exp(-k * t))

    if model.kind == "power_law":
        q, t0 = model.exponent, model.t0
        if q == 1.0:
            return ConformalMap(
                model, domain,
                lambda t: t0 * np.log(t / t0),
                lambda c: t0 * np.exp(c / t0),
                lambda t: t0 / t)
        p = 1.0 - q
        return ConformalMap(
            model, domain,
            lambda t: t0 ** q * (t ** p - t0 ** p) / p,
            lambda c: (t0 ** p + p * c * t0 ** -q) ** (1.0 / p),
            lambda t: (t0 / t) ** q)

    return _tabulated_map(model, domain)


def _tabulated_map(model, domain):
    log_a = model._log_a
    knots = np.array([row[0] for row in model.table])

    def inv_a(t):
        return math.exp(-float(log_a(t)))

    segments = np.array([adaptive_simpson(inv_a, knots[i], knots[i + 1], rel_tol=1e-12)
                         for i in range(len(knots) - 1)])
    # running sums from each end, so neither side is a difference of large numbers
    cumulative = np.concatenate(([0.0], np.cumsum(segments)))
    remaining = np.concatenate((np.cumsum(segments[::-1])[::-1], [0.0]))

    def pieces(t):
        # integral of 1/a from the knot at or left of t, and from t to the next
        # knot, each by 16-point Gauss-Legendre on one interpolation piece
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(knots, t, side="right") - 1, 0, len(knots) - 2)
        left, right = knots[idx], knots[idx + 1]
        out = []
        for lo, hi in ((left, t), (t, right)):
            half = 0.5 * (hi - lo)
            nodes = (lo + half)[..., None] + half[..., None] * _GL_NODES
            out.append(half * (np.exp(-log_a(nodes)) @ _GL_WEIGHTS))
        from_left = cumulative[idx] + out[0]
        to_right = remaining[idx + 1] + out[1]
        return from_left, to_right

    t_anchor, chi_anchor = model.anchor if model.anchor is not None else (knots[0], 0.0)
    anchor_left, anchor_right = pieces(t_anchor)
    chi_first = chi_anchor - float(anchor_left)
    chi_last = chi_anchor + float(anchor_right)

    def forward(t):
        # measure from whichever table end is closer in integral, with both
        # branches pinned at the anchor; near a de Sitter horizon chi then stays
        # a small number rather than a difference of large ones
        from_left, to_right = pieces(t)
        return np.where(from_left < to_right, chi_first + from_left, chi_last - to_right)

    def inverse(chi):
        chi = np.asarray(chi, dtype=float)
        lo, hi = domain
        out = np.array([
            find_root_monotone(lambda t, c=c: float(forward(t)) - c, lo, hi, tol=1e-12)
            for c in chi.ravel()])
        return out.reshape(chi.shape)

    return ConformalMap(model, domain, forward, inverse,
                        lambda t: np.exp(-log_a(t)))


@dataclass(frozen=True)
class WindowSpec:
    """Detector switching function f(t) in cosmic time.

    ``rectangular`` is the sharp indicator of [t_init, t_final]; ``tukey``
    replaces the edges by raised-cosine ramps, each lasting
    ``ramp_fraction * (t_final - t_init)``.
    """

    t_init: float = 0.0
    t_final: float = 1.0
    shape: str = "rectangular"
    ramp_fraction: float | None = None

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown window shape {self.shape!r}")
        if not self.t_final > self.t_init:
            raise ValueError("window needs t_final > t_init")
        ramp = self.ramp_fraction
        if ramp is None:
            ramp = DEFAULT_RAMP_FRACTION if self.shape == "tukey" else 0.0
        if self.shape == "rectangular" and ramp != 0:
            raise ValueError("rectangular window has no ramp")
        if not 0.0 <= ramp <= 0.5:
            raise ValueError("ramp_fraction must lie in [0, 0.5]")
        object.__setattr__(self, "ramp_fraction", float(ramp))

    @property
    def duration(self):
        return self.t_final - self.t_init

    @property
    def ramp(self):
        return self.ramp_fraction * self.duration

    def breakpoints(self):
        """Points where f(t) is not smooth."""
        pts = [self.t_init, self.t_final]
        if self.ramp > 0:
            pts[1:1] = [self.t_init + self.ramp, self.t_final - self.ramp]
        return sorted(set(pts))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        inside = (t >= self.t_init) & (t <= self.t_final)
        out = inside.astype(float)
        r = self.ramp
        if r > 0:
            rise = inside & (t < self.t_init + r)
            fall = inside & (t > self.t_final - r)
            out = np.where(rise, 0.5 * (1 - np.cos(np.pi * (t - self.t_init) / r)), out)
            out = np.where(fall, 0.5 * (1 - np.cos(np.pi * (self.t_final - t) / r)), out)
        return float(out) if out.ndim == 0 else out


def detuning_schedule(model, cmap, base_detuning):
    """Delta(chi) = a(t(chi)) * Delta."""
    def schedule(chi):
        return cmap.scale_factor_at_chi(chi) * base_detuning
    return schedule


def window_transform(window, model, cmap, n_dim):
    """F(chi) = a(t(chi))**((4 - n) / 2) * f(t(chi))."""
    if int(n_dim) != n_dim or n_dim < 2:
        raise ValueError("n_dim must be an integer >= 2")
    power = (4.0 - n_dim) / 2.0

    def transformed(chi):
        t = cmap.inverse(chi)
        return model.scale_factor(t) ** power * window(t)
    return transformed


def laser_frequency_schedule(model, cmap, base_detuning, atomic_frequency):
    """omega_L(chi) = omega_A - a(t(chi)) * Delta."""
    def schedule(chi):
        return atomic_frequency - cmap.scale_factor_at_chi(chi) * base_detuning
    return schedule


def lamb_dicke_drift(model, cmap, base_detuning, laser_frequency):
    """eta(chi) / eta = 1 - (Delta / omega_L) * (a(t(chi)) - 1)."""
    if not laser_frequency > 0:
        raise ValueError("laser_frequency must be positive")

    def ratio(chi):
        return 1.0 - base_detuning / laser_frequency * (cmap.scale_factor_at_chi(chi) - 1.0)
    return ratio


def modulation_summary(window, model, cmap, base_detuning, n_dim=2):
    """Laser requirements over the detection window.

    Returns the span of the detuning schedule and the growth factor of the
    window amplitude F between switch-on and switch-off (edges of the flat
    part for smooth windows).
    """
    t_on = window.t_init + window.ramp
    t_off = window.t_final - window.ramp
    a_on, a_off = model.scale_factor(np.array([t_on, t_off]))
    power = (4.0 - n_dim) / 2.0
    return {
        "detuning_start": float(a_on * base_detuning),
        "detuning_end": float(a_off * base_detuning),
        "modulation_span": float(abs(a_off - a_on) * abs(base_detuning)),
        "window_growth": float((a_off / a_on) ** power),
    }
