"""Axial normal modes of a linear ion chain.

Lengths are in units of the trap length scale (e^2 / (4 pi eps0 M nu^2))^(1/3)
and frequencies in units of the axial trap frequency nu, so the equilibrium
problem and the coupling matrix depend on the ion number alone.  Physical
units appear only in :func:`lamb_dicke`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import constants

from .errors import ConvergenceError

MAX_IONS = 32
FORCE_TOL = 1e-13
MIN_GAP = 1e-9


@dataclass(frozen=True)
class IonChainConfig:
    """Ion number plus the physical trap parameters.

    ``trap_frequency`` is nu / 2 pi in Hz and ``ion_mass`` is in kg; both
    only matter for the Lamb-Dicke parameter.
    """

    n_ions: int = 2
    trap_frequency: float = 1e6
    ion_mass: float = 40 * constants.atomic_mass

    def __post_init__(self):
        if int(self.n_ions) != self.n_ions or not 2 <= self.n_ions <= MAX_IONS:
            raise ValueError(f"n_ions must be an integer in [2, {MAX_IONS}], got {self.n_ions}")
        if not self.trap_frequency > 0:
            raise ValueError("trap_frequency must be positive")
        if not self.ion_mass > 0:
            raise ValueError("ion_mass must be positive")


@dataclass(frozen=True, eq=False)
class NormalModes:
    """Eigenstructure of the coupling matrix, A = B^T diag(mu) B.

    Row ``p`` of ``mode_matrix_b`` is the eigenvector of mode ``p`` (mode 0 is
    the centre-of-mass mode), so ``mode_matrix_b[p, m]`` is the participation
    of ion ``m`` in mode ``p``.
    """

    equilibrium_positions: np.ndarray
    eigenvalues_mu: np.ndarray
    mode_matrix_b: np.ndarray
    coupling: np.ndarray = field(repr=False)

    def __post_init__(self):
        for arr in (self.equilibrium_positions, self.eigenvalues_mu,
                    self.mode_matrix_b, self.coupling):
            arr.setflags(write=False)

    @property
    def n_ions(self):
        return len(self.eigenvalues_mu)

    @property
    def frequencies(self):
        """nu_p / nu = sqrt(mu_p)."""
        return np.sqrt(self.eigenvalues_mu)

    def mode_weights(self, ion_index):
        """[b_m^(p)]^2 / sqrt(mu_p) for every mode p, ion ``ion_index`` (1-based)."""
        m = _check_ion_index(ion_index, self.n_ions)
        return self.mode_matrix_b[:, m] ** 2 / np.sqrt(self.eigenvalues_mu)


def _check_ion_index(ion_index, n_ions):
    if int(ion_index) != ion_index or not 1 <= ion_index <= n_ions:
        raise IndexError(f"ion_index must be in 1..{n_ions}, got {ion_index}")
    return int(ion_index) - 1


def _forces(u):
    diff = u[:, None] - u[None, :]
    np.fill_diagonal(diff, np.inf)
    return -u + np.sum(np.sign(diff) / diff**2, axis=1)


def equilibrium_positions(n_ions):
    """Dimensionless equilibrium positions of ``n_ions`` ions.

    Solves u_m = sum_{j<m} (u_m - u_j)^-2 - sum_{j>m} (u_m - u_j)^-2 by damped
    Newton iteration; the Jacobian of the force balance is the coupling
    matrix.  The result is sorted and symmetrised about the origin.
    """
    n = int(n_ions)
    if n != n_ions or n < 2:
        raise ValueError(f"need at least two ions, got {n_ions}")
    # uniform seed spanning roughly the true chain length
    half_length = 0.5 * (n - 1) * 2.018 / n**0.559 * 1.3
    u = np.linspace(-half_length, half_length, n)
    residual = np.max(np.abs(_forces(u)))
    for _ in range(200):
        if residual <= FORCE_TOL:
            break
        step = np.linalg.solve(coupling_matrix(u), _forces(u))
        lam = 1.0
        while lam > 1e-6:
            trial = u + lam * step
            if np.all(np.diff(trial) > 0):
                trial_residual = np.max(np.abs(_forces(trial)))
                if trial_residual < residual or trial_residual <= FORCE_TOL:
                    break
            lam *= 0.5
        else:
            raise ConvergenceError(f"equilibrium search stalled for N={n}")
        u = trial
        residual = trial_residual
    else:
        raise ConvergenceError(f"equilibrium search did not converge for N={n}")
    u = 0.5 * (u - u[::-1])
    return u


def coupling_matrix(positions):
    """Linearised axial coupling matrix A for ions at ``positions``.

    A_nn = 1 + 2 sum_{p != n} |u_n - u_p|^-3 and A_nm = -2 |u_n - u_m|^-3.
    """
    u = np.asarray(positions, dtype=float)
    gaps = np.diff(u)
    if np.any(gaps <= 0):
        raise ValueError("positions must be strictly ascending")
    if np.any(gaps < MIN_GAP):
        raise ValueError(f"degenerate positions: gap below {MIN_GAP}")
    dist = np.abs(u[:, None] - u[None, :])
    np.fill_diagonal(dist, np.inf)
    off = -2.0 / dist**3
    a = off.copy()
    np.fill_diagonal(a, 1.0 - off.sum(axis=1))
    return a


def normal_modes(config):
    """Equilibrium positions, eigenvalues and eigenvectors for ``config``.

    Eigenvalues come out ascending; each eigenvector is signed so that its
    first non-negligible component is positive.
    """
    if isinstance(config, int):
        config = IonChainConfig(n_ions=config)
    u = equilibrium_positions(config.n_ions)
    a = coupling_matrix(u)
    mu, vecs = np.linalg.eigh(a)
    b = vecs.T.copy()
    for row in b:
        lead = np.flatnonzero(np.abs(row) > 1e-12)[0]
        if row[lead] < 0:
            row *= -1.0
    return NormalModes(u, mu, b, a)


def lamb_dicke(wavenumber, angle, config):
    """eta = sqrt(hbar k^2 cos^2(theta) / (2 M nu)), with nu = 2 pi trap_frequency.

    ``wavenumber`` is in 1/m and ``angle`` (between the laser and the trap
    axis) in radians.
    """
    if not wavenumber > 0:
        raise ValueError("wavenumber must be positive")
    nu = 2.0 * np.pi * config.trap_frequency
    return float(abs(np.cos(angle)) * wavenumber
                 * np.sqrt(constants.hbar / (2.0 * config.ion_mass * nu)))


def two_point_function(modes, ion_index, lag):
    """Vacuum two-point function of the dimensionless field at ion ``ion_index``.

    sum_p [b_m^(p)]^2 / sqrt(mu_p) exp(-i nu_p lag), with ``lag`` in 1/nu.
    ``lag`` may be an array.
    """
    weights = modes.mode_weights(ion_index)
    lag = np.asarray(lag, dtype=float)
    phases = np.exp(-1j * np.multiply.outer(lag, modes.frequencies))
    out = phases @ weights
    return complex(out) if out.ndim == 0 else out
