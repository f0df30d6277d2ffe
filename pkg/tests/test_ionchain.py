import math

import numpy as np
import pytest
from scipy.optimize import fsolve

from trapcosmo.errors import DomainError
from trapcosmo.ionchain import (
    IonChainConfig,
    coupling_matrix,
    equilibrium_positions,
    lamb_dicke,
    normal_modes,
    two_point_function,
)


def force_residual(u):
    n = len(u)
    res = np.empty(n)
    for m in range(n):
        res[m] = u[m] - sum((u[m] - u[j]) ** -2 for j in range(m)) \
            + sum((u[m] - u[j]) ** -2 for j in range(m + 1, n))
    return res


def test_two_ion_positions():
    u = equilibrium_positions(2)
    assert np.allclose(u, [-2 ** (-2 / 3), 2 ** (-2 / 3)], rtol=0, atol=1e-14)


def test_three_ion_positions():
    u = equilibrium_positions(3)
    c = (5 / 4) ** (1 / 3)
    assert np.allclose(u, [-c, 0, c], rtol=0, atol=1e-14)


@pytest.mark.parametrize("n", [4, 7, 12])
def test_positions_match_generic_solver(n):
    seed = np.linspace(-n / 2, n / 2, n) * 0.5
    oracle = np.sort(fsolve(force_residual, seed, xtol=1e-14))
    assert np.allclose(equilibrium_positions(n), oracle, atol=1e-10)


@pytest.mark.parametrize("n", range(2, 33))
def test_positions_symmetric_and_balanced(n):
    u = equilibrium_positions(n)
    assert np.all(np.diff(u) > 0)
    assert np.allclose(u, -u[::-1], atol=1e-14)
    assert abs(u.sum()) < 1e-12
    assert np.max(np.abs(force_residual(u))) <= 1e-12


def test_two_ion_coupling_matrix():
    a = coupling_matrix(equilibrium_positions(2))
    d3 = 2.0
    assert np.allclose(a, [[1 + 2 / d3, -2 / d3], [-2 / d3, 1 + 2 / d3]], atol=1e-14)
    assert np.allclose(np.linalg.eigvalsh(a), [1, 3], atol=1e-13)


def test_three_ion_eigenvalues():
    mu = normal_modes(3).eigenvalues_mu
    assert np.allclose(mu, [1, 3, 29 / 5], atol=1e-12)


@pytest.mark.parametrize("n", range(2, 11))
def test_coupling_matrix_exactly_symmetric(n):
    a = coupling_matrix(equilibrium_positions(n))
    assert np.array_equal(a, a.T)


def test_degenerate_positions_rejected():
    with pytest.raises(ValueError):
        coupling_matrix(np.array([0.0, 1e-10]))
    with pytest.raises(ValueError):
        coupling_matrix(np.array([1.0, 0.0]))


def test_two_ion_modes():
    modes = normal_modes(2)
    assert np.allclose(modes.eigenvalues_mu, [1, 3], atol=1e-13)
    assert np.allclose(modes.mode_matrix_b[0], [1 / math.sqrt(2)] * 2, atol=1e-14)


def test_five_ion_frequencies_near_trap_frequency():
    freqs = normal_modes(5).frequencies
    assert np.all(freqs >= 0.1) and np.all(freqs <= 10.0)


@pytest.mark.parametrize("n", range(2, 11))
def test_mode_invariants(n):
    modes = normal_modes(n)
    mu, b, a = modes.eigenvalues_mu, modes.mode_matrix_b, modes.coupling
    assert abs(mu[0] - 1) <= 1e-12
    assert abs(mu[1] - 3) <= 1e-10
    assert np.all(mu > 0) and np.all(np.diff(mu) > 0)
    assert np.max(np.abs(b.T @ b - np.eye(n))) <= 1e-12
    assert np.allclose(b[0], 1 / math.sqrt(n), atol=1e-12)
    assert np.allclose(np.sum(b**2, axis=0), 1, atol=1e-12)
    for p in range(n):
        assert np.linalg.norm(a @ b[p] - mu[p] * b[p]) <= 1e-11
        first = b[p][np.abs(b[p]) > 1e-12][0]
        assert first > 0
    assert np.max(np.abs(b.T @ np.diag(mu) @ b - a)) <= 1e-11


def test_modes_immutable():
    modes = normal_modes(3)
    with pytest.raises(ValueError):
        modes.eigenvalues_mu[0] = 2.0


def test_config_validation():
    for bad in (dict(n_ions=1), dict(n_ions=33), dict(trap_frequency=0), dict(ion_mass=-1)):
        with pytest.raises(ValueError):
            IonChainConfig(**bad)


CALCIUM = IonChainConfig(n_ions=2, trap_frequency=1e6)
K_729 = 2 * math.pi / 729e-9


def test_lamb_dicke_examples():
    assert lamb_dicke(K_729, math.pi / 2, CALCIUM) < 1e-16
    eta = lamb_dicke(K_729, math.pi / 4, CALCIUM)
    assert 0.01 <= eta <= 0.1
    assert lamb_dicke(2 * K_729, math.pi / 4, CALCIUM) == pytest.approx(2 * eta, rel=1e-15)


def test_lamb_dicke_formula():
    from scipy.constants import atomic_mass, hbar
    expected = math.sqrt(hbar * K_729**2 / (2 * 40 * atomic_mass * 2 * math.pi * 1e6))
    assert lamb_dicke(K_729, 0.0, CALCIUM) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("n", [2, 3, 6])
def test_two_point_function(n):
    modes = normal_modes(n)
    for m in range(1, n + 1):
        w = modes.mode_weights(m)
        at_zero = two_point_function(modes, m, 0.0)
        assert abs(at_zero.imag) == 0 and at_zero.real > 0
        assert at_zero.real == pytest.approx(w.sum(), rel=1e-15)
        for lag in (0.3, 2.0, 17.5):
            assert two_point_function(modes, m, -lag) == pytest.approx(
                two_point_function(modes, m, lag).conjugate(), rel=1e-14)
        lags = np.array([0.1, 1.0])
        assert np.allclose(two_point_function(modes, m, lags),
                           [two_point_function(modes, m, x) for x in lags])


def test_two_point_single_term_is_pure_phase():
    modes = normal_modes(2)
    w0 = modes.mode_weights(1)[0]
    lag = 1.7
    single = w0 * np.exp(-1j * modes.frequencies[0] * lag)
    assert abs(single) == pytest.approx(w0)
    assert np.angle(single) == pytest.approx(-lag, abs=1e-12)


def test_two_point_index_range():
    modes = normal_modes(3)
    for bad in (0, 4):
        with pytest.raises(IndexError):
            two_point_function(modes, bad, 0.0)
