import numpy as np
import pytest

from pointerbell.layout import SubsystemLayout, partial_trace
from pointerbell.photon import AnalyzerSettings, analyzer_basis, bell_phi_plus, observable, spectral_observable


def test_phi_plus_amplitudes():
    phi = bell_phi_plus()
    np.testing.assert_allclose(phi, [0.7071067811865476, 0, 0, 0.7071067811865476], rtol=0, atol=1e-15)
    assert abs(np.linalg.norm(phi) - 1) <= 1e-15


def test_phi_plus_marginals_maximally_mixed():
    phi = bell_phi_plus()
    layout = SubsystemLayout((("photonA", 2), ("photonB", 2)))
    rho = np.outer(phi, phi.conj())
    for name in layout.names:
        np.testing.assert_allclose(partial_trace(rho, layout, [name]), np.eye(2) / 2, atol=1e-15)


def test_analyzer_basis_at_zero_and_right_angle():
    plus, minus = analyzer_basis(0.0)
    np.testing.assert_allclose(plus, [1, 0])
    np.testing.assert_allclose(minus, [0, 1])
    plus, minus = analyzer_basis(np.pi / 2)
    np.testing.assert_allclose(plus, [0, 1], atol=1e-16)
    np.testing.assert_allclose(minus, [-1, 0], atol=1e-16)


def test_analyzer_basis_round_trip(rng):
    for theta in rng.uniform(-np.pi, np.pi, 20):
        plus, minus = analyzer_basis(theta)
        assert abs(np.vdot(plus, minus)) <= 1e-14
        x = plus * np.cos(theta) - minus * np.sin(theta)
        y = plus * np.sin(theta) + minus * np.cos(theta)
        np.testing.assert_allclose(x, [1, 0], atol=1e-12)
        np.testing.assert_allclose(y, [0, 1], atol=1e-12)


def test_observable_examples():
    np.testing.assert_allclose(observable(0.0).matrix, np.diag([1, -1]), atol=0)
    # |+><+| - |-><-| at 45 degrees: (1,1)(1,1)/2 - (-1,1)(-1,1)/2
    plus = np.array([1, 1]) / np.sqrt(2)
    minus = np.array([-1, 1]) / np.sqrt(2)
    expected = np.outer(plus, plus) - np.outer(minus, minus)
    np.testing.assert_allclose(observable(np.pi / 4).matrix, expected, atol=1e-15)
    np.testing.assert_allclose(expected, [[0, 1], [1, 0]], atol=1e-15)


def test_observable_properties(rng):
    for theta in rng.uniform(-2 * np.pi, 2 * np.pi, 50):
        obs = observable(theta)
        m = obs.matrix
        np.testing.assert_allclose(m @ m, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(m, m.T, atol=0)
        assert np.all(m.imag == 0)
        assert abs(np.trace(m)) <= 1e-15
        np.testing.assert_allclose(np.linalg.eigvalsh(m), [-1, 1], atol=1e-12)
        np.testing.assert_allclose(m @ obs.plus, obs.plus, atol=1e-12)
        np.testing.assert_allclose(m @ obs.minus, -obs.minus, atol=1e-12)
        np.testing.assert_allclose(spectral_observable(theta), m, atol=1e-12)
        np.testing.assert_allclose(observable(theta + np.pi).matrix, m, atol=1e-12)


def test_bell_correlation_grid():
    phi = bell_phi_plus()
    grid = np.arange(19) * np.pi / 19
    worst = 0.0
    for a in grid:
        for b in grid:
            e = np.vdot(phi, np.kron(observable(a).matrix, observable(b).matrix) @ phi).real
            # P(++) + P(--) - P(+-) - P(-+) from the cos^2/sin^2 outcome law
            c2, s2 = np.cos(a - b) ** 2 / 2, np.sin(a - b) ** 2 / 2
            worst = max(worst, abs(e - (2 * c2 - 2 * s2)))
    assert worst <= 1e-10


def test_settings_from_degrees():
    s = AnalyzerSettings.from_degrees(30, 90)
    assert s.alpha == pytest.approx(np.pi / 6)
    assert s.difference == pytest.approx(-np.pi / 3)
