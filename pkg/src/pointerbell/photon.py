"""Biphoton source state, analyzer bases and station observables.

All vectors are written in the linear-polarization basis ``{|x>, |y>}``;
two-photon kets use the order ``|xx>, |xy>, |yx>, |yy>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import cos, sin, sqrt

import numpy as np


@dataclass(frozen=True)
class AnalyzerSettings:
    """Analyzer orientations at stations A and B, in radians."""

    alpha: float
    beta: float

    @classmethod
    def from_degrees(cls, alpha_deg: float, beta_deg: float) -> "AnalyzerSettings":
        return cls(np.deg2rad(alpha_deg).item(), np.deg2rad(beta_deg).item())

    @property
    def difference(self) -> float:
        return self.alpha - self.beta


@dataclass(frozen=True)
class StationObservable:
    """Two-outcome polarization observable with eigenvalues +1 and -1.

    ``plus`` and ``minus`` are the eigenvectors for +1 and -1, in that fixed
    order; the branch evolution relies on it.
    """

    theta: float
    matrix: np.ndarray
    plus: np.ndarray
    minus: np.ndarray

    @property
    def eigenvalues(self) -> tuple[int, int]:
        return (1, -1)

    @property
    def branches(self) -> tuple[tuple[int, np.ndarray], tuple[int, np.ndarray]]:
        return ((1, self.plus), (-1, self.minus))


def bell_phi_plus() -> np.ndarray:
    """``(|xx> + |yy>) / sqrt(2)``."""
    s = 1 / sqrt(2)
    return np.array([s, 0, 0, s], dtype=complex)


def analyzer_basis(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Transmitted (+) and reflected (-) analyzer states at angle ``theta``.

    Inverting the rotation ``|x> = cos|+> - sin|->``, ``|y> = sin|+> + cos|->``
    gives ``|+> = (cos, sin)`` and ``|-> = (-sin, cos)``.
    """
    c, s = cos(theta), sin(theta)
    return np.array([c, s], dtype=complex), np.array([-s, c], dtype=complex)


def observable(theta: float) -> StationObservable:
    c2, s2 = cos(2 * theta), sin(2 * theta)
    m = np.array([[c2, s2], [s2, -c2]], dtype=complex)
    plus, minus = analyzer_basis(theta)
    return StationObservable(theta=theta, matrix=m, plus=plus, minus=minus)


def spectral_observable(theta: float) -> np.ndarray:
    """``(+1)|+><+| + (-1)|-><-|`` built from the analyzer basis."""
    plus, minus = analyzer_basis(theta)
    return np.outer(plus, plus.conj()) - np.outer(minus, minus.conj())
