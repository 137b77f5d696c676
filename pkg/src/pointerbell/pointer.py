"""Measurement pointer on a periodic position lattice.

The momentum operator is diagonal in the discrete Fourier basis with
eigenvalues ``2*pi*k/N`` for the symmetric integer frequencies ``k``, so
``exp(-1j * s * P)`` shifts position basis states by exactly ``s`` sites for
integer ``s``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import dft

from .errors import ConfigurationError, DimensionError

PLUS, NEUTRAL, MINUS = 1, 0, -1

DEFAULT_LEAK_TOLERANCE = 1e-6


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@lru_cache(maxsize=32)
def momentum_frequencies(n_sites: int) -> np.ndarray:
    """Momentum eigenvalues ``2*pi*k/N`` ordered like the rows of the DFT."""
    k = np.fft.fftfreq(n_sites, d=1.0 / n_sites)
    return _frozen(2 * np.pi * k / n_sites)


@lru_cache(maxsize=32)
def fourier_matrix(n_sites: int) -> np.ndarray:
    """Unitary DFT matrix; returned arrays are read-only."""
    return _frozen(dft(n_sites, scale="sqrtn"))


def momentum_operator(n_sites: int) -> np.ndarray:
    if n_sites < 3:
        raise ConfigurationError(f"pointer lattice needs at least 3 sites, got {n_sites}")
    f = fourier_matrix(n_sites)
    return (f.conj().T * momentum_frequencies(n_sites)) @ f


@dataclass(frozen=True)
class PointerSpace:
    """Lattice geometry, initial-state mode and readout partition of one pointer.

    Parameters
    ----------
    n_sites
        Lattice size ``N >= 3``.
    mode
        ``"delta"`` for a point-mass pointer or ``"gaussian"`` for a discrete
        Gaussian wavepacket with amplitude ``exp(-x**2 / (2 sigma**2))``.
    sigma
        Gaussian width in lattice sites (gaussian mode only).
    displacement
        Readout geometry: the plus and minus bins are centred this many sites
        either side of the central site. Defaults to ``max(1, N // 8)``.
    leak_tolerance
        Maximum probability of the initial state outside the neutral bin.
        ``None`` disables the check, which finite-resolution studies need.
    """

    n_sites: int
    mode: str = "delta"
    sigma: float | None = None
    displacement: int | None = None
    leak_tolerance: float | None = DEFAULT_LEAK_TOLERANCE
    momentum: np.ndarray = field(init=False, repr=False, compare=False)
    labels: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = int(self.n_sites)
        if n < 3:
            raise ConfigurationError(f"pointer lattice needs at least 3 sites, got {n}")
        if self.mode not in ("delta", "gaussian"):
            raise ConfigurationError(f"unknown pointer mode {self.mode!r}")
        if self.mode == "gaussian":
            if self.sigma is None or not self.sigma > 0:
                raise ConfigurationError("gaussian pointer mode needs sigma > 0")
        d = max(1, n // 8) if self.displacement is None else int(self.displacement)
        if d < 1 or d >= n / 2:
            raise ConfigurationError(f"readout displacement {d} must satisfy 1 <= d < N/2 = {n / 2}")
        object.__setattr__(self, "displacement", d)
        object.__setattr__(self, "momentum", momentum_operator(n))
        offsets = self.offsets
        labels = np.where(offsets > d / 2, PLUS, np.where(offsets < -d / 2, MINUS, NEUTRAL))
        object.__setattr__(self, "labels", labels)

    @property
    def center(self) -> int:
        return self.n_sites // 2

    @property
    def offsets(self) -> np.ndarray:
        """Signed cyclic offset of each site from the centre."""
        n = self.n_sites
        return (np.arange(n) - self.center + n // 2) % n - n // 2

    def mask(self, label: int) -> np.ndarray:
        return (self.labels == label).astype(float)


@lru_cache(maxsize=64)
def pointer_space(n_sites: int, mode: str = "delta", sigma: float | None = None,
                  displacement: int | None = None,
                  leak_tolerance: float | None = DEFAULT_LEAK_TOLERANCE) -> PointerSpace:
    """Cached :class:`PointerSpace` constructor; spaces are immutable."""
    return PointerSpace(n_sites, mode, sigma, displacement, leak_tolerance)


def translation(space: PointerSpace, displacement: float) -> np.ndarray:
    """``exp(-1j * displacement * P)``, a shift by ``displacement`` sites."""
    n = space.n_sites
    if abs(displacement) >= n / 2:
        raise ConfigurationError(f"displacement {displacement} too large for a {n}-site lattice")
    f = fourier_matrix(n)
    phases = np.exp(-1j * displacement * momentum_frequencies(n))
    return (f.conj().T * phases) @ f


def initial_state(space: PointerSpace) -> np.ndarray:
    n = space.n_sites
    if space.mode == "delta":
        psi = np.zeros(n, dtype=complex)
        psi[space.center] = 1.0
        return psi
    x = space.offsets.astype(float)
    amp = np.exp(-(x**2) / (2 * space.sigma**2))
    psi = (amp / np.linalg.norm(amp)).astype(complex)
    if space.leak_tolerance is not None:
        leak = float(np.sum(np.abs(psi[space.labels != NEUTRAL]) ** 2))
        if leak > space.leak_tolerance:
            raise ConfigurationError(
                f"sigma={space.sigma} puts {leak:.3e} of the initial pointer mass outside "
                f"the neutral bin (tolerance {space.leak_tolerance:g})"
            )
    return psi


def displaced_states(space: PointerSpace, epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """Pointer states after the +1 and -1 branches: shifted by ``+epsilon`` and ``-epsilon``."""
    psi0 = initial_state(space)
    return translation(space, epsilon) @ psi0, translation(space, -epsilon) @ psi0


def readout(space: PointerSpace, pointer_density) -> tuple[float, float, float]:
    """Bin occupancies ``(p_plus, p_neutral, p_minus)`` of a single-pointer density matrix."""
    rho = np.asarray(pointer_density)
    if rho.shape != (space.n_sites, space.n_sites):
        raise DimensionError(f"pointer density has shape {rho.shape}, expected {(space.n_sites,) * 2}")
    diag = np.real(np.diag(rho))
    return tuple(float(np.sum(diag[space.labels == lab])) for lab in (PLUS, NEUTRAL, MINUS))
