"""Dense complex linear algebra used throughout the simulator.

Operators, kets and density matrices are plain ``numpy`` arrays of dtype
``complex128``. Nothing here mutates its inputs.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence

import numpy as np

from .errors import DimensionError, HermiticityError, InvariantViolation

#: Largest operator dimension accepted by :func:`kron` and :func:`expm_hermitian`.
MAX_HILBERT_DIM = 4096

#: Elementwise tolerance for Hermiticity of engine inputs.
HERMITIAN_TOL = 1e-12


def as_operator(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conjugate(np.swapaxes(m, -1, -2))


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def _check_operator_size(shape: tuple[int, ...], max_dim: int) -> None:
    # kets (single column or 1-D) are never guarded; only operators are
    if len(shape) == 2 and min(shape) > 1 and max(shape) > max_dim:
        raise DimensionError(
            f"operator dimension {shape} exceeds the configured maximum {max_dim}; "
            "use the branch evolution for large pointer lattices"
        )


def kron(a, b, max_dim: int = MAX_HILBERT_DIM) -> np.ndarray:
    """Kronecker product with the ``(i*rb + k, j*cb + l)`` index convention.

    1-D inputs are treated as kets and give a 1-D result. Operator results
    larger than ``max_dim`` on a side raise :class:`DimensionError`.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim == 1 and b.ndim == 1:
        return np.kron(a, b)
    a = as_operator(a)
    b = as_operator(b)
    _check_operator_size((a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]), max_dim)
    return np.kron(a, b)


def kron_all(factors: Iterable, max_dim: int = MAX_HILBERT_DIM) -> np.ndarray:
    it = iter(factors)
    try:
        out = np.asarray(next(it), dtype=complex)
    except StopIteration:
        raise ValueError("kron_all needs at least one factor") from None
    for f in it:
        out = kron(out, f, max_dim=max_dim)
    return out


def expm_hermitian(h, theta: float, max_dim: int = MAX_HILBERT_DIM) -> np.ndarray:
    """Return ``exp(-1j * theta * h)`` for a Hermitian ``h``.

    Computed from the spectral decomposition ``h = V diag(e) V^dagger``, so the
    result is unitary to machine precision.

    Raises
    ------
    HermiticityError
        If ``max|h - h^dagger|`` exceeds :data:`HERMITIAN_TOL`.
    DimensionError
        If ``h`` is larger than ``max_dim``.
    """
    h = as_operator(h)
    if h.shape[0] != h.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {h.shape}")
    _check_operator_size(h.shape, max_dim)
    if not is_hermitian(h):
        raise HermiticityError("expm_hermitian requires a Hermitian generator")
    evals, evecs = np.linalg.eigh(h)
    phases = np.exp(-1j * theta * evals)
    return (evecs * phases) @ evecs.conj().T


def _axis_positions(dims: Sequence[int], keep: Sequence[int]) -> tuple[list[int], list[int]]:
    n = len(dims)
    keep = sorted(set(keep))
    if any(k < 0 or k >= n for k in keep):
        raise DimensionError(f"subsystem indices {keep} out of range for {n} subsystems")
    traced = [i for i in range(n) if i not in keep]
    return keep, traced


def partial_trace_dims(rho, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem whose position is not in ``keep``.

    ``dims`` lists the subsystem dimensions in tensor order; the kept
    subsystems stay in that order in the result.
    """
    rho = as_operator(rho)
    total = int(np.prod(dims))
    if rho.shape != (total, total):
        raise DimensionError(f"density matrix shape {rho.shape} does not match dims {tuple(dims)}")
    keep, traced = _axis_positions(dims, keep)
    n = len(dims)
    t = rho.reshape(tuple(dims) * 2)
    row = list(range(n))
    col = [n + i for i in range(n)]
    for i in traced:
        col[i] = row[i]
    out = [row[i] for i in keep] + [col[i] for i in keep]
    kept_dim = int(np.prod([dims[i] for i in keep])) if keep else 1
    return np.einsum(t, row + col, out).reshape(kept_dim, kept_dim)


def reduced_density_from_ket(psi, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of a pure state without forming ``|psi><psi|``."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    total = int(np.prod(dims))
    if psi.shape[0] != total:
        raise DimensionError(f"ket of length {psi.shape[0]} does not match dims {tuple(dims)}")
    keep, traced = _axis_positions(dims, keep)
    t = psi.reshape(dims).transpose(keep + traced)
    kept_dim = int(np.prod([dims[i] for i in keep])) if keep else 1
    m = t.reshape(kept_dim, -1)
    return m @ m.conj().T


def frobenius(m) -> float:
    return float(np.linalg.norm(np.asarray(m), ord=None))


def commutator(a, b) -> np.ndarray:
    return a @ b - b @ a


def max_offdiagonal(m) -> float:
    m = np.asarray(m)
    off = m - np.diag(np.diag(m))
    return float(np.max(np.abs(off), initial=0.0))


def check_ket(psi, tol: float = 1e-10) -> None:
    """Raise :class:`InvariantViolation` unless ``psi`` has unit norm."""
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > tol:
        raise InvariantViolation(f"state norm {norm!r} deviates from 1 by more than {tol}")


def check_density(rho, tol: float = 1e-10) -> None:
    """Raise :class:`InvariantViolation` unless ``rho`` is a valid density matrix."""
    rho = np.asarray(rho)
    herm = np.max(np.abs(rho - rho.conj().T), initial=0.0)
    if herm > tol:
        raise InvariantViolation(f"density matrix not Hermitian (max deviation {herm:.3e})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol:
        raise InvariantViolation(f"density matrix trace {tr!r} deviates from 1")
    lowest = np.linalg.eigvalsh(rho)[0]
    if lowest < -tol:
        raise InvariantViolation(f"density matrix has negative eigenvalue {lowest:.3e}")
