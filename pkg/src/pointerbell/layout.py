"""Named subsystems of the composite photon/pointer Hilbert space."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from math import prod

import numpy as np

from .errors import DimensionError
from .linalg import MAX_HILBERT_DIM, kron_all, partial_trace_dims, reduced_density_from_ket

PHOTON_A = "photonA"
PHOTON_B = "photonB"
POINTER_A = "pointerA"
POINTER_B = "pointerB"


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered registry of ``(name, dim)`` pairs.

    Tensor index arithmetic always follows the registration order, so the
    first subsystem is the most significant digit of a flat index.
    """

    subsystems: tuple[tuple[str, int], ...]

    def __post_init__(self):
        subs = tuple((str(n), int(d)) for n, d in self.subsystems)
        object.__setattr__(self, "subsystems", subs)
        names = [n for n, _ in subs]
        if not subs:
            raise DimensionError("layout needs at least one subsystem")
        if len(set(names)) != len(names):
            raise DimensionError(f"duplicate subsystem names in {names}")
        for name, dim in subs:
            if dim < 2:
                raise DimensionError(f"subsystem {name!r} has dimension {dim} < 2")

    @classmethod
    def canonical(cls, pointer_sites: int) -> "SubsystemLayout":
        """The experiment layout ``photonA, photonB, pointerA, pointerB``."""
        return cls(((PHOTON_A, 2), (PHOTON_B, 2), (POINTER_A, pointer_sites), (POINTER_B, pointer_sites)))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.subsystems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.subsystems)

    @property
    def total_dim(self) -> int:
        return prod(self.dims)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise DimensionError(f"unknown subsystem {name!r}; layout has {self.names}") from None

    def dim(self, name: str) -> int:
        return self.dims[self.index(name)]

    def is_canonical(self) -> bool:
        return (
            self.names == (PHOTON_A, PHOTON_B, POINTER_A, POINTER_B)
            and self.dims[:2] == (2, 2)
            and self.dims[2] == self.dims[3]
        )


def embed(layout: SubsystemLayout, assignments: Mapping[str, np.ndarray],
          max_dim: int = MAX_HILBERT_DIM) -> np.ndarray:
    """Lift local operators to the full space, filling identities elsewhere."""
    for name in assignments:
        layout.index(name)
    factors = []
    for name, dim in layout.subsystems:
        if name in assignments:
            m = np.asarray(assignments[name], dtype=complex)
            if m.shape != (dim, dim):
                raise DimensionError(f"operator for {name!r} has shape {m.shape}, expected {(dim, dim)}")
            factors.append(m)
        else:
            factors.append(np.eye(dim, dtype=complex))
    return kron_all(factors, max_dim=max_dim)


def product_state(layout: SubsystemLayout, factors: Mapping) -> np.ndarray:
    """Kronecker product of kets covering the layout exactly once.

    Keys are subsystem names, or tuples of adjacent names for a joint factor
    such as the biphoton ``("photonA", "photonB")``.
    """
    owner: dict[int, object] = {}
    groups = []
    for key, vec in factors.items():
        names = (key,) if isinstance(key, str) else tuple(key)
        idx = [layout.index(n) for n in names]
        if idx != list(range(idx[0], idx[0] + len(idx))):
            raise DimensionError(f"joint factor {names} must cover adjacent subsystems in layout order")
        for i in idx:
            if i in owner:
                raise DimensionError(f"subsystem {layout.names[i]!r} covered more than once")
            owner[i] = key
        vec = np.asarray(vec, dtype=complex).reshape(-1)
        expected = prod(layout.dims[i] for i in idx)
        if vec.shape[0] != expected:
            raise DimensionError(f"factor for {names} has length {vec.shape[0]}, expected {expected}")
        groups.append((idx[0], vec))
    missing = [layout.names[i] for i in range(len(layout.dims)) if i not in owner]
    if missing:
        raise DimensionError(f"subsystems {missing} not covered by any factor")
    groups.sort(key=lambda g: g[0])
    return kron_all(v for _, v in groups)


def partial_trace(rho, layout: SubsystemLayout, keep) -> np.ndarray:
    """Trace out all subsystems not named in ``keep``."""
    keep_idx = [layout.index(n) for n in keep]
    return partial_trace_dims(rho, layout.dims, keep_idx)


def reduced_state(psi, layout: SubsystemLayout, keep) -> np.ndarray:
    """Reduced density matrix of the pure state ``psi`` on the named subsystems."""
    keep_idx = [layout.index(n) for n in keep]
    return reduced_density_from_ket(psi, layout.dims, keep_idx)
