"""Von Neumann measurement of a polarization-entangled photon pair.

Each station couples its photon's polarization observable to the momentum of
a local pointer, ``H_A = lam * A (x) P_A`` and ``H_B = lam * B (x) P_B``. The
joint evolution ``exp(-1j * t * (H_A + H_B))`` is computed three ways:

``exact``
    spectral exponential of the summed Hamiltonian (the reference path);
``factorized``
    product of the two station exponentials, valid only when they commute;
``branch``
    expansion over the analyzer eigenbranches, where each branch shifts each
    pointer by ``+/- epsilon`` sites, ``epsilon = t * lam``.

Units are chosen so that the evolution phase is ``exp(-1j * t * H)``; the
constant in front of ``t`` is absorbed into the coupling and only the product
``epsilon`` is observable.

The nonlocal counterexample lets station B's pointer also read an observable
of photon A. Coupling B's pointer to photon A's *own* analyzer observable
would still commute with ``H_A`` (both act on photon A through the same
operator), so the counterexample uses the observable at angle ``beta``, which
does not commute with A's observable unless ``alpha - beta`` is a multiple of
``pi/2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError, DimensionError
from .layout import (
    PHOTON_A, PHOTON_B, POINTER_A, POINTER_B,
    SubsystemLayout, embed, product_state, reduced_state,
)
from .linalg import check_density, check_ket, commutator, expm_hermitian, frobenius
from .photon import AnalyzerSettings, bell_phi_plus, observable
from .pointer import (
    DEFAULT_LEAK_TOLERANCE, MINUS, PLUS, PointerSpace,
    displaced_states, initial_state as pointer_initial_state, pointer_space, translation,
)

OUTCOMES = ("++", "+-", "-+", "--")
_SIGNS = {"+": PLUS, "-": MINUS}
METHODS = ("exact", "factorized", "branch")

#: Pointer-pair dimension up to which results carry the full reduced density matrix.
DENSITY_LIMIT = 1024

INTEGER_TOL = 1e-9


@dataclass(frozen=True)
class ExperimentConfig:
    analyzers: AnalyzerSettings = field(default_factory=lambda: AnalyzerSettings(0.0, np.pi / 8))
    pointer_sites: int = 3
    pointer_mode: str = "delta"
    sigma: float | None = None
    interaction_time: float = 1.0
    coupling: float = 1.0
    tolerance: float = 1e-10
    seed: int = 0
    leak_tolerance: float | None = DEFAULT_LEAK_TOLERANCE

    def __post_init__(self):
        n = self.pointer_sites
        eps = self.epsilon
        if not np.isfinite(eps):
            raise ConfigurationError(f"epsilon = t * lambda must be finite, got {eps}")
        if abs(eps) >= n / 2:
            raise ConfigurationError(f"epsilon {eps:g} must satisfy |epsilon| < N/2 = {n / 2:g}")
        if self.pointer_mode == "delta" and abs(eps - round(eps)) > INTEGER_TOL:
            raise ConfigurationError(f"delta pointer mode needs an integer epsilon, got {eps!r}")
        # builds and validates the lattice eagerly
        self.space

    @classmethod
    def with_epsilon(cls, epsilon: float, **kwargs) -> "ExperimentConfig":
        return cls(interaction_time=1.0, coupling=epsilon, **kwargs)

    @property
    def epsilon(self) -> float:
        return self.interaction_time * self.coupling

    @property
    def space(self) -> PointerSpace:
        d = int(round(abs(self.epsilon))) or None
        return pointer_space(self.pointer_sites, self.pointer_mode, self.sigma, d, self.leak_tolerance)

    @property
    def layout(self) -> SubsystemLayout:
        return SubsystemLayout.canonical(self.pointer_sites)

    def at(self, alpha: float, beta: float) -> "ExperimentConfig":
        return replace(self, analyzers=AnalyzerSettings(alpha, beta))


@dataclass(frozen=True)
class EvolutionResult:
    final_state: np.ndarray
    method: str
    config: ExperimentConfig
    pointer_density: np.ndarray | None
    outcome_probs: dict[str, float]

    @property
    def p_conclusive(self) -> float:
        return sum(self.outcome_probs.values())

    @property
    def p_inconclusive(self) -> float:
        return max(0.0, 1.0 - self.p_conclusive)


class OrderSwapReport(NamedTuple):
    gap: float
    max_prob_diff: float


def _check_canonical(layout: SubsystemLayout, config: ExperimentConfig) -> None:
    if not layout.is_canonical() or layout.dims[2] != config.pointer_sites:
        raise DimensionError(f"layout {layout.subsystems} is not the canonical experiment layout")


def local_hamiltonian(station: str, config: ExperimentConfig,
                      layout: SubsystemLayout | None = None) -> np.ndarray:
    """``lam * (station observable) (x) (station pointer momentum)`` on the full space."""
    layout = layout or config.layout
    _check_canonical(layout, config)
    p = config.space.momentum
    if station == "A":
        obs, photon, ptr = observable(config.analyzers.alpha), PHOTON_A, POINTER_A
    elif station == "B":
        obs, photon, ptr = observable(config.analyzers.beta), PHOTON_B, POINTER_B
    else:
        raise ValueError(f"station must be 'A' or 'B', got {station!r}")
    return config.coupling * embed(layout, {photon: obs.matrix, ptr: p})


def nonlocal_hamiltonian(config: ExperimentConfig, mu: float,
                         layout: SubsystemLayout | None = None) -> np.ndarray:
    """Station-B Hamiltonian whose pointer also couples to photon A.

    ``lam * B (x) P_B + mu * O_beta(photon A) (x) P_B``.
    """
    layout = layout or config.layout
    h_b = local_hamiltonian("B", config, layout)
    if mu == 0:
        return h_b
    cross = embed(layout, {PHOTON_A: observable(config.analyzers.beta).matrix,
                           POINTER_B: config.space.momentum})
    return h_b + mu * cross


def initial_state(config: ExperimentConfig, layout: SubsystemLayout | None = None) -> np.ndarray:
    """Biphoton in ``|phi+>`` with both pointers in their initial state."""
    layout = layout or config.layout
    psi0 = pointer_initial_state(config.space)
    return product_state(layout, {(PHOTON_A, PHOTON_B): bell_phi_plus(), POINTER_A: psi0, POINTER_B: psi0})


def evolve_exact(config: ExperimentConfig, h_total, initial) -> np.ndarray:
    return expm_hermitian(h_total, config.interaction_time) @ initial


def evolve_factorized(config: ExperimentConfig, h_a, h_b, initial) -> np.ndarray:
    """Apply ``exp(-i t H_A) @ exp(-i t H_B)`` to ``initial``."""
    t = config.interaction_time
    return expm_hermitian(h_a, t) @ (expm_hermitian(h_b, t) @ initial)


def evolve_branch(config: ExperimentConfig, initial) -> np.ndarray:
    """Evolve by eigenbranches of the two analyzer observables.

    On the branch where photon A has eigenvalue ``a`` and photon B has ``b``,
    ``exp(-i t lam A(x)P_A)`` reduces to ``exp(-i a epsilon P_A)``, a shift of
    pointer A by ``a * epsilon`` sites, and likewise for B. Only valid for the
    local Hamiltonians.
    """
    space = config.space
    n = space.n_sites
    psi = np.asarray(initial, dtype=complex).reshape(2, 2, n, n)
    eps = config.epsilon
    shift = {1: translation(space, eps), -1: translation(space, -eps)}
    obs_a = observable(config.analyzers.alpha)
    obs_b = observable(config.analyzers.beta)
    out = np.zeros_like(psi)
    for a, va in obs_a.branches:
        for b, vb in obs_b.branches:
            ptr = np.einsum("i,j,ijxy->xy", va.conj(), vb.conj(), psi)
            ptr = shift[a] @ ptr @ shift[b].T
            out += np.einsum("a,b,xy->abxy", va, vb, ptr)
    return out.reshape(-1)


def branch_coefficients(settings: AnalyzerSettings) -> dict[str, complex]:
    """Amplitudes ``<s_A t_B | phi+>`` of the four analyzer eigenbranches."""
    obs_a, obs_b = observable(settings.alpha), observable(settings.beta)
    phi = bell_phi_plus()
    vecs = {"+": (obs_a.plus, obs_b.plus), "-": (obs_a.minus, obs_b.minus)}
    return {
        o: complex(np.vdot(np.kron(vecs[o[0]][0], vecs[o[1]][1]), phi))
        for o in OUTCOMES
    }


def reduced_pointer_density(final, layout: SubsystemLayout) -> np.ndarray:
    """Trace the photons out of the final state, leaving ``pointerA (x) pointerB``."""
    return reduced_state(final, layout, [POINTER_A, POINTER_B])


def pointer_joint_distribution(final, layout: SubsystemLayout) -> np.ndarray:
    """Diagonal of the reduced pointer density as an ``(N, N)`` site-probability table."""
    n = layout.dim(POINTER_A)
    psi = np.asarray(final).reshape(4, n, n)
    return np.sum(np.abs(psi) ** 2, axis=0)


def _joint_bin_probabilities(joint: np.ndarray, space: PointerSpace) -> dict[str, float]:
    return {
        o: float(space.mask(_SIGNS[o[0]]) @ joint @ space.mask(_SIGNS[o[1]]))
        for o in OUTCOMES
    }


def outcome_probabilities(result: EvolutionResult) -> dict[str, float]:
    """Joint bin occupancy of the two pointers for each outcome pair."""
    space = result.config.space
    if result.pointer_density is not None:
        n = space.n_sites
        joint = np.real(np.diag(result.pointer_density)).reshape(n, n)
    else:
        joint = pointer_joint_distribution(result.final_state, result.config.layout)
    return _joint_bin_probabilities(joint, space)


def branch_basis_density(final, config: ExperimentConfig) -> np.ndarray:
    """Matrix elements of the reduced pointer density between branch pointer states.

    Rows and columns run over ``|psi^s_A psi^t_B>`` for ``st`` in ``++, +-, -+, --``.
    The displaced states need not be orthogonal (gaussian mode), so this is
    not a change of basis; it is the 4x4 block the outcome readout resolves.
    """
    n = config.pointer_sites
    plus, minus = displaced_states(config.space, config.epsilon)
    states = {"+": plus, "-": minus}
    psi = np.asarray(final).reshape(4, n, n)
    amps = np.array([
        [np.einsum("x,y,xy->", states[o[0]].conj(), states[o[1]].conj(), psi[p]) for p in range(4)]
        for o in OUTCOMES
    ])
    return amps @ amps.conj().T


def pointer_overlap(config: ExperimentConfig) -> float:
    """``|<psi^+|psi^->|`` of the two displaced pointer states, by direct inner product."""
    plus, minus = displaced_states(config.space, config.epsilon)
    return float(abs(np.vdot(plus, minus)))


def closed_form_probabilities(settings: AnalyzerSettings) -> dict[str, float]:
    """Closed-form outcome law ``cos^2/2, sin^2/2, sin^2/2, cos^2/2`` of the angle difference."""
    c2 = np.cos(settings.difference) ** 2 / 2
    s2 = np.sin(settings.difference) ** 2 / 2
    return {"++": c2, "+-": s2, "-+": s2, "--": c2}


def evolve(config: ExperimentConfig, method: str = "branch", mu: float = 0.0,
           initial=None) -> np.ndarray:
    layout = config.layout
    if initial is None:
        initial = initial_state(config, layout)
    if method == "branch":
        if mu != 0:
            raise ConfigurationError("the branch evolution assumes local Hamiltonians (mu must be 0)")
        return evolve_branch(config, initial)
    h_a = local_hamiltonian("A", config, layout)
    h_b = nonlocal_hamiltonian(config, mu, layout)
    if method == "exact":
        return evolve_exact(config, h_a + h_b, initial)
    if method == "factorized":
        return evolve_factorized(config, h_a, h_b, initial)
    raise ConfigurationError(f"unknown evolution method {method!r}; expected one of {METHODS}")


def run(config: ExperimentConfig, method: str = "branch", mu: float = 0.0) -> EvolutionResult:
    """Evolve, trace out the photons and read both pointers.

    Raises :class:`~pointerbell.errors.InvariantViolation` when the final state
    or reduced density fails its norm, trace or positivity checks at
    ``config.tolerance``.
    """
    layout = config.layout
    final = evolve(config, method, mu)
    check_ket(final, config.tolerance)
    rho = None
    if config.pointer_sites ** 2 <= DENSITY_LIMIT:
        rho = reduced_pointer_density(final, layout)
        check_density(rho, config.tolerance)
    partial = EvolutionResult(final, method, config, rho, {})
    return replace(partial, outcome_probs=outcome_probabilities(partial))


def commutator_norm(h_a, h_b) -> float:
    """Frobenius norm of ``[h_a, h_b]``."""
    h_a, h_b = np.asarray(h_a), np.asarray(h_b)
    if h_a.shape != h_b.shape:
        raise DimensionError(f"commutator of shapes {h_a.shape} and {h_b.shape}")
    return frobenius(commutator(h_a, h_b))


def factorization_gap(config: ExperimentConfig, h_a, h_b) -> float:
    """Frobenius distance between ``exp(-it(H_A+H_B))`` and ``exp(-itH_A) exp(-itH_B)``."""
    t = config.interaction_time
    joint = expm_hermitian(h_a + h_b, t)
    return frobenius(joint - expm_hermitian(h_a, t) @ expm_hermitian(h_b, t))


def order_swap_gap(config: ExperimentConfig, h_a, h_b, initial) -> OrderSwapReport:
    """Compare applying station A's evolution before B's with the reverse order.

    Returns the norm of ``(U_A U_B - U_B U_A)|initial>`` and the largest
    difference in any outcome probability between the two orders.
    """
    t = config.interaction_time
    u_a, u_b = expm_hermitian(h_a, t), expm_hermitian(h_b, t)
    ab = u_a @ (u_b @ initial)
    ba = u_b @ (u_a @ initial)
    layout, space = config.layout, config.space
    p_ab = _joint_bin_probabilities(pointer_joint_distribution(ab, layout), space)
    p_ba = _joint_bin_probabilities(pointer_joint_distribution(ba, layout), space)
    diff = max(abs(p_ab[o] - p_ba[o]) for o in OUTCOMES)
    return OrderSwapReport(float(np.linalg.norm(ab - ba)), float(diff))


def locality_report(config: ExperimentConfig, mu: float = 0.0) -> dict[str, float]:
    """Commutator, factorization and order-swap diagnostics for one configuration."""
    layout = config.layout
    h_a = local_hamiltonian("A", config, layout)
    h_b = nonlocal_hamiltonian(config, mu, layout)
    psi = initial_state(config, layout)
    exact = evolve_exact(config, h_a + h_b, psi)
    factored = evolve_factorized(config, h_a, h_b, psi)
    swap = order_swap_gap(config, h_a, h_b, psi)
    return {
        "commutator_norm": commutator_norm(h_a, h_b),
        "factorization_gap": factorization_gap(config, h_a, h_b),
        "state_gap": float(np.linalg.norm(exact - factored)),
        "order_swap_gap": swap.gap,
        "order_swap_prob_diff": swap.max_prob_diff,
    }
