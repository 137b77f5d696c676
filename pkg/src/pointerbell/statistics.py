"""Correlations, CHSH, no-signaling audit and seeded outcome sampling.

An *engine* here is any callable ``(alpha, beta) -> OutcomeDistribution``;
:func:`engine_for` wraps the measurement pipeline into one.

Sampling uses numpy's ``Generator`` over the PCG64 bit generator (permuted
congruential generator, 128-bit state), seeded with the user's integer seed.
One uniform double is drawn per trial and mapped through the cumulative
distribution of the conclusive outcomes, so a given ``(seed, distribution, n)``
always reproduces the same sequence.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass
from math import sqrt

import numpy as np
from scipy.stats import chi2

from .engine import OUTCOMES, EvolutionResult, ExperimentConfig, run
from .photon import AnalyzerSettings

ZERO_PROBABILITY = 1e-12


@dataclass(frozen=True)
class OutcomeDistribution:
    p: dict[str, float]
    p_inconclusive: float = 0.0
    settings: AnalyzerSettings | None = None

    def __post_init__(self):
        if set(self.p) != set(OUTCOMES):
            raise ValueError(f"distribution must cover exactly {OUTCOMES}, got {sorted(self.p)}")
        values = [*self.p.values(), self.p_inconclusive]
        if min(values) < -1e-12:
            raise ValueError(f"negative probability in {self.p}")
        total = sum(values)
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"probabilities sum to {total!r}, not 1")

    @classmethod
    def from_result(cls, result: EvolutionResult) -> "OutcomeDistribution":
        return cls(dict(result.outcome_probs), result.p_inconclusive, result.config.analyzers)

    @property
    def p_conclusive(self) -> float:
        return sum(self.p.values())

    def conditional(self) -> np.ndarray:
        """Probabilities of the four outcomes given a conclusive readout."""
        conclusive = self.p_conclusive
        if conclusive <= 0:
            raise ValueError("distribution has no conclusive outcomes")
        return np.array([max(self.p[o], 0.0) for o in OUTCOMES]) / conclusive


Engine = Callable[[float, float], OutcomeDistribution]


def engine_for(config: ExperimentConfig | None = None, method: str = "branch", mu: float = 0.0) -> Engine:
    """Wrap the measurement pipeline as an ``(alpha, beta)`` engine."""
    base = config or ExperimentConfig()
    if mu != 0 and method == "branch":
        method = "exact"

    def engine(alpha: float, beta: float) -> OutcomeDistribution:
        return OutcomeDistribution.from_result(run(base.at(alpha, beta), method, mu))

    return engine


def correlation(dist: OutcomeDistribution) -> float:
    """``E = P(++) + P(--) - P(+-) - P(-+)`` over conclusive outcomes."""
    q = dist.conditional()
    return float(q[0] - q[1] - q[2] + q[3])


def chsh_correlations(a: float, a_prime: float, b: float, b_prime: float, engine: Engine) -> dict[str, float]:
    return {
        "E(a,b)": correlation(engine(a, b)),
        "E(a,b')": correlation(engine(a, b_prime)),
        "E(a',b)": correlation(engine(a_prime, b)),
        "E(a',b')": correlation(engine(a_prime, b_prime)),
    }


def chsh(a: float, a_prime: float, b: float, b_prime: float, engine: Engine) -> float:
    """``S = E(a,b) - E(a,b') + E(a',b) + E(a',b')``."""
    e = chsh_correlations(a, a_prime, b, b_prime, engine)
    return e["E(a,b)"] - e["E(a,b')"] + e["E(a',b)"] + e["E(a',b')"]


def chsh_scan(engine: Engine, n_samples: int, seed: int = 0,
              extra: Sequence[tuple[float, float, float, float]] = ()) -> tuple[float, tuple[float, ...]]:
    """Largest ``|S|`` over uniformly random angle quadruples in ``[0, pi)``, plus ``extra``.

    Returns ``(max |S|, quadruple attaining it)``.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    quads = [tuple(q) for q in rng.uniform(0.0, np.pi, size=(n_samples, 4))]
    quads.extend(tuple(q) for q in extra)
    best, arg = -np.inf, ()
    for q in quads:
        s = abs(chsh(*q, engine))
        if s > best:
            best, arg = s, q
    return float(best), arg


@dataclass(frozen=True)
class NoSignalingReport:
    max_deviation_a: float
    max_deviation_b: float
    max_spread_a: float
    max_spread_b: float
    tolerance: float
    n_points: int

    @property
    def max_deviation(self) -> float:
        return max(self.max_deviation_a, self.max_deviation_b, self.max_spread_a, self.max_spread_b)

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def no_signaling_audit(engine: Engine, alphas: Sequence[float], betas: Sequence[float],
                       tolerance: float = 1e-10) -> NoSignalingReport:
    """Check that each station's marginal ignores the remote analyzer setting.

    Marginals are taken over conclusive outcomes. ``max_deviation_*`` is the
    largest ``|P(+) - 1/2|``; ``max_spread_a`` is the largest range of
    ``P_A(+)`` over ``beta`` at fixed ``alpha`` (and symmetrically for B).
    """
    pa = np.empty((len(alphas), len(betas)))
    pb = np.empty_like(pa)
    for i, a in enumerate(alphas):
        for j, b in enumerate(betas):
            q = engine(a, b).conditional()
            pa[i, j] = q[0] + q[1]
            pb[i, j] = q[0] + q[2]
    return NoSignalingReport(
        max_deviation_a=float(np.max(np.abs(pa - 0.5))),
        max_deviation_b=float(np.max(np.abs(pb - 0.5))),
        max_spread_a=float(np.max(np.ptp(pa, axis=1))),
        max_spread_b=float(np.max(np.ptp(pb, axis=0))),
        tolerance=tolerance,
        n_points=pa.size,
    )


@dataclass(frozen=True)
class OutcomeSequence:
    """Sampled trials; ``indices`` point into :data:`~pointerbell.engine.OUTCOMES`."""

    indices: np.ndarray
    seed: int
    settings: AnalyzerSettings | None = None

    @property
    def outcomes(self) -> list[str]:
        return [OUTCOMES[i] for i in self.indices]

    def __len__(self) -> int:
        return len(self.indices)

    def counts(self) -> np.ndarray:
        return np.bincount(self.indices, minlength=len(OUTCOMES))

    def frequencies(self) -> np.ndarray:
        return self.counts() / len(self)


def sample(dist: OutcomeDistribution, n: int, seed: int) -> OutcomeSequence:
    """Draw ``n`` i.i.d. conclusive outcomes from ``dist``."""
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    q = dist.conditional()
    live = np.flatnonzero(q > ZERO_PROBABILITY)
    cdf = np.cumsum(q[live])
    cdf /= cdf[-1]
    u = np.random.Generator(np.random.PCG64(seed)).random(n)
    pos = np.minimum(np.searchsorted(cdf, u, side="right"), len(live) - 1)
    idx = live[pos].astype(np.uint8)
    idx.setflags(write=False)
    return OutcomeSequence(idx, seed, dist.settings)


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    dof: int

    def quantile(self, level: float = 0.99) -> float:
        return float(chi2.ppf(level, self.dof))

    def exceeds(self, level: float = 0.99) -> bool:
        return self.statistic > self.quantile(level)


def chi_square_self_test(seq: OutcomeSequence, dist: OutcomeDistribution) -> ChiSquareResult:
    """Pearson goodness of fit of a sampled sequence against its source distribution.

    Cells with zero probability are left out, reducing the degrees of freedom.
    """
    n = len(seq)
    if n < 1000:
        raise ValueError(f"chi-square self-test needs at least 1000 trials, got {n}")
    q = dist.conditional()
    live = q > ZERO_PROBABILITY
    observed = seq.counts()
    if np.any(observed[~live] > 0):
        return ChiSquareResult(float("inf"), int(live.sum()) - 1)
    expected = n * q[live]
    if np.any(expected < 5):
        raise ValueError(f"expected counts {expected} fall below 5")
    stat = float(np.sum((observed[live] - expected) ** 2 / expected))
    return ChiSquareResult(stat, int(live.sum()) - 1)


def standard_errors(dist: OutcomeDistribution, n: int) -> np.ndarray:
    """Binomial standard error ``sqrt(p (1 - p) / n)`` of each empirical frequency."""
    q = dist.conditional()
    return np.array([sqrt(p * (1 - p) / n) for p in q])
