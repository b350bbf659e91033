"""Exact reference laws used to check the simulator.

The within-day process of every memoryless strategy is a Markov chain on
``(arrivals so far, q_a)``, so the law of a day's A-queue follows from a
forward recursion in O(N^2). History-weighted days are covered only for a
fixed history value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ResourceError
from .urn import RandomPreference, Strategy, UrnState, choice_probability

MAX_DP_AGENTS = 2000


@dataclass(frozen=True, eq=False)
class ExactPmf:
    probabilities: np.ndarray

    @property
    def n_agents(self) -> int:
        return self.probabilities.size - 1

    @property
    def mean(self) -> float:
        return float(np.dot(np.arange(self.probabilities.size), self.probabilities))


def _arrival_probability(strategy, n_a, n_b, history_value):
    state = UrnState(n_a, n_b)
    if isinstance(strategy, RandomPreference):
        # the sign is an independent fair coin per arrival: average it out
        up = choice_probability(strategy, state, preference_sign=1)
        down = choice_probability(strategy, state, preference_sign=-1)
        return 0.5 * (up + down)
    return choice_probability(strategy, state, history_value=history_value)


def exact_distribution(
    strategy: Strategy,
    n_agents: int,
    history_value: float | None = None,
) -> ExactPmf:
    """Exact law of ``q_a`` after ``n_agents`` arrivals from the (1, 1) seed state."""
    if n_agents < 1:
        raise ContractError("n_agents must be >= 1")
    if n_agents > MAX_DP_AGENTS:
        raise ResourceError(f"n_agents={n_agents} exceeds the DP budget of {MAX_DP_AGENTS}")
    if strategy.needs_history and history_value is None:
        raise ContractError("history_weighted needs a fixed history_value for the exact law")
    p = np.zeros(n_agents + 1)
    p[0] = 1.0
    for n in range(n_agents):
        pi = np.array([_arrival_probability(strategy, k + 1, n - k + 1, history_value) for k in range(n + 1)])
        nxt = np.zeros(n_agents + 1)
        nxt[1 : n + 2] += p[: n + 1] * pi
        nxt[: n + 1] += p[: n + 1] * (1.0 - pi)
        p = nxt
    return ExactPmf(p)


def total_variation(p, q) -> float:
    p = np.asarray(getattr(p, "probabilities", p), dtype=float)
    q = np.asarray(getattr(q, "probabilities", q), dtype=float)
    return 0.5 * float(np.abs(p - q).sum())


def ratio_of_uniforms_density(z: float) -> float:
    """Density of ``U1/U2`` for independent Uniform(0, 1) variables."""
    if z < 0:
        raise ContractError(f"ratio density undefined for z={z!r} < 0")
    return 0.5 if z <= 1.0 else 0.5 / (z * z)


def sample_ratio_tail(n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` values from the ``z > 1`` branch of the ratio law by CDF inversion.

    Above 1 the CDF is ``1 - 1/(2z)``; restricting ``u`` to (1/2, 1) gives
    ``z = 1 / (2 (1 - u)) > 1``.
    """
    u = 0.5 + 0.5 * rng.random(n)
    return 1.0 / (2.0 * (1.0 - u))
