"""Independent reference implementations used only by the test-suite."""

import itertools

import numpy as np

from polya_queue.urn import (
    AvoidCrowd,
    FixedPreference,
    FollowCrowd,
    HistoryWeighted,
    Random,
    RandomPreference,
)


def _clamp(p):
    return min(1.0, max(0.0, p))


def direct_probability(strategy, n_a, n_b, history_value=None, sign=None):
    """Choice rules written out the textbook way (power form, no ratio trick)."""
    t = n_a + n_b
    if isinstance(strategy, AvoidCrowd):
        return n_b / t
    if isinstance(strategy, Random):
        return 0.5
    if isinstance(strategy, FollowCrowd):
        e = strategy.epsilon
        return n_a**e / (n_a**e + n_b**e)
    if isinstance(strategy, FixedPreference):
        return _clamp((n_a + strategy.alpha) / t)
    if isinstance(strategy, RandomPreference):
        return _clamp((n_a + sign * strategy.alpha_abs) / t)
    if isinstance(strategy, HistoryWeighted):
        return strategy.gamma * n_a / t + (1 - strategy.gamma) * history_value
    raise TypeError(strategy)


def brute_force_pmf(strategy, n_agents, history_value=None, enumerate_signs=False):
    """Law of q_a by summing the probability of every arrival path.

    For random-preference agents the sign is either averaged per step or,
    with ``enumerate_signs``, enumerated as part of the path (4**N leaves).
    """
    pmf = np.zeros(n_agents + 1)
    signed = isinstance(strategy, RandomPreference)
    if signed and enumerate_signs:
        for path in itertools.product((0, 1), repeat=n_agents):
            for signs in itertools.product((1, -1), repeat=n_agents):
                n_a = n_b = 1
                prob = 0.5**n_agents
                for choice, s in zip(path, signs):
                    p = direct_probability(strategy, n_a, n_b, sign=s)
                    prob *= p if choice else 1 - p
                    n_a, n_b = (n_a + 1, n_b) if choice else (n_a, n_b + 1)
                pmf[sum(path)] += prob
        return pmf
    for path in itertools.product((0, 1), repeat=n_agents):
        n_a = n_b = 1
        prob = 1.0
        for choice in path:
            if signed:
                p = 0.5 * (direct_probability(strategy, n_a, n_b, sign=1)
                           + direct_probability(strategy, n_a, n_b, sign=-1))
            else:
                p = direct_probability(strategy, n_a, n_b, history_value)
            prob *= p if choice else 1 - p
            n_a, n_b = (n_a + 1, n_b) if choice else (n_a, n_b + 1)
        pmf[sum(path)] += prob
    return pmf


def multinomial_violations(counts, probs, sigmas=4.0):
    """Outcomes whose empirical frequency leaves the per-outcome sigma band."""
    counts = np.asarray(counts, dtype=float)
    m = counts.sum()
    probs = np.asarray(probs, dtype=float)
    freq = counts / m
    band = sigmas * np.sqrt(probs * (1 - probs) / m)
    return [(k, freq[k], probs[k], band[k]) for k in range(len(probs)) if abs(freq[k] - probs[k]) > band[k]]
