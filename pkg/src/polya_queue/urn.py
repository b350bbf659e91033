"""Domain types and choice rules for the two-restaurant game.

Every day starts with one seed agent in each restaurant. Arriving agents
pick restaurant A with a probability that depends on the current counts
and on the strategy in force. The six strategies are plain frozen
dataclasses; each one maps onto an integer code and two float parameters
so the compiled arrival loop in :mod:`polya_queue.simulate` can evaluate
it without touching Python objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar

import numba as nb

from .errors import ContractError, ValidationError

AVOID_CROWD = 0
RANDOM = 1
FOLLOW_CROWD = 2
FIXED_PREFERENCE = 3
RANDOM_PREFERENCE = 4
HISTORY_WEIGHTED = 5


@dataclass(frozen=True)
class UrnState:
    """Occupation counts of both restaurants within one day (seeds included)."""

    n_a: int
    n_b: int

    def __post_init__(self) -> None:
        if self.n_a < 1 or self.n_b < 1:
            raise ContractError(f"counts must be >= 1, got n_a={self.n_a}, n_b={self.n_b}")

    @property
    def arrivals(self) -> int:
        return self.n_a + self.n_b - 2


@dataclass(frozen=True)
class DayResult:
    q_a: int
    q_b: int
    p_a: float

    @classmethod
    def from_counts(cls, q_a: int, q_b: int) -> "DayResult":
        return cls(int(q_a), int(q_b), q_a / (q_a + q_b))

    @property
    def p_b(self) -> float:
        return 1.0 - self.p_a


class Strategy:
    """Base class of the six choice rules.

    Subclasses set ``code`` and expose their parameters through ``params``
    as a ``(float, float)`` pair consumed by the compiled kernel.
    """

    code: ClassVar[int]
    name: ClassVar[str]

    def __post_init__(self) -> None:
        validate_strategy(self)

    @property
    def params(self) -> tuple[float, float]:
        return (0.0, 0.0)

    @property
    def needs_history(self) -> bool:
        return self.code == HISTORY_WEIGHTED

    @property
    def needs_sign(self) -> bool:
        return self.code == RANDOM_PREFERENCE

    def as_dict(self) -> dict[str, float | str]:
        out: dict[str, float | str] = {"strategy": self.name}
        for key, value in vars(self).items():
            out[key] = value
        return out


@dataclass(frozen=True)
class AvoidCrowd(Strategy):
    code: ClassVar[int] = AVOID_CROWD
    name: ClassVar[str] = "avoid_crowd"


@dataclass(frozen=True)
class Random(Strategy):
    code: ClassVar[int] = RANDOM
    name: ClassVar[str] = "random"


@dataclass(frozen=True)
class FollowCrowd(Strategy):
    """Nonlinear crowd following, ``n_a^eps / (n_a^eps + n_b^eps)``."""

    epsilon: float
    code: ClassVar[int] = FOLLOW_CROWD
    name: ClassVar[str] = "follow_crowd"

    @property
    def params(self) -> tuple[float, float]:
        return (float(self.epsilon), 0.0)


@dataclass(frozen=True)
class FixedPreference(Strategy):
    """Crowd following with a shared bias ``alpha`` towards restaurant A."""

    alpha: float
    code: ClassVar[int] = FIXED_PREFERENCE
    name: ClassVar[str] = "fixed_preference"

    @property
    def params(self) -> tuple[float, float]:
        return (float(self.alpha), 0.0)


@dataclass(frozen=True)
class RandomPreference(Strategy):
    """Crowd following with a bias of size ``alpha_abs`` whose sign is a coin flip per agent."""

    alpha_abs: float
    code: ClassVar[int] = RANDOM_PREFERENCE
    name: ClassVar[str] = "random_preference"

    @property
    def params(self) -> tuple[float, float]:
        return (float(self.alpha_abs), 0.0)


@dataclass(frozen=True)
class HistoryWeighted(Strategy):
    """Mix of the current crowd (weight ``gamma``) and discounted past fixed points.

    ``first_day_history`` is the history value used before any day has been
    played. The default 0.5 favours neither restaurant; ``None`` plays the
    first day with the plain Polya rule instead.
    """

    gamma: float
    delta: float
    first_day_history: float | None = 0.5
    code: ClassVar[int] = HISTORY_WEIGHTED
    name: ClassVar[str] = "history_weighted"

    @property
    def params(self) -> tuple[float, float]:
        return (float(self.gamma), float(self.delta))


STRATEGIES: dict[str, type[Strategy]] = {
    cls.name: cls
    for cls in (AvoidCrowd, Random, FollowCrowd, FixedPreference, RandomPreference, HistoryWeighted)
}


def _check_range(field, value, lo, hi, allow_inf=False):
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ValidationError(field, f"{field} must be a real number, got {value!r}")
    if math.isnan(value) or (math.isinf(value) and not allow_inf):
        raise ValidationError(field, f"{field} must be finite, got {value!r}")
    if value < lo:
        raise ValidationError(field, f"{field} < {lo:g}")
    if hi is not None and value > hi:
        raise ValidationError(field, f"{field} > {hi:g}")


def validate_strategy(strategy: Strategy) -> None:
    """Raise :class:`ValidationError` naming the first out-of-range parameter."""
    if isinstance(strategy, FollowCrowd):
        _check_range("epsilon", strategy.epsilon, 0.0, None)
    elif isinstance(strategy, FixedPreference):
        # alpha > 1 would hand restaurant B a negative probability at the seed state
        _check_range("alpha", strategy.alpha, 0.0, 1.0)
    elif isinstance(strategy, RandomPreference):
        _check_range("alpha_abs", strategy.alpha_abs, 0.0, None)
    elif isinstance(strategy, HistoryWeighted):
        _check_range("gamma", strategy.gamma, 0.0, 1.0)
        _check_range("delta", strategy.delta, 0.0, None, allow_inf=True)
        if strategy.first_day_history is not None:
            _check_range("first_day_history", strategy.first_day_history, 0.0, 1.0)
    elif not isinstance(strategy, (AvoidCrowd, Random)):
        raise ValidationError("strategy", f"unknown strategy {strategy!r}")


@nb.njit(cache=True, nogil=True)
def probability_kernel(code, p1, p2, n_a, n_b, history_value, sign):
    """Probability that the next agent picks A; shared by the library and the arrival loop."""
    total = n_a + n_b
    if code == AVOID_CROWD:
        p = n_b / total
    elif code == RANDOM:
        p = 0.5
    elif code == FOLLOW_CROWD:
        if p1 == 1.0:
            p = n_a / total
        else:
            # ratio form: n^eps never materialized
            p = 1.0 / (1.0 + (n_b / n_a) ** p1)
    elif code == FIXED_PREFERENCE:
        p = (n_a + p1) / total
    elif code == RANDOM_PREFERENCE:
        p = (n_a + sign * p1) / total
    else:
        p = p1 * (n_a / total) + (1.0 - p1) * history_value
    if p < 0.0:
        return 0.0
    if p > 1.0:
        return 1.0
    return p


def choice_probability(
    strategy: Strategy,
    state: UrnState,
    history_value: float | None = None,
    preference_sign: int | None = None,
) -> float:
    """Return the probability that the next arrival chooses restaurant A.

    ``history_value`` must be given exactly when the strategy is
    :class:`HistoryWeighted`, and ``preference_sign`` (+1 or -1) exactly
    when it is :class:`RandomPreference`. Results are clamped to [0, 1].
    """
    validate_strategy(strategy)
    if strategy.needs_history != (history_value is not None):
        raise ContractError("history_value is required for history_weighted and only for it")
    if strategy.needs_sign != (preference_sign is not None):
        raise ContractError("preference_sign is required for random_preference and only for it")
    if preference_sign is not None and preference_sign not in (1, -1):
        raise ContractError(f"preference_sign must be +1 or -1, got {preference_sign!r}")
    if history_value is not None and not 0.0 <= history_value <= 1.0:
        raise ContractError(f"history_value must lie in [0, 1], got {history_value!r}")
    p1, p2 = strategy.params
    return float(
        probability_kernel(
            strategy.code,
            p1,
            p2,
            int(state.n_a),
            int(state.n_b),
            0.0 if history_value is None else float(history_value),
            1 if preference_sign is None else int(preference_sign),
        )
    )
