"""Daily arrival process, multi-day ensembles and the cross-day history ledger."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .errors import ContractError, ValidationError
from .urn import (
    FOLLOW_CROWD,
    RANDOM_PREFERENCE,
    DayResult,
    HistoryWeighted,
    Strategy,
    probability_kernel,
    validate_strategy,
)

# uniforms held in memory per worker chunk
_CHUNK_VARIATES = 1 << 22


@dataclass(frozen=True)
class SimulationConfig:
    strategy: Strategy
    n_agents: int
    n_days: int
    seed: int

    def __post_init__(self) -> None:
        if int(self.n_agents) != self.n_agents or self.n_agents < 1:
            raise ValidationError("n_agents", f"n_agents must be a positive integer, got {self.n_agents!r}")
        if int(self.n_days) != self.n_days or self.n_days < 1:
            raise ValidationError("n_days", f"n_days must be a positive integer, got {self.n_days!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValidationError("seed", f"seed must be a 64-bit unsigned integer, got {self.seed!r}")


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    """Queue lengths of every simulated day, in day order.

    Stored column-wise; :attr:`days` materializes :class:`DayResult` rows.
    """

    config: SimulationConfig
    q_a: np.ndarray
    q_b: np.ndarray
    elapsed: float = field(default=0.0, compare=False)

    @property
    def p_a(self) -> np.ndarray:
        return self.q_a / self.config.n_agents

    @property
    def days(self) -> list[DayResult]:
        return [DayResult.from_counts(a, b) for a, b in zip(self.q_a.tolist(), self.q_b.tolist())]

    def __len__(self) -> int:
        return len(self.q_a)

    def same_outcome(self, other: "EnsembleResult") -> bool:
        return (
            self.config == other.config
            and np.array_equal(self.q_a, other.q_a)
            and np.array_equal(self.q_b, other.q_b)
        )


def make_rng_stream(seed: int, stream_index: int) -> np.random.Generator:
    """Independent, reproducible PCG64 stream number ``stream_index`` under ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream_index,))))


def history_aggregate(fixed_points, delta: float) -> float:
    """Discount-weighted mean of past fixed points, most recent weighted by ``delta``.

    ``fixed_points`` is ordered oldest first. The k-th most recent value
    carries weight ``delta**k``; weights are normalized in log space, so
    any ``delta`` in [0, inf] and long histories stay finite. ``delta=0``
    and ``delta=inf`` are the limits (most recent only, oldest only).
    """
    values = np.asarray(fixed_points, dtype=float)
    if values.size == 0:
        raise ContractError("history_aggregate needs at least one past fixed point")
    if delta < 0 or math.isnan(delta):
        raise ContractError(f"delta must be >= 0, got {delta!r}")
    if delta == 0:
        return float(values[-1])
    if math.isinf(delta):
        return float(values[0])
    recent_first = values[::-1]
    ages = np.arange(1, values.size + 1, dtype=float)
    log_w = ages * math.log(delta)
    w = np.exp(log_w - log_w.max())
    return float(np.dot(w, recent_first) / w.sum())


class HistoryLedger:
    """Past fixed points plus an incrementally maintained discounted aggregate.

    Appending a new most-recent value ``p`` to a history whose weight sum
    is ``Z`` (sum of delta**k over current entries) gives

        H <- (p + Z * H) / (1 + Z),   Z <- delta * (1 + Z)

    The common factor ``delta`` cancels, so only ``Z`` grows. Once ``Z``
    overflows to inf the new-value weight is exactly 0, which is the
    correct limit.
    """

    def __init__(self, delta: float):
        if delta < 0 or math.isnan(delta):
            raise ContractError(f"delta must be >= 0, got {delta!r}")
        self.delta = float(delta)
        self.fixed_points: list[float] = []
        self._aggregate = math.nan
        self._weight_sum = 0.0

    def __len__(self) -> int:
        return len(self.fixed_points)

    @property
    def value(self) -> float:
        if not self.fixed_points:
            raise ContractError("history is empty")
        return self._aggregate

    def append(self, p: float) -> None:
        if not 0.0 <= p <= 1.0:
            raise ContractError(f"fixed point must lie in [0, 1], got {p!r}")
        z = self._weight_sum
        if not self.fixed_points:
            self._aggregate = float(p)
        else:
            w_new = 1.0 / (1.0 + z)
            self._aggregate = w_new * p + (1.0 - w_new) * self._aggregate
        self.fixed_points.append(float(p))
        self._weight_sum = self.delta * (1.0 + z) if self.delta > 0 else 0.0

    def recompute(self) -> float:
        return history_aggregate(self.fixed_points, self.delta)


@nb.njit(cache=True, nogil=True)
def _run_days(code, p1, p2, uniforms, history_value, q_a_out):
    """Play one day per row of ``uniforms``; write the A-queue length into ``q_a_out``."""
    n_rows = uniforms.shape[0]
    signed = code == RANDOM_PREFERENCE
    n_agents = uniforms.shape[1] // 2 if signed else uniforms.shape[1]
    for r in range(n_rows):
        n_a = 1
        n_b = 1
        for t in range(n_agents):
            if signed:
                sign = 1 if uniforms[r, 2 * t] < 0.5 else -1
                u = uniforms[r, 2 * t + 1]
            else:
                sign = 1
                u = uniforms[r, t]
            if u < probability_kernel(code, p1, p2, n_a, n_b, history_value, sign):
                n_a += 1
            else:
                n_b += 1
        q_a_out[r] = n_a - 1


def _variates_per_day(strategy: Strategy, n_agents: int) -> int:
    return 2 * n_agents if strategy.needs_sign else n_agents


def _kernel_args(strategy: Strategy, history_value: float | None):
    if strategy.needs_history and history_value is None:
        if strategy.first_day_history is not None:
            history_value = strategy.first_day_history
        else:
            return FOLLOW_CROWD, 1.0, 0.0, 0.0
    p1, p2 = strategy.params
    return strategy.code, p1, p2, 0.0 if history_value is None else float(history_value)


def run_day(
    strategy: Strategy,
    n_agents: int,
    history_value: float | None,
    rng: np.random.Generator,
) -> DayResult:
    """Play one day of ``n_agents`` sequential arrivals starting from one seed agent per side.

    For :class:`RandomPreference` each arrival consumes two variates
    (sign first, then choice); every other strategy consumes one.
    Passing ``history_value=None`` to a history strategy plays the
    no-history first day, using the strategy's ``first_day_history``.
    """
    if n_agents < 1:
        raise ContractError("n_agents must be >= 1")
    if history_value is not None and not strategy.needs_history:
        raise ContractError("history_value given to a strategy that ignores history")
    uniforms = rng.random(_variates_per_day(strategy, n_agents)).reshape(1, -1)
    q_a = np.empty(1, dtype=np.int64)
    code, p1, p2, h = _kernel_args(strategy, history_value)
    _run_days(code, p1, p2, uniforms, h, q_a)
    return DayResult.from_counts(int(q_a[0]), n_agents - int(q_a[0]))


def _run_block(config: SimulationConfig, start: int, stop: int) -> np.ndarray:
    width = _variates_per_day(config.strategy, config.n_agents)
    uniforms = np.empty((stop - start, width))
    for row, day in enumerate(range(start, stop)):
        make_rng_stream(config.seed, day).random(out=uniforms[row])
    q_a = np.empty(stop - start, dtype=np.int64)
    code, p1, p2, h = _kernel_args(config.strategy, None)
    _run_days(code, p1, p2, uniforms, h, q_a)
    return q_a


def _run_history(config: SimulationConfig) -> np.ndarray:
    strategy = config.strategy
    ledger = HistoryLedger(strategy.delta)
    q_a = np.empty(config.n_days, dtype=np.int64)
    out = np.empty(1, dtype=np.int64)
    for day in range(config.n_days):
        uniforms = make_rng_stream(config.seed, day).random(config.n_agents).reshape(1, -1)
        code, p1, p2, h = _kernel_args(strategy, ledger.value if ledger else None)
        _run_days(code, p1, p2, uniforms, h, out)
        q_a[day] = out[0]
        ledger.append(out[0] / config.n_agents)
    return q_a


def run_ensemble(config: SimulationConfig, threads: int = 1) -> EnsembleResult:
    """Simulate ``config.n_days`` days; day ``i`` draws from stream ``i`` of ``config.seed``.

    Memoryless strategies split the days into blocks that may run on
    ``threads`` workers; history-weighted runs are sequential because each
    day reads the ledger of all earlier days (day 0 falls back on
    ``first_day_history``). The outcome depends only on
    ``config``.
    """
    validate_strategy(config.strategy)
    if threads < 1:
        raise ContractError("threads must be >= 1")
    started = time.perf_counter()
    if isinstance(config.strategy, HistoryWeighted):
        q_a = _run_history(config)
    else:
        width = _variates_per_day(config.strategy, config.n_agents)
        block = max(1, _CHUNK_VARIATES // width)
        bounds = [(s, min(s + block, config.n_days)) for s in range(0, config.n_days, block)]
        if threads == 1 or len(bounds) == 1:
            parts = [_run_block(config, s, e) for s, e in bounds]
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(lambda b: _run_block(config, *b), bounds))
        q_a = np.concatenate(parts)
    q_b = config.n_agents - q_a
    return EnsembleResult(config, q_a, q_b, time.perf_counter() - started)
