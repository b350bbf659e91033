"""Observables computed from ensembles: histograms, queue ratios, tail slopes, KS distance."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np
from scipy import stats as sps

from .errors import ContractError, InsufficientDataError, ValidationError
from .simulate import EnsembleResult
from .urn import DayResult


def _check_bins(b) -> None:
    if int(b.n_bins) != b.n_bins or b.n_bins < 1:
        raise ValidationError("bins", f"n_bins must be a positive integer, got {b.n_bins!r}")
    if not b.hi > b.lo:
        raise ValidationError("hi", f"need hi > lo, got lo={b.lo!r}, hi={b.hi!r}")


@dataclass(frozen=True)
class Linear:
    lo: float
    hi: float
    n_bins: int
    kind = "linear"

    def __post_init__(self) -> None:
        _check_bins(self)

    def edges(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.n_bins + 1)

    def centers(self) -> np.ndarray:
        e = self.edges()
        return 0.5 * (e[:-1] + e[1:])


@dataclass(frozen=True)
class Logarithmic:
    lo: float
    hi: float
    n_bins: int
    kind = "log"

    def __post_init__(self) -> None:
        if not self.lo > 0:
            raise ValidationError("lo", "logarithmic binning needs lo > 0")
        _check_bins(self)

    def edges(self) -> np.ndarray:
        return np.geomspace(self.lo, self.hi, self.n_bins + 1)

    def centers(self) -> np.ndarray:
        # geometric centre: the bin average of c*z**-2 equals c*center**-2 exactly
        e = self.edges()
        return np.sqrt(e[:-1] * e[1:])


Binning = Union[Linear, Logarithmic]

# ratio tails over the plotted range, >= 3 bins per decade
DEFAULT_RATIO_BINNING = Logarithmic(1.0, 100.0, 40)


@dataclass(frozen=True, eq=False)
class Histogram:
    """Binned density estimate.

    Bins are half-open ``[b_k, b_{k+1})`` except the last, which is closed.
    ``density`` is normalized by the total sample count (out-of-range
    samples included), so it integrates to the in-range fraction.
    """

    binning: Binning
    counts: np.ndarray
    density: np.ndarray
    n_below: int = 0
    n_above: int = 0

    @property
    def edges(self) -> np.ndarray:
        return self.binning.edges()

    @property
    def centers(self) -> np.ndarray:
        return self.binning.centers()

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def n_in_range(self) -> int:
        return int(self.counts.sum())

    @property
    def n_total(self) -> int:
        return self.n_in_range + self.n_below + self.n_above

    @classmethod
    def from_counts(cls, binning: Binning, counts, n_below: int = 0, n_above: int = 0) -> "Histogram":
        counts = np.asarray(counts, dtype=np.int64)
        if counts.shape != (binning.n_bins,):
            raise ContractError(f"expected {binning.n_bins} counts, got shape {counts.shape}")
        total = int(counts.sum()) + n_below + n_above
        widths = np.diff(binning.edges())
        density = counts / (total * widths) if total else np.zeros(binning.n_bins)
        return cls(binning, counts, density, int(n_below), int(n_above))

    def same_as(self, other: "Histogram") -> bool:
        return (
            self.binning == other.binning
            and np.array_equal(self.counts, other.counts)
            and np.array_equal(self.density, other.density)
            and self.n_below == other.n_below
            and self.n_above == other.n_above
        )


def build_histogram(samples, binning: Binning) -> Histogram:
    x = np.asarray(samples, dtype=float).ravel()
    edges = binning.edges()
    below = x < binning.lo
    above = x > binning.hi
    inside = x[~(below | above)]
    idx = np.searchsorted(edges, inside, side="right") - 1
    idx[idx == binning.n_bins] = binning.n_bins - 1  # x == hi joins the last bin
    counts = np.bincount(idx, minlength=binning.n_bins)
    return Histogram.from_counts(binning, counts, int(below.sum()), int(above.sum()))


class RatioSeries(NamedTuple):
    ratios: np.ndarray
    skipped: int


DaysLike = Union[EnsembleResult, Sequence[DayResult]]


def _queue(days: DaysLike, side: str) -> np.ndarray:
    side = side.upper()
    if side not in ("A", "B"):
        raise ContractError(f"side must be 'A' or 'B', got {side!r}")
    if isinstance(days, EnsembleResult):
        return days.q_a if side == "A" else days.q_b
    return np.array([d.q_a if side == "A" else d.q_b for d in days], dtype=np.int64)


def queue_ratio_series(days: DaysLike, side: str = "A") -> RatioSeries:
    """Consecutive-day ratios ``Q_i / Q_{i+1}`` for one restaurant.

    Pairs with an empty next-day queue are dropped and counted in
    ``skipped``; an empty current-day queue gives ratio 0.
    """
    q = _queue(days, side)
    if len(q) < 2:
        raise ContractError("ratios need at least 2 days")
    num = q[:-1].astype(float)
    den = q[1:].astype(float)
    keep = den > 0
    return RatioSeries(num[keep] / den[keep], int((~keep).sum()))


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    stderr: float
    fit_range: tuple[float, float]
    n_points: int


def fit_powerlaw_tail(hist: Histogram, fit_range: tuple[float, float]) -> SlopeFit:
    """Least-squares line through ``(log center, log density)`` of nonempty bins.

    A bin takes part when its geometric centre lies inside ``fit_range``
    and its count is positive. Natural logs are used; the slope is base
    independent.
    """
    if not isinstance(hist.binning, Logarithmic):
        raise ContractError("tail fits need logarithmic binning")
    z_min, z_max = map(float, fit_range)
    if z_min < 1 or z_max <= z_min:
        raise ContractError(f"fit range must satisfy 1 <= z_min < z_max, got {fit_range!r}")
    centers = hist.centers
    use = (centers >= z_min) & (centers <= z_max) & (hist.counts > 0) & (hist.density > 0)
    n = int(use.sum())
    if n < 3:
        raise InsufficientDataError(f"need >= 3 nonempty bins in [{z_min:g}, {z_max:g}], found {n}")
    res = sps.linregress(np.log(centers[use]), np.log(hist.density[use]))
    return SlopeFit(float(res.slope), float(res.intercept), float(res.stderr), (z_min, z_max), n)


def uniformity_ks(samples) -> float:
    """Kolmogorov-Smirnov distance between the sample CDF and Uniform(0, 1)."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise ContractError("KS statistic of an empty sample")
    cdf = np.clip(x, 0.0, 1.0)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))


@dataclass(frozen=True, eq=False)
class Summary:
    mean: float
    std: float
    min: float
    max: float
    _sorted: np.ndarray

    @property
    def n(self) -> int:
        return self._sorted.size

    def fraction_above(self, t: float) -> float:
        return float(self.n - np.searchsorted(self._sorted, t, side="right")) / self.n

    def fraction_below(self, t: float) -> float:
        return float(np.searchsorted(self._sorted, t, side="left")) / self.n


def summary(samples) -> Summary:
    """Population mean/std, extremes and threshold fractions of a sample."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ContractError("summary of an empty sample")
    return Summary(float(x.mean()), float(x.std()), float(x.min()), float(x.max()), np.sort(x))
