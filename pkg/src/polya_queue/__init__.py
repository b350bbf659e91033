"""Two-restaurant queue-length simulator built on generalized Polya urns."""

from .errors import ContractError, InsufficientDataError, ResourceError, ValidationError
from .oracle import ExactPmf, exact_distribution, ratio_of_uniforms_density, sample_ratio_tail, total_variation
from .simulate import (
    EnsembleResult,
    HistoryLedger,
    SimulationConfig,
    history_aggregate,
    make_rng_stream,
    run_day,
    run_ensemble,
)
from .stats import (
    Histogram,
    Linear,
    Logarithmic,
    SlopeFit,
    build_histogram,
    fit_powerlaw_tail,
    queue_ratio_series,
    summary,
    uniformity_ks,
)
from .urn import (
    AvoidCrowd,
    DayResult,
    FixedPreference,
    FollowCrowd,
    HistoryWeighted,
    Random,
    RandomPreference,
    Strategy,
    UrnState,
    choice_probability,
    validate_strategy,
)

__version__ = "0.1.0"
