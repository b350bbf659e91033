"""Experiment runner: ``polya-queue run SPEC...`` and ``polya-queue validate SPEC...``.

A spec file is a list of ``key = value`` lines. Keys before the first
section header (or under ``[experiment]``) describe the simulation; each
``[histogram]`` section requests one output table::

    name = fig1_alpha0.3
    strategy = fixed_preference
    alpha = 0.3
    n_agents = 5000
    n_days = 40000
    seed = 1

    [histogram]
    target = fixed_points
    binning = linear
    lo = 0
    hi = 1
    bins = 50

Targets are ``fixed_points``, ``ratios_A`` and ``ratios_B``; a ratio
table may add ``fit_min``/``fit_max`` to get a power-law slope sidecar.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .simulate import EnsembleResult, SimulationConfig, run_ensemble
from .stats import (
    DEFAULT_RATIO_BINNING,
    Binning,
    Histogram,
    Linear,
    Logarithmic,
    build_histogram,
    fit_powerlaw_tail,
    queue_ratio_series,
)
from .urn import STRATEGIES

TARGETS = ("fixed_points", "ratios_A", "ratios_B")
STRATEGY_KEYS = {
    "avoid_crowd": (),
    "random": (),
    "follow_crowd": ("epsilon",),
    "fixed_preference": ("alpha",),
    "random_preference": ("alpha_abs",),
    "history_weighted": ("gamma", "delta"),
}
OPTIONAL_STRATEGY_KEYS = {"history_weighted": ("first_day_history",)}
PARAMETER_KEYS = {"epsilon", "alpha", "alpha_abs", "gamma", "delta", "first_day_history"}
EXPERIMENT_KEYS = {"name", "output_dir", "strategy", "n_agents", "n_days", "seed"} | PARAMETER_KEYS
HISTOGRAM_KEYS = {"target", "binning", "lo", "hi", "bins", "fit_min", "fit_max"}
DEFAULT_FIXED_POINT_BINNING = Linear(0.0, 1.0, 50)
CSV_HEADER = ["bin_lo", "bin_hi", "count", "density"]
FIT_HEADER = ["slope", "stderr", "intercept", "n_points", "z_min", "z_max"]


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass(frozen=True)
class HistogramRequest:
    target: str
    binning: Binning
    fit_range: tuple[float, float] | None = None


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    config: SimulationConfig
    histograms: tuple[HistogramRequest, ...]
    output_dir: Path = Path(".")

    def __post_init__(self) -> None:
        if not self.name:
            raise ConfigError("name must be nonempty")
        if not self.histograms:
            raise ConfigError("at least one [histogram] section is required")
        targets = [h.target for h in self.histograms]
        if len(set(targets)) != len(targets):
            raise ConfigError("each histogram target may appear only once")
        if self.config.n_days < 2 and any(t.startswith("ratios") for t in targets):
            raise ConfigError("ratios require n_days >= 2")

    def with_overrides(self, seed: int | None = None, output_dir: str | Path | None = None) -> "ExperimentSpec":
        spec = self
        if seed is not None:
            spec = dataclasses.replace(spec, config=dataclasses.replace(spec.config, seed=seed))
        if output_dir is not None:
            spec = dataclasses.replace(spec, output_dir=Path(output_dir))
        return spec


def _number(key, value, line, kind=float):
    try:
        if kind is int:
            out = int(value, 0) if value.strip().lower().startswith("0x") else int(value)
        else:
            out = float(value)
    except ValueError:
        raise ConfigError(f"{key} must be {'an integer' if kind is int else 'a number'}, got {value!r}", line) from None
    return out


def _split_sections(text: str):
    """Yield ``(section, {key: (value, line)}, header_line)`` blocks."""
    blocks = [("experiment", {}, 0)]
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {line!r}", lineno)
            section = line[1:-1].strip().lower()
            if section not in ("experiment", "histogram"):
                raise ConfigError(f"unknown section [{section}]", lineno)
            if section == "experiment":
                if len(blocks) > 1 or blocks[0][1]:
                    raise ConfigError("[experiment] must come first and only once", lineno)
                continue
            blocks.append((section, {}, lineno))
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        entries = blocks[-1][1]
        if key in entries:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        entries[key] = (value, lineno)
    return blocks


def _parse_strategy(entries):
    if "strategy" not in entries:
        raise ConfigError("strategy required")
    name, line = entries["strategy"]
    if name not in STRATEGIES:
        raise ConfigError(f"unknown strategy {name!r}; expected one of {', '.join(STRATEGIES)}", line)
    required = STRATEGY_KEYS[name]
    allowed = set(required) | set(OPTIONAL_STRATEGY_KEYS.get(name, ()))
    for key in PARAMETER_KEYS:
        if key in entries and key not in allowed:
            raise ConfigError(f"{key} is not a parameter of {name}", entries[key][1])
    kwargs = {}
    for key in required:
        if key not in entries:
            raise ConfigError(f"{key} required")
        kwargs[key] = _number(key, *entries[key])
    if "first_day_history" in entries:
        value, line = entries["first_day_history"]
        kwargs["first_day_history"] = None if value.lower() == "polya" else _number("first_day_history", value, line)
    try:
        return STRATEGIES[name](**kwargs)
    except ValidationError as exc:
        raise ConfigError(f"{exc.field}: {exc}", entries.get(exc.field, (None, None))[1]) from None


def _parse_histogram(entries, header_line):
    for key, (_, line) in entries.items():
        if key not in HISTOGRAM_KEYS:
            raise ConfigError(f"unknown key {key!r} in [histogram]", line)
    if "target" not in entries:
        raise ConfigError("target required in [histogram]", header_line)
    target, line = entries["target"]
    if target not in TARGETS:
        raise ConfigError(f"unknown target {target!r}; expected one of {', '.join(TARGETS)}", line)
    default = DEFAULT_FIXED_POINT_BINNING if target == "fixed_points" else DEFAULT_RATIO_BINNING
    kind, kind_line = entries.get("binning", (default.kind, header_line))
    if kind not in ("linear", "log"):
        raise ConfigError(f"binning must be 'linear' or 'log', got {kind!r}", kind_line)
    lo = _number("lo", *entries["lo"]) if "lo" in entries else default.lo
    hi = _number("hi", *entries["hi"]) if "hi" in entries else default.hi
    bins = _number("bins", *entries["bins"], kind=int) if "bins" in entries else default.n_bins
    try:
        binning = (Linear if kind == "linear" else Logarithmic)(lo, hi, bins)
    except ValidationError as exc:
        raise ConfigError(f"{exc.field}: {exc}", entries.get(exc.field, (None, header_line))[1]) from None
    fit_range = None
    if ("fit_min" in entries) != ("fit_max" in entries):
        raise ConfigError("fit_min and fit_max must be given together", header_line)
    if "fit_min" in entries:
        if kind != "log":
            raise ConfigError("power-law fits need binning = log", header_line)
        fit_range = (_number("fit_min", *entries["fit_min"]), _number("fit_max", *entries["fit_max"]))
        if not 1 <= fit_range[0] < fit_range[1]:
            raise ConfigError("fit range must satisfy 1 <= fit_min < fit_max", entries["fit_min"][1])
    return HistogramRequest(target, binning, fit_range)


def parse_config(text: str) -> ExperimentSpec:
    """Parse and fully validate an experiment spec document."""
    blocks = _split_sections(text)
    _, top, _ = blocks[0]
    for key, (_, line) in top.items():
        if key not in EXPERIMENT_KEYS:
            raise ConfigError(f"unknown key {key!r}", line)
    for key in ("name", "n_agents", "n_days", "seed"):
        if key not in top:
            raise ConfigError(f"{key} required")
    strategy = _parse_strategy(top)
    try:
        config = SimulationConfig(
            strategy,
            _number("n_agents", *top["n_agents"], kind=int),
            _number("n_days", *top["n_days"], kind=int),
            _number("seed", *top["seed"], kind=int),
        )
    except ValidationError as exc:
        raise ConfigError(f"{exc.field}: {exc}", top[exc.field][1]) from None
    histograms = tuple(_parse_histogram(entries, line) for _, entries, line in blocks[1:])
    output_dir = Path(top["output_dir"][0]) if "output_dir" in top else Path(".")
    return ExperimentSpec(top["name"][0], config, histograms, output_dir)


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def _samples(result: EnsembleResult, target: str):
    if target == "fixed_points":
        return result.p_a, 0
    ratios, skipped = queue_ratio_series(result, target[-1])
    return ratios, skipped


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _meta_rows(spec: ExperimentSpec, extra):
    cfg = spec.config
    rows = [("name", spec.name)]
    for key, value in cfg.strategy.as_dict().items():
        rows.append((key, "polya" if value is None else (value if isinstance(value, str) else repr(float(value)))))
    rows += [("n_agents", cfg.n_agents), ("n_days", cfg.n_days), ("seed", cfg.seed)]
    return rows + extra


def run_experiment(spec: ExperimentSpec, threads: int = 1) -> list[Path]:
    """Simulate ``spec`` and write its CSV tables; returns the written paths."""
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = run_ensemble(spec.config, threads=threads)
    written = []
    extra = []
    for req in spec.histograms:
        samples, skipped = _samples(result, req.target)
        hist = build_histogram(samples, req.binning)
        path = out / f"{spec.name}.{req.target}.csv"
        rows = [
            (_fmt(lo), _fmt(hi), _fmt(c), _fmt(d))
            for lo, hi, c, d in zip(hist.edges[:-1], hist.edges[1:], hist.counts, hist.density)
        ]
        _write_rows(path, CSV_HEADER, rows)
        written.append(path)
        b = req.binning
        extra += [
            (f"{req.target}.binning", b.kind),
            (f"{req.target}.lo", repr(float(b.lo))),
            (f"{req.target}.hi", repr(float(b.hi))),
            (f"{req.target}.bins", b.n_bins),
            (f"{req.target}.below", hist.n_below),
            (f"{req.target}.above", hist.n_above),
            (f"{req.target}.skipped", skipped),
        ]
        if req.fit_range is not None:
            fit = fit_powerlaw_tail(hist, req.fit_range)
            fit_path = out / f"{spec.name}.{req.target}.fit.csv"
            _write_rows(fit_path, FIT_HEADER, [tuple(_fmt(v) for v in (
                fit.slope, fit.stderr, fit.intercept, fit.n_points, *fit.fit_range))])
            written.append(fit_path)
    meta = out / f"{spec.name}.meta.csv"
    _write_rows(meta, ["key", "value"], _meta_rows(spec, extra))
    written.append(meta)
    return written


def load_histogram(output_dir, name: str, target: str) -> Histogram:
    """Rebuild a written :class:`Histogram` from its CSV table and the meta file."""
    output_dir = Path(output_dir)
    with open(output_dir / f"{name}.meta.csv", newline="") as fh:
        meta = {row["key"]: row["value"] for row in csv.DictReader(fh)}
    cls = Linear if meta[f"{target}.binning"] == "linear" else Logarithmic
    binning = cls(float(meta[f"{target}.lo"]), float(meta[f"{target}.hi"]), int(meta[f"{target}.bins"]))
    with open(output_dir / f"{name}.{target}.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    counts = [int(r["count"]) for r in rows]
    return Histogram.from_counts(binning, counts, int(meta[f"{target}.below"]), int(meta[f"{target}.above"]))


def _load(path: str) -> ExperimentSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse_config(text)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="polya-queue", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="simulate experiment specs and write CSV outputs")
    run.add_argument("specs", nargs="+", metavar="SPEC")
    run.add_argument("--seed", type=int, help="override the seed of every spec")
    run.add_argument("--out", help="override the output directory of every spec")
    run.add_argument("--threads", type=int, default=1, help="worker threads for independent days")
    check = sub.add_parser("validate", help="parse specs without running them")
    check.add_argument("specs", nargs="+", metavar="SPEC")
    args = parser.parse_args(argv)

    try:
        specs = [_load(p) for p in args.specs]
        if args.command == "run":
            specs = [s.with_overrides(seed=args.seed, output_dir=args.out) for s in specs]
    except (ConfigError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    for path, spec in zip(args.specs, specs):
        if args.command == "validate":
            print(f"{path}: ok ({spec.config.strategy.name}, N={spec.config.n_agents}, D={spec.config.n_days})")
            continue
        try:
            written = run_experiment(spec, threads=args.threads)
        except OSError as exc:
            print(f"error: {spec.name}: cannot write output: {exc}", file=sys.stderr)
            return 1
        except Exception as exc:
            print(f"error: {spec.name}: {exc}", file=sys.stderr)
            return 1
        for w in written:
            print(w)
    return 0


if __name__ == "__main__":
    sys.exit(main())
