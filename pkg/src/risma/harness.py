"""
Configuration files, single runs, and Monte-Carlo sweeps.

Config files are YAML (JSON is accepted too) mappings whose keys are the
:class:`~risma.model.SystemConfig` field names.  Only the four dimension keys
are required; everything else has a default.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import logging
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .model import ConfigError, SystemConfig, sample_scenario
from .solver import SolverError, solve

log = logging.getLogger(__name__)

REQUIRED_KEYS = ("n_antennas", "n_users", "n_ris", "n_paths")
SWEEP_PARAMS = ("pmax_dbm", "region_lambda", "iterations")

_FIELDS = {f.name: f for f in dataclasses.fields(SystemConfig) if f.init}
_DEFAULTS = SystemConfig().to_dict()


def fmt(x) -> str:
    return f"{x:.12g}"


def _coerce(key, value):
    default = _DEFAULTS[key]
    if isinstance(value, bool):
        raise ConfigError(f"{key}: expected {type(default).__name__}, got a boolean")
    if isinstance(default, int):
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(f"{key}: expected a finite number, got {value!r}")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{key}: expected a string, got {value!r}")
    return value.lower()


def config_from_dict(data: dict) -> SystemConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a key-value mapping")
    unknown = sorted(set(data) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"unknown config key: {unknown[0]}")
    missing = [k for k in REQUIRED_KEYS if k not in data]
    if missing:
        raise ConfigError(f"missing required config key: {missing[0]}")
    values = {k: _coerce(k, v) for k, v in data.items()}
    try:
        return SystemConfig(**values)
    except ConfigError as exc:
        raise ConfigError(f"invalid value: {exc}") from None


def parse_config(path) -> SystemConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not a valid YAML/JSON document ({exc})") from None
    return config_from_dict(data or {})


def dump_config(config: SystemConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=False)


def trace_csv(trace, timing=False) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["iter", "sum_rate_bps_hz", "cum_ms"])
    for rec in trace.records:
        writer.writerow([rec.r, fmt(rec.sum_rate), fmt(rec.wall_ms) if timing else ""])
    return buf.getvalue()


def run_once(config: SystemConfig, seed=None, out=None, timing=False):
    """Solve one seeded scenario and return ``(state, trace, csv_text)``.

    Wall-clock time goes into ``cum_ms`` only with ``timing=True``; otherwise
    the column is left empty so repeated runs give byte-identical files.
    """
    seed = config.seed if seed is None else seed
    scenario = sample_scenario(config, seed)
    state, trace = solve(scenario, config)
    text = trace_csv(trace, timing=timing)
    if out is not None:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return state, trace, text


_VARIANT = re.compile(r"^(ma|fpa)-(irc|cps|dps|fixed)(\d+)?$")


def parse_variant(name: str) -> dict:
    """``"ma-cps"``, ``"fpa-dps16"`` -> config overrides."""
    m = _VARIANT.match(name.strip().lower())
    if not m:
        raise ConfigError(f"invalid variant {name!r}; expected <ma|fpa>-<irc|cps|dps|fixed>[levels]")
    antenna, mode, levels = m.groups()
    if levels and mode != "dps":
        raise ConfigError(f"invalid variant {name!r}: levels only apply to dps")
    out = {"antenna_mode": antenna, "ris_mode": mode}
    if levels:
        out["dps_levels"] = int(levels)
    return out


def trial_seed(master_seed: int, trial: int) -> int:
    """Scenario seed of one trial.

    It ignores the variant and the swept value, so every variant and value
    is evaluated on the same channel draws (paired comparisons).
    """
    return int(np.random.SeedSequence([master_seed, trial]).generate_state(1)[0])


@dataclass(frozen=True)
class SweepSpec:
    param: str
    values: tuple
    trials: int
    variants: tuple
    base: SystemConfig = field(default_factory=SystemConfig)
    master_seed: int = 0

    def __post_init__(self):
        if self.param not in SWEEP_PARAMS:
            raise ConfigError(f"unknown sweep parameter {self.param!r}; choose from {SWEEP_PARAMS}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.values:
            raise ConfigError("sweep values must be nonempty")
        if not self.variants:
            raise ConfigError("at least one variant is required")
        for v in self.variants:
            self.config_for(v, self.values[0])

    def config_for(self, variant: str, value) -> SystemConfig:
        changes = parse_variant(variant)
        if self.param == "iterations":
            if int(value) != value or value < 1:
                raise ConfigError(f"iterations must be a positive integer, got {value!r}")
            changes.update(r_max=int(value), tol=0.0)
        else:
            changes[self.param] = float(value)
        try:
            return self.base.replace(**changes)
        except ConfigError as exc:
            raise ConfigError(f"variant {variant} at {self.param}={value}: {exc}") from None


@dataclass
class SweepResult:
    spec: SweepSpec
    rates: dict  # (variant, value) -> (trials,) array, NaN for failed solves

    def summary(self, variant, value):
        x = self.rates[(variant, value)]
        ok = x[np.isfinite(x)]
        n = ok.size
        mean = float(ok.mean()) if n else math.nan
        se = float(ok.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return mean, se, n

    @property
    def failures(self) -> int:
        return int(sum(np.count_nonzero(~np.isfinite(x)) for x in self.rates.values()))

    def rows(self):
        for variant in self.spec.variants:
            for value in self.spec.values:
                mean, se, n = self.summary(variant, value)
                yield variant, self.spec.param, value, mean, se, n

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["variant", "param", "value", "mean_rate", "stderr", "trials"])
        for variant, param, value, mean, se, n in self.rows():
            writer.writerow([variant, param, fmt(value), fmt(mean), fmt(se), n])
        return buf.getvalue()


def _solve_trial(task):
    config, seed = task
    try:
        _, trace = solve(sample_scenario(config, seed), config)
    except SolverError as exc:
        log.warning("solve failed (seed %d): %s", seed, exc)
        return math.nan
    return trace.final_rate


def run_sweep(spec: SweepSpec, out=None, workers: int = 1) -> SweepResult:
    keys, tasks = [], []
    for variant in spec.variants:
        for value in spec.values:
            config = spec.config_for(variant, value)
            for t in range(spec.trials):
                keys.append((variant, value, t))
                tasks.append((config, trial_seed(spec.master_seed, t)))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_solve_trial, tasks, chunksize=4))
    else:
        results = [_solve_trial(task) for task in tasks]

    rates = {(v, x): np.full(spec.trials, math.nan) for v in spec.variants for x in spec.values}
    for (variant, value, t), r in zip(keys, results):
        rates[(variant, value)][t] = r
    result = SweepResult(spec=spec, rates=rates)
    if result.failures:
        log.warning("%d of %d solves failed and were excluded", result.failures, len(tasks))
    if out is not None:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(result.to_csv())
    return result
