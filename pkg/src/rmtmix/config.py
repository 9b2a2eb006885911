"""Experiment configuration: INI parsing, validation, canonical hashing.

A config file has sections [experiment], [times], [analysis], [run]; every
key not listed below is rejected so typos fail loudly.  The parsed
dataclass is the single source of truth: its canonical re-serialization is
what gets hashed and snapshotted into artifacts, so two files that parse
to the same experiment share a hash.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError

KIND_GOE = "goe-mix"
KIND_GUE = "gue-mix"
KIND_CROSSOVER = "crossover-mix"
KIND_SPIN_HF = "spin-hf"
KIND_SPIN_OE = "spin-oe"

RMT_KINDS = (KIND_GOE, KIND_GUE, KIND_CROSSOVER)
SPIN_KINDS = (KIND_SPIN_HF, KIND_SPIN_OE)
KINDS = RMT_KINDS + SPIN_KINDS

TIME_UNITS = ("nt", "t")
DENSITY_MODES = ("bulk-normalized", "times-n")
INITIAL_STATES = ("basis", "random-real")
FIT_MODELS = ("auto", "scale-shift", "scale-shift-amplitude", "none")

_SCHEMA = {
    "experiment": {"name", "kind", "size", "realizations", "seed",
                   "initial_state", "alpha", "disorder"},
    "times": {"mode", "units", "values", "start", "stop", "count"},
    "analysis": {"bulk_fraction", "truncation_tolerance", "unfolding_degree",
                 "density_mode", "spacing_bins", "spacing_max", "density_bins",
                 "density_lo", "density_hi", "sigma2_lengths", "fit_model"},
    "run": {"workers", "chunk_realizations", "budget_gflops", "refresh_per_time"},
}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    size: int
    realizations: int
    seed: int = 1
    name: str = ""
    initial_state: str = "basis"
    alpha: float = None
    disorder: float = None
    time_mode: str = "log"
    time_units: str = ""
    time_values: tuple = ()
    time_start: float = None
    time_stop: float = None
    time_count: int = None
    bulk_fraction: float = 0.6
    truncation_tolerance: float = 1e-12
    unfolding_degree: int = 7
    density_mode: str = "bulk-normalized"
    spacing_bins: int = 24
    spacing_max: float = 3.2
    density_bins: int = 40
    density_lo: float = 0.05
    density_hi: float = 4.0
    sigma2_lengths: tuple = (1.0, 2.0, 5.0, 10.0)
    fit_model: str = "auto"
    workers: int = 1
    chunk_realizations: int = 8
    budget_gflops: float = 200000.0
    refresh_per_time: bool = False

    # ---- derived quantities ----

    @property
    def hilbert_dimension(self) -> int:
        """Matrix dimension of one ensemble member."""
        if self.kind in RMT_KINDS:
            return self.size
        if self.kind == KIND_SPIN_OE:
            return self.size
        return math.comb(self.size, self.size // 2)

    @property
    def n_up(self) -> int:
        if self.kind == KIND_SPIN_HF:
            return self.size // 2
        if self.kind == KIND_SPIN_OE:
            return 1
        raise ConfigError(f"{self.kind} has no magnetization sector")

    @property
    def ensemble_size(self) -> int:
        """Members per realization, pinned to the Hilbert dimension."""
        return self.hilbert_dimension

    def grid_values(self) -> np.ndarray:
        """Time grid in the configured units."""
        if self.time_mode == "list":
            return np.asarray(self.time_values, dtype=float)
        if self.time_mode == "log":
            return np.geomspace(self.time_start, self.time_stop, self.time_count)
        return np.linspace(self.time_start, self.time_stop, self.time_count)

    def absolute_times(self) -> np.ndarray:
        """Grid converted to absolute time."""
        values = self.grid_values()
        if self.time_units == "nt":
            return values / self.hilbert_dimension
        return values

    def resolved_fit_model(self) -> str:
        if self.fit_model != "auto":
            return self.fit_model
        return "scale-shift-amplitude" if self.kind == KIND_SPIN_HF else "scale-shift"

    def display_name(self) -> str:
        return self.name or self.kind

    # ---- validation ----

    def validate(self) -> "ExperimentConfig":
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r}; choose from {KINDS}")
        if self.size < 2:
            raise ConfigError(f"size must be >= 2, got {self.size}")
        if self.realizations < 1:
            raise ConfigError(f"realizations must be >= 1, got {self.realizations}")
        if self.initial_state not in INITIAL_STATES:
            raise ConfigError(f"initial_state must be one of {INITIAL_STATES}, got {self.initial_state!r}")
        if self.kind == KIND_CROSSOVER:
            if self.alpha is None:
                raise ConfigError("crossover-mix requires alpha")
            if not 0.0 <= self.alpha:
                raise ConfigError(f"alpha must be >= 0, got {self.alpha}")
        elif self.alpha is not None:
            raise ConfigError(f"alpha only applies to {KIND_CROSSOVER}")
        if self.kind in SPIN_KINDS:
            if self.disorder is None:
                raise ConfigError(f"{self.kind} requires disorder")
            if self.disorder < 0:
                raise ConfigError(f"disorder must be >= 0, got {self.disorder}")
        elif self.disorder is not None:
            raise ConfigError(f"disorder only applies to spin kinds {SPIN_KINDS}")
        if self.time_units not in TIME_UNITS:
            raise ConfigError(f"time units must be one of {TIME_UNITS}, got {self.time_units!r}")
        if self.time_mode not in ("list", "log", "linear"):
            raise ConfigError(f"time mode must be list, log or linear, got {self.time_mode!r}")
        if self.time_mode == "list":
            if not self.time_values:
                raise ConfigError("time mode 'list' requires values")
            values = np.asarray(self.time_values, dtype=float)
        else:
            if self.time_start is None or self.time_stop is None or self.time_count is None:
                raise ConfigError(f"time mode {self.time_mode!r} requires start, stop and count")
            if self.time_count < 1:
                raise ConfigError("time count must be >= 1")
            if self.time_mode == "log" and self.time_start <= 0:
                raise ConfigError("log time grid requires start > 0")
            values = self.grid_values()
        if np.any(values <= 0):
            raise ConfigError("all times must be positive")
        if np.any(np.diff(values) <= 0):
            raise ConfigError("times must be strictly increasing")
        if not 0 < self.bulk_fraction <= 1:
            raise ConfigError(f"bulk_fraction must lie in (0, 1], got {self.bulk_fraction}")
        if not 0 < self.truncation_tolerance < 1:
            raise ConfigError(f"truncation_tolerance must lie in (0, 1), got {self.truncation_tolerance}")
        if self.unfolding_degree < 1:
            raise ConfigError(f"unfolding_degree must be >= 1, got {self.unfolding_degree}")
        if self.density_mode not in DENSITY_MODES:
            raise ConfigError(f"density_mode must be one of {DENSITY_MODES}, got {self.density_mode!r}")
        if self.fit_model not in FIT_MODELS:
            raise ConfigError(f"fit_model must be one of {FIT_MODELS}, got {self.fit_model!r}")
        if self.spacing_bins < 2 or self.density_bins < 2:
            raise ConfigError("histograms need at least 2 bins")
        if self.spacing_max <= 0:
            raise ConfigError(f"spacing_max must be positive, got {self.spacing_max}")
        if not 0 <= self.density_lo < self.density_hi:
            raise ConfigError("density histogram range must satisfy 0 <= lo < hi")
        if any(l <= 0 for l in self.sigma2_lengths):
            raise ConfigError("sigma2_lengths must be positive")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.chunk_realizations < 1:
            raise ConfigError(f"chunk_realizations must be >= 1, got {self.chunk_realizations}")
        if self.budget_gflops <= 0:
            raise ConfigError(f"budget_gflops must be positive, got {self.budget_gflops}")
        if self.kind == KIND_SPIN_HF and self.hilbert_dimension > 20000:
            raise ConfigError(f"half-filling sector of L = {self.size} has dimension "
                              f"{self.hilbert_dimension}; that is not a desk-scale run")
        return self

    # ---- serialization ----

    def to_ini(self) -> str:
        """Canonical INI rendering (the form that is hashed and snapshotted)."""
        out = io.StringIO()
        out.write("[experiment]\n")
        if self.name:
            out.write(f"name = {self.name}\n")
        out.write(f"kind = {self.kind}\n")
        out.write(f"size = {self.size}\n")
        out.write(f"realizations = {self.realizations}\n")
        out.write(f"seed = {self.seed}\n")
        out.write(f"initial_state = {self.initial_state}\n")
        if self.alpha is not None:
            out.write(f"alpha = {_fmt(self.alpha)}\n")
        if self.disorder is not None:
            out.write(f"disorder = {_fmt(self.disorder)}\n")
        out.write("\n[times]\n")
        out.write(f"mode = {self.time_mode}\n")
        out.write(f"units = {self.time_units}\n")
        if self.time_mode == "list":
            out.write(f"values = {' '.join(_fmt(v) for v in self.time_values)}\n")
        else:
            out.write(f"start = {_fmt(self.time_start)}\n")
            out.write(f"stop = {_fmt(self.time_stop)}\n")
            out.write(f"count = {self.time_count}\n")
        out.write("\n[analysis]\n")
        out.write(f"bulk_fraction = {_fmt(self.bulk_fraction)}\n")
        out.write(f"truncation_tolerance = {_fmt(self.truncation_tolerance)}\n")
        out.write(f"unfolding_degree = {self.unfolding_degree}\n")
        out.write(f"density_mode = {self.density_mode}\n")
        out.write(f"spacing_bins = {self.spacing_bins}\n")
        out.write(f"spacing_max = {_fmt(self.spacing_max)}\n")
        out.write(f"density_bins = {self.density_bins}\n")
        out.write(f"density_lo = {_fmt(self.density_lo)}\n")
        out.write(f"density_hi = {_fmt(self.density_hi)}\n")
        out.write(f"sigma2_lengths = {' '.join(_fmt(v) for v in self.sigma2_lengths)}\n")
        out.write(f"fit_model = {self.fit_model}\n")
        out.write("\n[run]\n")
        out.write(f"workers = {self.workers}\n")
        out.write(f"chunk_realizations = {self.chunk_realizations}\n")
        out.write(f"budget_gflops = {_fmt(self.budget_gflops)}\n")
        out.write(f"refresh_per_time = {'true' if self.refresh_per_time else 'false'}\n")
        return out.getvalue()

    def hash(self) -> str:
        """Hash of the canonical form, minus scheduling knobs that cannot change results."""
        lines = []
        skip = ("workers = ", "chunk_realizations = ", "budget_gflops = ")
        for line in self.to_ini().splitlines():
            if line.startswith(skip):
                continue
            lines.append(line)
        return hashlib.sha1("\n".join(lines).encode()).hexdigest()

    def with_updates(self, **kwargs) -> "ExperimentConfig":
        return replace(self, **kwargs)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _default_units(kind: str) -> str:
    return "nt" if kind in RMT_KINDS else "t"


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate an INI config given as text."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"INI syntax error: {exc}") from exc
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]; expected {sorted(_SCHEMA)}")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]; "
                                  f"expected one of {sorted(_SCHEMA[section])}")
    if "experiment" not in parser:
        raise ConfigError("missing [experiment] section")
    exp = parser["experiment"]
    times = parser["times"] if "times" in parser else {}
    analysis = parser["analysis"] if "analysis" in parser else {}
    run = parser["run"] if "run" in parser else {}

    def need(section, mapping, key, conv, what):
        raw = mapping.get(key)
        if raw is None:
            raise ConfigError(f"missing {key!r} in [{section}]")
        try:
            return conv(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r} is not a valid {what}") from exc

    def opt(section, mapping, key, conv, what, default=None):
        raw = mapping.get(key)
        if raw is None:
            return default
        try:
            return conv(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r} is not a valid {what}") from exc

    def boolean(raw: str) -> bool:
        low = raw.strip().lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ValueError(raw)

    def float_list(raw: str) -> tuple:
        parts = raw.replace(",", " ").split()
        if not parts:
            raise ValueError(raw)
        return tuple(float(p) for p in parts)

    kind = need("experiment", exp, "kind", str, "kind")
    defaults = ExperimentConfig(kind=KIND_GOE, size=2, realizations=1)
    cfg = ExperimentConfig(
        kind=kind,
        size=need("experiment", exp, "size", int, "integer"),
        realizations=need("experiment", exp, "realizations", int, "integer"),
        seed=opt("experiment", exp, "seed", int, "integer", defaults.seed),
        name=opt("experiment", exp, "name", str, "string", ""),
        initial_state=opt("experiment", exp, "initial_state", str, "string", defaults.initial_state),
        alpha=opt("experiment", exp, "alpha", float, "number"),
        disorder=opt("experiment", exp, "disorder", float, "number"),
        time_mode=opt("times", times, "mode", str, "string", "log"),
        time_units=opt("times", times, "units", str, "string", _default_units(kind)),
        time_values=opt("times", times, "values", float_list, "number list", ()),
        time_start=opt("times", times, "start", float, "number"),
        time_stop=opt("times", times, "stop", float, "number"),
        time_count=opt("times", times, "count", int, "integer"),
        bulk_fraction=opt("analysis", analysis, "bulk_fraction", float, "number", defaults.bulk_fraction),
        truncation_tolerance=opt("analysis", analysis, "truncation_tolerance", float, "number",
                                 defaults.truncation_tolerance),
        unfolding_degree=opt("analysis", analysis, "unfolding_degree", int, "integer",
                             defaults.unfolding_degree),
        density_mode=opt("analysis", analysis, "density_mode", str, "string", defaults.density_mode),
        spacing_bins=opt("analysis", analysis, "spacing_bins", int, "integer", defaults.spacing_bins),
        spacing_max=opt("analysis", analysis, "spacing_max", float, "number", defaults.spacing_max),
        density_bins=opt("analysis", analysis, "density_bins", int, "integer", defaults.density_bins),
        density_lo=opt("analysis", analysis, "density_lo", float, "number", defaults.density_lo),
        density_hi=opt("analysis", analysis, "density_hi", float, "number", defaults.density_hi),
        sigma2_lengths=opt("analysis", analysis, "sigma2_lengths", float_list, "number list",
                           defaults.sigma2_lengths),
        fit_model=opt("analysis", analysis, "fit_model", str, "string", defaults.fit_model),
        workers=opt("run", run, "workers", int, "integer", defaults.workers),
        chunk_realizations=opt("run", run, "chunk_realizations", int, "integer",
                               defaults.chunk_realizations),
        budget_gflops=opt("run", run, "budget_gflops", float, "number", defaults.budget_gflops),
        refresh_per_time=opt("run", run, "refresh_per_time", boolean, "boolean",
                             defaults.refresh_per_time),
    )
    return cfg.validate()


def load_config(path) -> ExperimentConfig:
    """Parse and validate an INI config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config(text)
