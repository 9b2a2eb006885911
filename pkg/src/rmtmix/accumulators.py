"""Mergeable statistics partials.

Workers reduce each realization into these accumulators; the runner merges
partials in realization order, so pooled results are independent of how
realizations were grouped into chunks or processes.  Everything serializes
to plain JSON for checkpoints.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class MeanAccumulator:
    """Streaming mean / standard error over pooled scalar samples."""

    count: int = 0
    total: float = 0.0
    total_sq: float = 0.0
    excluded: int = 0

    def add(self, values, excluded: int = 0) -> None:
        values = np.asarray(values, dtype=float)
        self.count += values.size
        self.total += float(values.sum())
        self.total_sq += float(np.square(values).sum())
        self.excluded += excluded

    def merge(self, other: "MeanAccumulator") -> None:
        self.count += other.count
        self.total += other.total
        self.total_sq += other.total_sq
        self.excluded += other.excluded

    @property
    def mean(self) -> float:
        return self.total / self.count if self.count else float("nan")

    @property
    def variance(self) -> float:
        if self.count < 2:
            return float("nan")
        m = self.mean
        return max(self.total_sq / self.count - m * m, 0.0) * self.count / (self.count - 1)

    @property
    def stderr(self) -> float:
        if self.count < 2:
            return float("nan")
        return float(np.sqrt(self.variance / self.count))

    def to_json(self) -> dict:
        return {"count": self.count, "total": self.total,
                "total_sq": self.total_sq, "excluded": self.excluded}

    @classmethod
    def from_json(cls, data: dict) -> "MeanAccumulator":
        return cls(**data)


@dataclass
class HistogramAccumulator:
    """Fixed-edge counting histogram with out-of-range tallies."""

    edges: np.ndarray
    counts: np.ndarray = None
    below: int = 0
    above: int = 0

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=float)
        if self.edges.size < 2 or np.any(np.diff(self.edges) <= 0):
            raise ValueError("edges must be strictly increasing with at least 2 entries")
        if self.counts is None:
            self.counts = np.zeros(self.edges.size - 1, dtype=np.int64)
        else:
            self.counts = np.asarray(self.counts, dtype=np.int64)

    def add(self, values) -> None:
        values = np.asarray(values, dtype=float)
        self.below += int((values < self.edges[0]).sum())
        # keep every bin half-open: the top edge belongs to the overflow,
        # not to the last bin as np.histogram alone would have it
        above = values >= self.edges[-1]
        self.above += int(above.sum())
        hist, _ = np.histogram(values[~above], bins=self.edges)
        self.counts += hist

    def merge(self, other: "HistogramAccumulator") -> None:
        if not np.array_equal(self.edges, other.edges):
            raise ValueError("cannot merge histograms with different edges")
        self.counts += other.counts
        self.below += other.below
        self.above += other.above

    @property
    def total_in_range(self) -> int:
        return int(self.counts.sum())

    @property
    def total(self) -> int:
        return self.total_in_range + self.below + self.above

    def density(self) -> np.ndarray:
        """Histogram normalized so the in-range area integrates to 1."""
        total = self.total_in_range
        widths = np.diff(self.edges)
        if total == 0:
            return np.zeros_like(widths)
        return self.counts / (total * widths)

    def to_json(self) -> dict:
        return {"edges": self.edges.tolist(), "counts": self.counts.tolist(),
                "below": self.below, "above": self.above}

    @classmethod
    def from_json(cls, data: dict) -> "HistogramAccumulator":
        return cls(edges=np.array(data["edges"]), counts=np.array(data["counts"]),
                   below=data["below"], above=data["above"])


@dataclass
class NumberVarianceAccumulator:
    """Pooled window-count moments per window length."""

    lengths: tuple
    windows: np.ndarray = None
    sum_n: np.ndarray = None
    sum_n_sq: np.ndarray = None

    def __post_init__(self):
        self.lengths = tuple(float(l) for l in self.lengths)
        k = len(self.lengths)
        self.windows = np.zeros(k, dtype=np.int64) if self.windows is None else np.asarray(self.windows, dtype=np.int64)
        self.sum_n = np.zeros(k) if self.sum_n is None else np.asarray(self.sum_n, dtype=float)
        self.sum_n_sq = np.zeros(k) if self.sum_n_sq is None else np.asarray(self.sum_n_sq, dtype=float)

    def add_moments(self, rows) -> None:
        """Consume rows (ell, n_windows, sum_n, sum_n_sq) from one spectrum."""
        for i, (ell, nw, s1, s2) in enumerate(rows):
            if ell != self.lengths[i]:
                raise ValueError(f"row {i} has length {ell}, accumulator expects {self.lengths[i]}")
            self.windows[i] += nw
            self.sum_n[i] += s1
            self.sum_n_sq[i] += s2

    def merge(self, other: "NumberVarianceAccumulator") -> None:
        if self.lengths != other.lengths:
            raise ValueError("cannot merge accumulators with different window lengths")
        self.windows += other.windows
        self.sum_n += other.sum_n
        self.sum_n_sq += other.sum_n_sq

    def sigma2(self) -> np.ndarray:
        """Pooled variance of window counts per length (nan where no windows)."""
        out = np.full(len(self.lengths), np.nan)
        ok = self.windows > 0
        mean = np.divide(self.sum_n, self.windows, out=np.zeros_like(self.sum_n), where=ok)
        second = np.divide(self.sum_n_sq, self.windows, out=np.zeros_like(self.sum_n), where=ok)
        out[ok] = (second - mean * mean)[ok]
        return out

    def to_json(self) -> dict:
        return {"lengths": list(self.lengths), "windows": self.windows.tolist(),
                "sum_n": self.sum_n.tolist(), "sum_n_sq": self.sum_n_sq.tolist()}

    @classmethod
    def from_json(cls, data: dict) -> "NumberVarianceAccumulator":
        return cls(lengths=tuple(data["lengths"]), windows=np.array(data["windows"]),
                   sum_n=np.array(data["sum_n"]), sum_n_sq=np.array(data["sum_n_sq"]))


@dataclass
class TimePartial:
    """All pooled statistics of one grid time."""

    r_tilde: MeanAccumulator
    spacing_hist: HistogramAccumulator
    density_hist: HistogramAccumulator
    sqrt_density_hist: HistogramAccumulator
    sigma2: NumberVarianceAccumulator
    purity: MeanAccumulator
    kept: MeanAccumulator
    spacing_mean: MeanAccumulator
    separated: int = 0
    undersized: int = 0
    realizations: int = 0
    kept_min: int = field(default=2 ** 62)
    kept_max: int = 0

    def merge(self, other: "TimePartial") -> None:
        self.r_tilde.merge(other.r_tilde)
        self.spacing_hist.merge(other.spacing_hist)
        self.density_hist.merge(other.density_hist)
        self.sqrt_density_hist.merge(other.sqrt_density_hist)
        self.sigma2.merge(other.sigma2)
        self.purity.merge(other.purity)
        self.kept.merge(other.kept)
        self.spacing_mean.merge(other.spacing_mean)
        self.separated += other.separated
        self.undersized += other.undersized
        self.realizations += other.realizations
        self.kept_min = min(self.kept_min, other.kept_min)
        self.kept_max = max(self.kept_max, other.kept_max)

    def to_json(self) -> dict:
        return {
            "r_tilde": self.r_tilde.to_json(),
            "spacing_hist": self.spacing_hist.to_json(),
            "density_hist": self.density_hist.to_json(),
            "sqrt_density_hist": self.sqrt_density_hist.to_json(),
            "sigma2": self.sigma2.to_json(),
            "purity": self.purity.to_json(),
            "kept": self.kept.to_json(),
            "spacing_mean": self.spacing_mean.to_json(),
            "separated": self.separated,
            "undersized": self.undersized,
            "realizations": self.realizations,
            "kept_min": self.kept_min,
            "kept_max": self.kept_max,
        }

    @classmethod
    def from_json(cls, data: dict) -> "TimePartial":
        return cls(
            r_tilde=MeanAccumulator.from_json(data["r_tilde"]),
            spacing_hist=HistogramAccumulator.from_json(data["spacing_hist"]),
            density_hist=HistogramAccumulator.from_json(data["density_hist"]),
            sqrt_density_hist=HistogramAccumulator.from_json(data["sqrt_density_hist"]),
            sigma2=NumberVarianceAccumulator.from_json(data["sigma2"]),
            purity=MeanAccumulator.from_json(data["purity"]),
            kept=MeanAccumulator.from_json(data["kept"]),
            spacing_mean=MeanAccumulator.from_json(data["spacing_mean"]),
            separated=data["separated"],
            undersized=data.get("undersized", 0),
            realizations=data["realizations"],
            kept_min=data["kept_min"],
            kept_max=data["kept_max"],
        )
