"""Run artifacts: on-disk layout, readers, and plot-data emission.

A completed run directory contains

    config.snapshot        canonical INI of the experiment
    state.json             chunk checkpoints (kept for resume / audit)
    stats/time_NN.tsv      per-time statistics, one sectioned TSV each
    fits.tsv               crossover-curve fit parameters
    summary.txt            one-glance run report

Everything needed to redraw the figures is in the TSVs; ``emit_plot_data``
only rearranges them and attaches model reference curves.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass

import numpy as np

from . import spectra
from .config import ExperimentConfig, parse_config
from .errors import ConfigError

STATS_DIR = "stats"
SUMMARY_FILE = "summary.txt"
FITS_FILE = "fits.tsv"
SNAPSHOT_FILE = "config.snapshot"
STATE_FILE = "state.json"

FIGURES = ("ratio-curve", "density-histogram", "spacing-histogram", "number-variance")


@dataclass(frozen=True)
class TimeStatistics:
    """Pooled statistics of one grid time, as stored in its TSV."""

    index: int
    x: float
    time: float
    r_tilde_mean: float
    r_tilde_stderr: float
    r_tilde_count: int
    r_tilde_excluded: int
    purity_mean: float
    kept_mean: float
    kept_min: int
    kept_max: int
    separated: int
    undersized: int
    realizations: int
    spacing_mean: float
    spacing_edges: np.ndarray
    spacing_counts: np.ndarray
    spacing_below: int
    spacing_above: int
    density_edges: np.ndarray
    density_counts: np.ndarray
    density_below: int
    density_above: int
    sqrt_density_edges: np.ndarray
    sqrt_density_counts: np.ndarray
    sqrt_density_below: int
    sqrt_density_above: int
    sigma2_lengths: np.ndarray
    sigma2: np.ndarray
    sigma2_windows: np.ndarray


@dataclass(frozen=True)
class FitRecord:
    """One crossover-curve fit as stored in fits.tsv."""

    model: str
    x_units: str
    params: dict
    stderr: dict
    rss: float
    n_points: int
    iterations: int
    converged: bool
    range_lo: float
    range_hi: float
    error: str = ""


@dataclass(frozen=True)
class RunArtifact:
    """Parsed view of a completed run directory."""

    path: str
    config: ExperimentConfig
    times: tuple
    fits: tuple

    def time_stats(self, index: int) -> TimeStatistics:
        return self.times[index]


def time_stats_filename(index: int) -> str:
    return f"time_{index:02d}.tsv"


def write_time_stats(path: str, ts: TimeStatistics) -> None:
    out = io.StringIO()
    out.write("# rmtmix time statistics v1\n")
    out.write(f"# index={ts.index} x={ts.x:.17g} time={ts.time:.17g} realizations={ts.realizations}\n")
    out.write("# section scalars\n")
    out.write("key\tvalue\n")
    for key in ("r_tilde_mean", "r_tilde_stderr", "r_tilde_count", "r_tilde_excluded",
                "purity_mean", "kept_mean", "kept_min", "kept_max", "separated",
                "undersized", "spacing_mean"):
        out.write(f"{key}\t{getattr(ts, key):.17g}\n")
    out.write("# section spacing_histogram\n")
    out.write("left\tright\tcount\tdensity\n")
    _write_hist(out, ts.spacing_edges, ts.spacing_counts)
    out.write(f"# spacing_below={ts.spacing_below} spacing_above={ts.spacing_above}\n")
    out.write("# section density_histogram\n")
    out.write("left\tright\tcount\tdensity\n")
    _write_hist(out, ts.density_edges, ts.density_counts)
    out.write(f"# density_below={ts.density_below} density_above={ts.density_above}\n")
    out.write("# section sqrt_density_histogram\n")
    out.write("left\tright\tcount\tdensity\n")
    _write_hist(out, ts.sqrt_density_edges, ts.sqrt_density_counts)
    out.write(f"# sqrt_density_below={ts.sqrt_density_below} sqrt_density_above={ts.sqrt_density_above}\n")
    out.write("# section number_variance\n")
    out.write("ell\tsigma2\twindows\n")
    for ell, s2, nw in zip(ts.sigma2_lengths, ts.sigma2, ts.sigma2_windows):
        out.write(f"{ell:.17g}\t{s2:.17g}\t{int(nw)}\n")
    _atomic_write(path, out.getvalue())


def _write_hist(out, edges, counts) -> None:
    total = counts.sum()
    widths = np.diff(edges)
    for left, right, count, width in zip(edges[:-1], edges[1:], counts, widths):
        dens = count / (total * width) if total else 0.0
        out.write(f"{left:.17g}\t{right:.17g}\t{int(count)}\t{dens:.17g}\n")


def read_time_stats(path: str) -> TimeStatistics:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("# rmtmix time statistics"):
        raise ConfigError(f"{path} is not a time-statistics file")
    header = dict(p.split("=") for p in lines[1][2:].split())
    section = None
    scalars = {}
    hists = {"spacing_histogram": [], "density_histogram": [], "sqrt_density_histogram": []}
    overflow = {}
    nv = []
    for line in lines[2:]:
        if line.startswith("# section "):
            section = line[len("# section "):].strip()
            continue
        if line.startswith("#"):
            for part in line[1:].split():
                if "=" in part:
                    k, v = part.split("=")
                    overflow[k] = int(v)
            continue
        if not line or "\t" not in line:
            continue
        cells = line.split("\t")
        if cells[0] in ("key", "left", "ell"):
            continue
        if section == "scalars":
            scalars[cells[0]] = float(cells[1])
        elif section in hists:
            hists[section].append((float(cells[0]), float(cells[1]), int(cells[2])))
        elif section == "number_variance":
            nv.append((float(cells[0]), float(cells[1]), int(cells[2])))

    def hist_arrays(rows):
        if not rows:
            return np.array([0.0, 1.0]), np.array([0], dtype=np.int64)
        edges = np.array([r[0] for r in rows] + [rows[-1][1]])
        counts = np.array([r[2] for r in rows], dtype=np.int64)
        return edges, counts

    sp_edges, sp_counts = hist_arrays(hists["spacing_histogram"])
    de_edges, de_counts = hist_arrays(hists["density_histogram"])
    sq_edges, sq_counts = hist_arrays(hists["sqrt_density_histogram"])
    return TimeStatistics(
        index=int(header["index"]),
        x=float(header["x"]),
        time=float(header["time"]),
        realizations=int(header["realizations"]),
        r_tilde_mean=scalars["r_tilde_mean"],
        r_tilde_stderr=scalars["r_tilde_stderr"],
        r_tilde_count=int(scalars["r_tilde_count"]),
        r_tilde_excluded=int(scalars["r_tilde_excluded"]),
        purity_mean=scalars["purity_mean"],
        kept_mean=scalars["kept_mean"],
        kept_min=int(scalars["kept_min"]),
        kept_max=int(scalars["kept_max"]),
        separated=int(scalars["separated"]),
        undersized=int(scalars.get("undersized", 0)),
        spacing_mean=scalars["spacing_mean"],
        spacing_edges=sp_edges,
        spacing_counts=sp_counts,
        spacing_below=overflow.get("spacing_below", 0),
        spacing_above=overflow.get("spacing_above", 0),
        density_edges=de_edges,
        density_counts=de_counts,
        density_below=overflow.get("density_below", 0),
        density_above=overflow.get("density_above", 0),
        sqrt_density_edges=sq_edges,
        sqrt_density_counts=sq_counts,
        sqrt_density_below=overflow.get("sqrt_density_below", 0),
        sqrt_density_above=overflow.get("sqrt_density_above", 0),
        sigma2_lengths=np.array([r[0] for r in nv]),
        sigma2=np.array([r[1] for r in nv]),
        sigma2_windows=np.array([r[2] for r in nv], dtype=np.int64),
    )


def write_fits(path: str, records) -> None:
    out = io.StringIO()
    out.write("model\tx_units\tconverged\titerations\tn_points\trss\trange_lo\trange_hi\t"
              "a\ta_err\tb\tb_err\tc\tc_err\terror\n")
    for rec in records:
        p, e = rec.params, rec.stderr
        cells = [
            rec.model, rec.x_units, str(rec.converged).lower(), str(rec.iterations),
            str(rec.n_points), f"{rec.rss:.17g}", f"{rec.range_lo:.17g}", f"{rec.range_hi:.17g}",
        ]
        for name in ("a", "b", "c"):
            cells.append(f"{p[name]:.17g}" if name in p else "nan")
            cells.append(f"{e[name]:.17g}" if name in e else "nan")
        cells.append(rec.error or "-")
        out.write("\t".join(cells) + "\n")
    _atomic_write(path, out.getvalue())


def read_fits(path: str):
    if not os.path.exists(path):
        return ()
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    records = []
    for line in lines[1:]:
        if not line.strip():
            continue
        cells = line.split("\t")
        params, stderr = {}, {}
        for i, name in enumerate(("a", "b", "c")):
            val, err = cells[8 + 2 * i], cells[9 + 2 * i]
            if val != "nan":
                params[name] = float(val)
                stderr[name] = float(err)
        records.append(FitRecord(
            model=cells[0], x_units=cells[1], converged=cells[2] == "true",
            iterations=int(cells[3]), n_points=int(cells[4]), rss=float(cells[5]),
            range_lo=float(cells[6]), range_hi=float(cells[7]),
            params=params, stderr=stderr,
            error="" if cells[14] == "-" else cells[14],
        ))
    return tuple(records)


def read_artifact(path: str) -> RunArtifact:
    """Parse a completed run directory back into memory."""
    snap = os.path.join(path, SNAPSHOT_FILE)
    if not os.path.exists(snap):
        raise ConfigError(f"{path} has no {SNAPSHOT_FILE}; not a run artifact")
    with open(snap, "r", encoding="utf-8") as fh:
        config = parse_config(fh.read())
    stats_dir = os.path.join(path, STATS_DIR)
    times = []
    for k in range(len(config.grid_values())):
        f = os.path.join(stats_dir, time_stats_filename(k))
        if not os.path.exists(f):
            raise ConfigError(f"artifact is incomplete: missing {f}")
        times.append(read_time_stats(f))
    fits = read_fits(os.path.join(path, FITS_FILE))
    return RunArtifact(path=path, config=config, times=tuple(times), fits=fits)


def write_summary(path: str, config: ExperimentConfig, times, fits, runtime_seconds: float) -> None:
    out = io.StringIO()
    out.write(f"run: {config.display_name()}\n")
    out.write(f"kind: {config.kind}\n")
    out.write(f"config_hash: {config.hash()}\n")
    out.write(f"size: {config.size}\n")
    out.write(f"hilbert_dimension: {config.hilbert_dimension}\n")
    out.write(f"ensemble_size: {config.ensemble_size}\n")
    out.write(f"realizations: {config.realizations}\n")
    out.write(f"seed: {config.seed}\n")
    out.write(f"runtime_seconds: {runtime_seconds:.1f}\n")
    out.write(f"time_units: {config.time_units}\n\n")
    out.write("idx\tx\ttime\tr_tilde\tstderr\tsamples\tkept_mean\tpurity\tseparated\t"
              "undersized\tspacing_mean\n")
    for ts in times:
        out.write(f"{ts.index}\t{ts.x:.6g}\t{ts.time:.6g}\t{ts.r_tilde_mean:.5f}\t"
                  f"{ts.r_tilde_stderr:.2g}\t{ts.r_tilde_count}\t{ts.kept_mean:.1f}\t"
                  f"{ts.purity_mean:.4f}\t{ts.separated}/{ts.realizations}\t"
                  f"{ts.undersized}\t{ts.spacing_mean:.4f}\n")
    if fits:
        out.write("\nfits:\n")
        for rec in fits:
            if rec.error:
                out.write(f"  {rec.model}: failed ({rec.error})\n")
                continue
            pieces = [f"{k} = {rec.params[k]:.5g} +- {rec.stderr[k]:.2g}" for k in rec.params]
            out.write(f"  {rec.model} on x in [{rec.range_lo:.4g}, {rec.range_hi:.4g}]: "
                      + ", ".join(pieces)
                      + f" (rss = {rec.rss:.3g}, {rec.n_points} points, "
                      + ("converged" if rec.converged else "not converged") + ")\n")
    _atomic_write(path, out.getvalue())


def emit_plot_data(artifact: RunArtifact, figure: str, out_dir: str = None):
    """Write plain TSVs with data plus reference curves for one figure kind.

    Returns the list of written file paths.
    """
    if figure not in FIGURES:
        raise ValueError(f"unknown figure {figure!r}; choose from {FIGURES}")
    out_dir = out_dir or os.path.join(artifact.path, "plots")
    os.makedirs(out_dir, exist_ok=True)
    written = []

    if figure == "ratio-curve":
        f = os.path.join(out_dir, "ratio_curve.tsv")
        out = io.StringIO()
        out.write(f"# mean gap ratio vs x ({artifact.config.time_units} units)\n")
        out.write(f"# reference: goe={spectra.R_TILDE_GOE} gue={spectra.R_TILDE_GUE} "
                  f"poisson={spectra.R_TILDE_POISSON:.6f}\n")
        fit = next((r for r in artifact.fits if not r.error), None)
        out.write("x\tr_tilde\tstderr\tfit\n")
        for ts in artifact.times:
            fit_val = "nan"
            if fit is not None:
                tau = np.clip(fit.params["a"] * ts.x, 0.0, None)
                val = spectra.crossover_r_tilde(tau) * fit.params.get("c", 1.0) + fit.params["b"]
                fit_val = f"{val:.6f}"
            out.write(f"{ts.x:.10g}\t{ts.r_tilde_mean:.6f}\t{ts.r_tilde_stderr:.3g}\t{fit_val}\n")
        _atomic_write(f, out.getvalue())
        written.append(f)

    elif figure == "density-histogram":
        for ts in artifact.times:
            f = os.path.join(out_dir, f"density_{ts.index:02d}.tsv")
            out = io.StringIO()
            mode = artifact.config.density_mode
            out.write(f"# eigenvalue density at x = {ts.x:g} (mode = {mode})\n")
            out.write("center\tdensity\tmp_reference\n")
            total = ts.density_counts.sum()
            widths = np.diff(ts.density_edges)
            centers = 0.5 * (ts.density_edges[:-1] + ts.density_edges[1:])
            dens = ts.density_counts / (total * widths) if total else np.zeros_like(widths)
            mp = spectra.marchenko_pastur_density(centers)
            for c, d, m in zip(centers, dens, mp):
                out.write(f"{c:.10g}\t{d:.6g}\t{m:.6g}\n")
            out.write("# section sqrt variable vs quarter circle\n")
            out.write("y_center\ty_density\tqc_reference\n")
            total = ts.sqrt_density_counts.sum()
            widths = np.diff(ts.sqrt_density_edges)
            centers = 0.5 * (ts.sqrt_density_edges[:-1] + ts.sqrt_density_edges[1:])
            dens = ts.sqrt_density_counts / (total * widths) if total else np.zeros_like(widths)
            qc = spectra.quarter_circle_density(centers)
            for c, d, q in zip(centers, dens, qc):
                out.write(f"{c:.10g}\t{d:.6g}\t{q:.6g}\n")
            _atomic_write(f, out.getvalue())
            written.append(f)

    elif figure == "spacing-histogram":
        for ts in artifact.times:
            f = os.path.join(out_dir, f"spacing_{ts.index:02d}.tsv")
            out = io.StringIO()
            out.write(f"# unfolded spacing density at x = {ts.x:g}\n")
            out.write("center\tdensity\tgoe_surmise\tgue_surmise\tpoisson\n")
            total = ts.spacing_counts.sum()
            widths = np.diff(ts.spacing_edges)
            centers = 0.5 * (ts.spacing_edges[:-1] + ts.spacing_edges[1:])
            dens = ts.spacing_counts / (total * widths) if total else np.zeros_like(widths)
            for c, d in zip(centers, dens):
                out.write(f"{c:.10g}\t{d:.6g}\t{spectra.wigner_surmise(c, 'goe'):.6g}\t"
                          f"{spectra.wigner_surmise(c, 'gue'):.6g}\t{np.exp(-c):.6g}\n")
            _atomic_write(f, out.getvalue())
            written.append(f)

    elif figure == "number-variance":
        f = os.path.join(out_dir, "number_variance.tsv")
        out = io.StringIO()
        out.write("# window number variance per time\n")
        out.write("x\tell\tsigma2\twindows\tgoe_reference\tgue_reference\n")
        for ts in artifact.times:
            for ell, s2, nw in zip(ts.sigma2_lengths, ts.sigma2, ts.sigma2_windows):
                goe = spectra.number_variance_reference(ell, "goe")
                gue = spectra.number_variance_reference(ell, "gue")
                out.write(f"{ts.x:.10g}\t{ell:g}\t{s2:.6g}\t{int(nw)}\t{goe:.6g}\t{gue:.6g}\n")
        _atomic_write(f, out.getvalue())
        written.append(f)

    return written


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)
