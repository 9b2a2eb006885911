"""Experiment orchestration: chunked realizations, checkpoints, artifacts.

A run is M independent realizations.  Each realization draws its own
ensemble of Hamiltonians (one member per Hilbert-space dimension),
diagonalizes every member once, propagates the initial state to all grid
times, and reduces each time's density-matrix spectrum into mergeable
accumulators.  Realizations are grouped into fixed-size chunks; every
chunk's partials are checkpointed to state.json as soon as it finishes, so
an interrupted run resumes without recomputation and without bias (the
partials carry their own counts).

Determinism: random streams are keyed by (purpose, realization, member),
chunk boundaries depend only on the config, BLAS pools are pinned to one
thread, and chunk partials are merged in realization order after all
chunks complete.  Results are therefore identical for any worker count,
bit for bit.
"""

from __future__ import annotations

import json
import multiprocessing
import os
import time as time_mod
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from threadpoolctl import threadpool_limits

from . import artifact as artifact_mod
from . import fitting, rng, spectra, spin_chain
from .accumulators import (HistogramAccumulator, MeanAccumulator,
                           NumberVarianceAccumulator, TimePartial)
from .config import (KIND_CROSSOVER, KIND_GOE, KIND_GUE, KIND_SPIN_HF,
                     KIND_SPIN_OE, ExperimentConfig, parse_config)
from .ensembles import (basis_state, crossover_hamiltonian, sample_antisymmetric,
                        sample_goe, sample_gue, sample_real_state)
from .errors import ConfigError, ResourceLimitError, UnfoldingError
from .evolution import decompose, propagate_grid, purity, spectrum, state_matrix_to_density

EFFECTIVE_GFLOPS = 4.0  # sustained rate of one ordinary core, used for time estimates


@dataclass(frozen=True)
class CostEstimate:
    """Coarse cost model of a run (within a factor ~2 of a desktop core)."""

    gflops: float
    peak_bytes: int
    seconds: float

    def describe(self) -> str:
        return (f"~{self.gflops:,.0f} GFLOP, ~{self.peak_bytes / 2 ** 20:,.0f} MiB peak, "
                f"~{self.seconds / 60:.1f} min on one core")


def estimate_cost(config: ExperimentConfig) -> CostEstimate:
    n = config.hilbert_dimension
    m = config.realizations
    t = len(config.grid_values())
    members = config.ensemble_size
    complex_members = config.kind in (KIND_GUE, KIND_CROSSOVER)
    eig = 1.1 * n ** 3 * (2.5 if complex_members else 1.0)
    draw = 25.0 * n * n
    build = 150.0 * n * config.size if config.kind in (KIND_SPIN_HF, KIND_SPIN_OE) else 0.0
    propagation = 6.0 * n * n * t
    per_member = eig + draw + build + propagation
    per_time = 1.9 * n ** 3  # density assembly plus its eigenvalues
    flops = m * (members * per_member + t * per_time)
    gflops = flops / 1e9
    peak = (t + 6) * n * n * 16
    return CostEstimate(gflops=gflops, peak_bytes=int(peak), seconds=gflops / EFFECTIVE_GFLOPS)


# ---- per-realization computation ----

@lru_cache(maxsize=4)
def _sector_basis(length: int, n_up: int):
    return spin_chain.build_basis(length, n_up)


def _initial_state(config: ExperimentConfig, realization: int) -> np.ndarray:
    n = config.hilbert_dimension
    if config.initial_state == "basis":
        return basis_state(n, 0)
    gen = rng.stream(config.seed, rng.PURPOSE_STATE, realization)
    return sample_real_state(n, gen)


def _member_hamiltonian(config: ExperimentConfig, realization: int, member: int) -> np.ndarray:
    n = config.hilbert_dimension
    if config.kind == KIND_GOE:
        return sample_goe(n, rng.stream(config.seed, rng.PURPOSE_HAMILTONIAN, realization, member))
    if config.kind == KIND_GUE:
        return sample_gue(n, rng.stream(config.seed, rng.PURPOSE_HAMILTONIAN, realization, member))
    if config.kind == KIND_CROSSOVER:
        s = sample_goe(n, rng.stream(config.seed, rng.PURPOSE_HAMILTONIAN, realization, member))
        a = sample_antisymmetric(
            n, rng.stream(config.seed, rng.PURPOSE_ANTISYMMETRIC, realization, member))
        return crossover_hamiltonian(s, a, config.alpha)
    disorder = spin_chain.sample_disorder(
        config.size, config.disorder, rng.stream(config.seed, rng.PURPOSE_DISORDER, realization, member))
    if config.kind == KIND_SPIN_OE:
        return spin_chain.one_excitation_hamiltonian(config.size, disorder)
    return spin_chain.heisenberg(_sector_basis(config.size, config.n_up), disorder)


def _new_partial(config: ExperimentConfig) -> TimePartial:
    spacing_edges = np.linspace(0.0, config.spacing_max, config.spacing_bins + 1)
    density_edges = np.linspace(config.density_lo, config.density_hi, config.density_bins + 1)
    # uniform bins in y = sqrt(lambda) so the quarter-circle check is a
    # genuinely different binning, not a relabeled copy of the density one
    sqrt_edges = np.linspace(np.sqrt(config.density_lo), np.sqrt(config.density_hi),
                             config.density_bins + 1)
    return TimePartial(
        r_tilde=MeanAccumulator(),
        spacing_hist=HistogramAccumulator(edges=spacing_edges),
        density_hist=HistogramAccumulator(edges=density_edges),
        sqrt_density_hist=HistogramAccumulator(edges=sqrt_edges),
        sigma2=NumberVarianceAccumulator(lengths=config.sigma2_lengths),
        purity=MeanAccumulator(),
        kept=MeanAccumulator(),
        spacing_mean=MeanAccumulator(),
    )


def _reduce_spectrum(config: ExperimentConfig, eigenvalues: np.ndarray, rho_purity: float,
                     partial: TimePartial) -> None:
    kept = spectra.truncate_spectrum(eigenvalues, config.truncation_tolerance)
    partial.kept.add([kept.size])
    partial.kept_min = min(partial.kept_min, kept.size)
    partial.kept_max = max(partial.kept_max, kept.size)
    partial.purity.add([rho_purity])
    if config.density_mode == "bulk-normalized":
        rescaled, top = spectra.bulk_normalized(kept)
        if top is not None:
            partial.separated += 1
    else:
        rescaled = spectra.rescale_eigenvalues(kept, config.hilbert_dimension)
    partial.density_hist.add(rescaled)
    partial.sqrt_density_hist.add(np.sqrt(rescaled))
    central = spectra.central_bulk(kept, config.bulk_fraction)
    # very early times can truncate to a handful of levels (the state is
    # still nearly pure); fluctuation statistics are skipped, not crashed
    if central.size < max(3, config.unfolding_degree + 2):
        partial.undersized += 1
        partial.realizations += 1
        return
    values, excluded = spectra.r_tilde_values(central)
    partial.r_tilde.add(values, excluded)
    try:
        unfolded = spectra.unfold(central, config.unfolding_degree).unfolded
    except UnfoldingError:
        # clustered early-time levels can defeat the staircase fit even when
        # enough of them survive truncation; skip the unfolded statistics
        partial.undersized += 1
        partial.realizations += 1
        return
    gaps = spectra.spacings(unfolded)
    partial.spacing_hist.add(gaps)
    partial.spacing_mean.add([float(gaps.mean())])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # window lengths beyond the span show up as zero-window rows
        partial.sigma2.add_moments(spectra.number_count_moments(unfolded, config.sigma2_lengths))
    partial.realizations += 1


def _run_realization(config: ExperimentConfig, realization: int, partials) -> None:
    times = config.absolute_times()
    n = config.hilbert_dimension
    members = config.ensemble_size
    psi0 = _initial_state(config, realization)
    if config.refresh_per_time:
        for k, t in enumerate(times):
            psis = np.empty((n, members), dtype=complex)
            for l in range(members):
                gen_member = realization * len(times) + k  # distinct draw per (time, member)
                h = _member_hamiltonian(config, gen_member, l)
                psis[:, l] = propagate_grid(decompose(h), psi0, [t])[:, 0]
            rho = state_matrix_to_density(psis)
            _reduce_spectrum(config, spectrum(rho), purity(rho), partials[k])
        return
    columns = np.empty((len(times), n, members), dtype=complex)
    for l in range(members):
        h = _member_hamiltonian(config, realization, l)
        grid = propagate_grid(decompose(h), psi0, times)
        columns[:, :, l] = grid.T
    for k in range(len(times)):
        rho = state_matrix_to_density(columns[k])
        _reduce_spectrum(config, spectrum(rho), purity(rho), partials[k])


def compute_chunk(config_text: str, start: int, stop: int) -> dict:
    """Partials for realizations [start, stop); the multiprocess work unit."""
    config = parse_config(config_text)
    with threadpool_limits(limits=1):
        partials = [_new_partial(config) for _ in config.grid_values()]
        for m in range(start, stop):
            _run_realization(config, m, partials)
    return {str(k): p.to_json() for k, p in enumerate(partials)}


# ---- orchestration ----

def _chunks(config: ExperimentConfig):
    size = config.chunk_realizations
    return [(s, min(s + size, config.realizations))
            for s in range(0, config.realizations, size)]


def _load_state(out_dir: str, config: ExperimentConfig, resume: bool) -> dict:
    state_path = os.path.join(out_dir, artifact_mod.STATE_FILE)
    if not os.path.exists(state_path):
        return {"config_hash": config.hash(), "chunks": {}}
    with open(state_path, "r", encoding="utf-8") as fh:
        state = json.load(fh)
    if state.get("config_hash") != config.hash():
        if resume:
            raise ConfigError(
                f"{out_dir} holds state for a different experiment "
                f"({state.get('config_hash', '?')[:12]} != {config.hash()[:12]}); "
                "pass resume=False (CLI: --fresh) to discard it"
            )
        return {"config_hash": config.hash(), "chunks": {}}
    if not resume:
        return {"config_hash": config.hash(), "chunks": {}}
    return state


def _save_state(out_dir: str, state: dict) -> None:
    path = os.path.join(out_dir, artifact_mod.STATE_FILE)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(state, fh)
    os.replace(tmp, path)


def run_experiment(config: ExperimentConfig, out_dir: str, resume: bool = True,
                   progress=None) -> artifact_mod.RunArtifact:
    """Execute (or finish) a run and write its artifact directory.

    Raises ResourceLimitError when the cost estimate exceeds the config
    budget, ConfigError when out_dir holds a different experiment.
    """
    config = config.validate()
    cost = estimate_cost(config)
    if cost.gflops > config.budget_gflops:
        raise ResourceLimitError(
            f"estimated cost {cost.gflops:,.0f} GFLOP exceeds budget_gflops = "
            f"{config.budget_gflops:,.0f} ({cost.describe()}); raise the budget to confirm"
        )
    started = time_mod.monotonic()
    os.makedirs(out_dir, exist_ok=True)
    state = _load_state(out_dir, config, resume)
    with open(os.path.join(out_dir, artifact_mod.SNAPSHOT_FILE), "w", encoding="utf-8") as fh:
        fh.write(config.to_ini())
    chunks = _chunks(config)
    pending = [(s, e) for s, e in chunks if str(s) not in state["chunks"]]
    done = len(chunks) - len(pending)
    if progress:
        progress(done, len(chunks))
    config_text = config.to_ini()

    def record(start_index, result):
        state["chunks"][str(start_index)] = result
        _save_state(out_dir, state)

    if pending:
        with threadpool_limits(limits=1):
            if config.workers > 1 and len(pending) > 1:
                ctx = multiprocessing.get_context("spawn")
                with ProcessPoolExecutor(max_workers=min(config.workers, len(pending)),
                                         mp_context=ctx) as pool:
                    futures = {s: pool.submit(compute_chunk, config_text, s, e)
                               for s, e in pending}
                    for s, e in pending:
                        try:
                            result = futures[s].result()
                        except Exception:
                            result = compute_chunk(config_text, s, e)  # one in-process retry
                        record(s, result)
                        done += 1
                        if progress:
                            progress(done, len(chunks))
            else:
                for s, e in pending:
                    record(s, compute_chunk(config_text, s, e))
                    done += 1
                    if progress:
                        progress(done, len(chunks))

    # merge in realization order regardless of completion order
    merged = [_new_partial(config) for _ in config.grid_values()]
    for s, _ in chunks:
        chunk_data = state["chunks"][str(s)]
        for k in range(len(merged)):
            merged[k].merge(TimePartial.from_json(chunk_data[str(k)]))

    grid = config.grid_values()
    times_abs = config.absolute_times()
    stats_dir = os.path.join(out_dir, artifact_mod.STATS_DIR)
    os.makedirs(stats_dir, exist_ok=True)
    stats = []
    for k, partial in enumerate(merged):
        ts = _to_time_statistics(k, float(grid[k]), float(times_abs[k]), partial)
        artifact_mod.write_time_stats(
            os.path.join(stats_dir, artifact_mod.time_stats_filename(k)), ts)
        stats.append(ts)

    fit_records = _fit_curve(config, stats)
    artifact_mod.write_fits(os.path.join(out_dir, artifact_mod.FITS_FILE), fit_records)
    artifact_mod.write_summary(os.path.join(out_dir, artifact_mod.SUMMARY_FILE),
                               config, stats, fit_records,
                               time_mod.monotonic() - started)
    return artifact_mod.RunArtifact(path=out_dir, config=config,
                                    times=tuple(stats), fits=tuple(fit_records))


def _to_time_statistics(index: int, x: float, t_abs: float,
                        partial: TimePartial) -> artifact_mod.TimeStatistics:
    return artifact_mod.TimeStatistics(
        index=index,
        x=x,
        time=t_abs,
        r_tilde_mean=partial.r_tilde.mean,
        r_tilde_stderr=partial.r_tilde.stderr,
        r_tilde_count=partial.r_tilde.count,
        r_tilde_excluded=partial.r_tilde.excluded,
        purity_mean=partial.purity.mean,
        kept_mean=partial.kept.mean,
        kept_min=partial.kept_min,
        kept_max=partial.kept_max,
        separated=partial.separated,
        undersized=partial.undersized,
        realizations=partial.realizations,
        spacing_mean=partial.spacing_mean.mean,
        spacing_edges=partial.spacing_hist.edges,
        spacing_counts=partial.spacing_hist.counts,
        spacing_below=partial.spacing_hist.below,
        spacing_above=partial.spacing_hist.above,
        density_edges=partial.density_hist.edges,
        density_counts=partial.density_hist.counts,
        density_below=partial.density_hist.below,
        density_above=partial.density_hist.above,
        sqrt_density_edges=partial.sqrt_density_hist.edges,
        sqrt_density_counts=partial.sqrt_density_hist.counts,
        sqrt_density_below=partial.sqrt_density_hist.below,
        sqrt_density_above=partial.sqrt_density_hist.above,
        sigma2_lengths=np.array(partial.sigma2.lengths),
        sigma2=partial.sigma2.sigma2(),
        sigma2_windows=partial.sigma2.windows.copy(),
    )


def _fit_curve(config: ExperimentConfig, stats) -> list:
    model = config.resolved_fit_model()
    # times where every realization was undersized carry no gap-ratio mean
    stats = [ts for ts in stats if np.isfinite(ts.r_tilde_mean)]
    if model == "none" or len(stats) < 4:
        return []
    x = np.array([ts.x for ts in stats])
    y = np.array([ts.r_tilde_mean for ts in stats])
    sigma = np.array([max(ts.r_tilde_stderr, 1e-12) for ts in stats])
    try:
        res = fitting.fit_crossover_with_range(x, y, model=model, sigma=sigma)
    except Exception as exc:  # a failed fit must not lose the run data
        return [artifact_mod.FitRecord(
            model=model, x_units=config.time_units, params={}, stderr={},
            rss=float("nan"), n_points=0, iterations=0, converged=False,
            range_lo=float("nan"), range_hi=float("nan"), error=f"{type(exc).__name__}: {exc}")]
    names = fitting.model_names(model)
    return [artifact_mod.FitRecord(
        model=model,
        x_units=config.time_units,
        params=dict(zip(names, (float(v) for v in res.params))),
        stderr=dict(zip(names, (float(v) for v in res.stderr))),
        rss=res.rss,
        n_points=res.n_points,
        iterations=res.iterations,
        converged=res.converged,
        range_lo=res.fit_range[0],
        range_hi=res.fit_range[1],
    )]
