"""Command-line interface.

    rmtmix run <config-or-preset> [--out DIR] [--fresh] [--workers N]
    rmtmix estimate <config-or-preset>
    rmtmix presets list
    rmtmix presets show <name>
    rmtmix emit <artifact-dir> --figure <id> [--out DIR]
    rmtmix short-time-check --n N [--ensembles K] [--seed S]

Exit codes: 0 success, 1 failed check, 2 configuration error, 3 resource
refusal.  The only environment override is RMTMIX_WORKERS, which replaces
the config worker count unless --workers is given explicitly.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import artifact as artifact_mod
from . import presets, runner, short_time
from .config import ExperimentConfig, load_config
from .errors import ConfigError, ResourceLimitError

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_RESOURCES = 3


def _resolve_config(ref: str) -> ExperimentConfig:
    """A config argument is a file path, or failing that a preset name."""
    if os.path.exists(ref):
        return load_config(ref)
    try:
        return presets.preset_config(ref)
    except KeyError:
        raise ConfigError(
            f"{ref!r} is neither a config file nor a preset "
            f"(presets: {', '.join(presets.preset_names())})"
        ) from None


def _apply_worker_override(config: ExperimentConfig, cli_workers) -> ExperimentConfig:
    if cli_workers is not None:
        return config.with_updates(workers=cli_workers).validate()
    env = os.environ.get("RMTMIX_WORKERS")
    if env is not None:
        try:
            workers = int(env)
        except ValueError:
            raise ConfigError(f"RMTMIX_WORKERS = {env!r} is not an integer") from None
        return config.with_updates(workers=workers).validate()
    return config


def _cmd_run(args) -> int:
    config = _apply_worker_override(_resolve_config(args.config), args.workers)
    out_dir = args.out or os.path.join("runs", f"{config.display_name()}-{config.hash()[:8]}")

    last_decile = [-1]

    def progress(done, total):
        decile = 10 * done // total if total else 10
        if decile != last_decile[0]:
            last_decile[0] = decile
            print(f"  {done}/{total} chunks", flush=True)

    print(f"running {config.display_name()} -> {out_dir}")
    print(f"  estimated: {runner.estimate_cost(config).describe()}")
    art = runner.run_experiment(config, out_dir, resume=not args.fresh, progress=progress)
    print(f"artifact written to {art.path}")
    with open(os.path.join(art.path, artifact_mod.SUMMARY_FILE), "r", encoding="utf-8") as fh:
        print(fh.read(), end="")
    return EXIT_OK


def _cmd_estimate(args) -> int:
    config = _resolve_config(args.config)
    cost = runner.estimate_cost(config)
    print(f"experiment: {config.display_name()} ({config.kind}, size {config.size}, "
          f"{config.realizations} realizations, {len(config.grid_values())} times)")
    print(f"estimate: {cost.describe()}")
    verdict = "within" if cost.gflops <= config.budget_gflops else "EXCEEDS"
    print(f"budget:   {config.budget_gflops:,.0f} GFLOP ({verdict} budget)")
    return EXIT_OK


def _cmd_presets(args) -> int:
    if args.action == "list":
        width = max(len(n) for n in presets.preset_names())
        for name in presets.preset_names():
            print(f"{name:<{width}}  {presets.preset_description(name)}")
        return EXIT_OK
    print(presets.preset_text(args.name), end="")
    return EXIT_OK


def _cmd_emit(args) -> int:
    art = artifact_mod.read_artifact(args.artifact)
    files = artifact_mod.emit_plot_data(art, args.figure, args.out)
    for f in files:
        print(f)
    return EXIT_OK


def _cmd_short_time_check(args) -> int:
    report = short_time.short_time_report(n=args.n, ensembles=args.ensembles, seed=args.seed)
    print(f"short-time self check at n = {report.n}, {report.ensembles} ensembles")
    ok = True
    for row in report.variances:
        verdict = "ok" if row.deviation_se <= 5.0 else "FAIL"
        if verdict == "FAIL":
            ok = False
        print(f"  <{row.name}^2> = {row.mean:.5f} +- {row.sem:.5f} "
              f"(target {row.target}, {row.deviation_se:.1f} SE) {verdict}")
    slope_ok = abs(report.slope - 4.0) <= 0.3
    ok = ok and slope_ok
    print(f"  series error slope: {report.slope:.3f} (target 4 +- 0.3, at n = {report.slope_n}) "
          + ("ok" if slope_ok else "FAIL"))
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rmtmix",
        description="Mixed-state random-matrix ensembles and their spectral crossover",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment and write its artifact")
    p_run.add_argument("config", help="config file path or preset name")
    p_run.add_argument("--out", help="artifact directory (default runs/<name>-<hash>)")
    p_run.add_argument("--fresh", action="store_true",
                       help="discard any checkpoint instead of resuming")
    p_run.add_argument("--workers", type=int, help="override worker count")
    p_run.set_defaults(fn=_cmd_run)

    p_est = sub.add_parser("estimate", help="print the cost estimate of an experiment")
    p_est.add_argument("config", help="config file path or preset name")
    p_est.set_defaults(fn=_cmd_estimate)

    p_pre = sub.add_parser("presets", help="list or show named configurations")
    pre_sub = p_pre.add_subparsers(dest="action", required=True)
    pre_sub.add_parser("list", help="list preset names")
    p_show = pre_sub.add_parser("show", help="print a preset's config file")
    p_show.add_argument("name")
    p_pre.set_defaults(fn=_cmd_presets)

    p_emit = sub.add_parser("emit", help="write plot data files from a finished artifact")
    p_emit.add_argument("artifact", help="run directory")
    p_emit.add_argument("--figure", required=True, choices=artifact_mod.FIGURES)
    p_emit.add_argument("--out", help="output directory (default <artifact>/plots)")
    p_emit.set_defaults(fn=_cmd_emit)

    p_stc = sub.add_parser("short-time-check",
                           help="verify the short-time construction's calibration")
    p_stc.add_argument("--n", type=int, default=512, help="matrix dimension (default 512)")
    p_stc.add_argument("--ensembles", type=int, default=200,
                       help="independent ensembles to average (default 200)")
    p_stc.add_argument("--seed", type=int, default=1)
    p_stc.set_defaults(fn=_cmd_short_time_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceLimitError as exc:
        print(f"resource refusal: {exc}", file=sys.stderr)
        return EXIT_RESOURCES
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
