"""Command-line front end.

Verbs:
  simulate <config>         run one scenario and write its artifacts
  stability <config>        print the stability report for the scenario
  sweep <config>            evaluate a parameter grid, write a summary CSV
  critical-period <config>  print the largest stabilizing shared period
  preset <name>             run a bundled scenario (all variants)

<config> is a JSON scenario file path or the name of a bundled preset.  The
output directory is --outdir, else $IPMSIM_OUTDIR, else the working
directory.  Exit codes: 0 success, 2 configuration error, 3 integration
failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from itertools import product
from pathlib import Path

from . import __version__
from .config import (
    ScenarioConfig,
    load_preset,
    preset_names,
    resolve_config_argument,
)
from .diagnostics import verify_trajectory
from .errors import ConfigError, DomainError, IntegrationError
from .integrator import integrate
from .stability import StabilityReport, analyze, critical_period
from .svgplot import write_trajectory_svg

__all__ = ["main", "run_scenario", "run_sweep"]

_OUTDIR_ENV = "IPMSIM_OUTDIR"


def _resolve_outdir(arg: str | None) -> Path:
    if arg:
        outdir = Path(arg)
    elif os.environ.get(_OUTDIR_ENV):
        outdir = Path(os.environ[_OUTDIR_ENV])
    else:
        outdir = Path.cwd()
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir


def run_scenario(config: ScenarioConfig, outdir: Path) -> list[Path]:
    """Produce the scenario's requested artifacts; returns written paths."""
    written: list[Path] = []
    needs_traj = any(
        kind in config.outputs
        for kind in ("trajectory_csv", "svg_plot", "diagnostics_report")
    )
    traj = None
    if needs_traj:
        traj = integrate(
            config.params, config.schedule, config.initial, config.t_span,
            config.solver,
        )

    if "trajectory_csv" in config.outputs:
        path = outdir / f"{config.name}.csv"
        traj.to_csv(path)
        written.append(path)
    if "svg_plot" in config.outputs:
        path = outdir / f"{config.name}.svg"
        write_trajectory_svg(traj, path, title=config.name)
        written.append(path)
    if "diagnostics_report" in config.outputs:
        path = outdir / f"{config.name}-diagnostics.txt"
        report = verify_trajectory(traj)
        report.write(path)
        written.append(path)
    if "stability_report" in config.outputs:
        path = outdir / f"{config.name}-stability.txt"
        report = analyze(config.params, config.schedule)
        path.write_text(report.to_text(), encoding="utf-8")
        written.append(path)
    return written


def _scenario_for_point(
    base: ScenarioConfig, assignment: dict[str, float]
) -> ScenarioConfig:
    schedule = replace(base.schedule, **assignment)
    return replace(base, schedule=schedule, variants=(), sweep=None)


def _sweep_point(args: tuple[ScenarioConfig, int, dict[str, float]]):
    base, index, assignment = args
    scenario = _scenario_for_point(base, assignment)
    try:
        report = analyze(scenario.params, scenario.schedule)
        stable = str(report.stable).lower()
        dominant = repr(report.dominant_multiplier)
    except (DomainError, IntegrationError):
        stable = "error"
        dominant = "nan"
    try:
        traj = integrate(
            scenario.params, scenario.schedule, scenario.initial,
            scenario.t_span, scenario.solver,
        )
        diag = verify_trajectory(traj)
        ext_y = diag.extinction_times.get("y")
        ext_z = diag.extinction_times.get("z")
        ext_y_text = "none" if ext_y is None else repr(ext_y)
        ext_z_text = "none" if ext_z is None else repr(ext_z)
    except (DomainError, IntegrationError):
        ext_y_text = ext_z_text = "error"
    return index, assignment, stable, dominant, ext_y_text, ext_z_text


def run_sweep(
    config: ScenarioConfig,
    outdir: Path,
    *,
    workers: int = 1,
    resume: bool = False,
) -> Path:
    """Evaluate the config's sweep grid and write one summary CSV.

    Rows are ordered lexicographically by grid indices and carry an index
    column; with resume=True, rows already present in an existing output file
    are kept and only missing indices are recomputed.
    """
    if config.sweep is None:
        raise ConfigError(f"scenario {config.name!r} has no 'sweep' section")
    sweep = config.sweep
    if sweep.size > sweep.cap:
        raise ConfigError(
            f"sweep grid has {sweep.size} points, exceeding the cap of {sweep.cap}"
        )

    axis_names = [name for name, _ in sweep.axes]
    header = ["index", *axis_names, "stable", "dominant_multiplier",
              "extinction_y", "extinction_z"]
    path = outdir / f"{config.name}-sweep.csv"

    existing: dict[int, list[str]] = {}
    if resume and path.exists():
        lines = path.read_text(encoding="utf-8").splitlines()
        if lines and lines[0] == ",".join(header):
            for line in lines[1:]:
                cells = line.split(",")
                if len(cells) == len(header):
                    try:
                        existing[int(cells[0])] = cells
                    except ValueError:
                        continue

    tasks = []
    for index, combo in enumerate(product(*(values for _, values in sweep.axes))):
        if index in existing:
            continue
        assignment = dict(zip(axis_names, combo))
        tasks.append((config, index, assignment))

    results: dict[int, list[str]] = dict(existing)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(task) for task in tasks]
    for index, assignment, stable, dominant, ext_y, ext_z in rows:
        cells = [str(index)]
        cells += [repr(float(assignment[name])) for name in axis_names]
        cells += [stable, dominant, ext_y, ext_z]
        results[index] = cells

    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for index in sorted(results):
            fh.write(",".join(results[index]) + "\n")
    return path


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = resolve_config_argument(args.config)
    outdir = _resolve_outdir(args.outdir)
    if args.variant:
        scenarios = [config.variant(args.variant)]
    elif args.all_variants and config.variants:
        scenarios = list(config.variants)
    else:
        scenarios = [config]
    for scenario in scenarios:
        for path in run_scenario(scenario, outdir):
            print(f"wrote {path}")
    return 0


def _cmd_stability(args: argparse.Namespace) -> int:
    config = resolve_config_argument(args.config)
    report = analyze(config.params, config.schedule)
    sys.stdout.write(report.to_text())
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = resolve_config_argument(args.config)
    outdir = _resolve_outdir(args.outdir)
    path = run_sweep(config, outdir, workers=args.workers, resume=args.resume)
    print(f"wrote {path}")
    return 0


def _cmd_critical_period(args: argparse.Namespace) -> int:
    config = resolve_config_argument(args.config)
    v_i = args.v_i if args.v_i is not None else config.schedule.v_i
    s_i = args.s_i if args.s_i is not None else config.schedule.s_i
    tau_star = critical_period(config.params, v_i, s_i)
    if math.isinf(tau_star):
        print("tau_star = unbounded (stable for every period)")
    else:
        print(f"tau_star = {tau_star!r}")
    return 0


def _cmd_preset(args: argparse.Namespace) -> int:
    config = load_preset(args.name)
    outdir = _resolve_outdir(args.outdir)
    scenarios = list(config.variants) if config.variants else [config]
    for scenario in scenarios:
        for path in run_scenario(scenario, outdir):
            print(f"wrote {path}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ipmsim",
        description="Simulator and stability analyzer for double-impulsive "
        "crop / pest / biopesticide / chemical-pesticide dynamics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario, write its artifacts")
    p.add_argument("config", help="scenario JSON path or preset name")
    p.add_argument("--outdir", help="output directory (default: $IPMSIM_OUTDIR or cwd)")
    p.add_argument("--variant", help="run only the named variant")
    p.add_argument(
        "--all-variants", action="store_true",
        help="run every variant defined by the scenario",
    )
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("stability", help="print the stability report")
    p.add_argument("config", help="scenario JSON path or preset name")
    p.set_defaults(func=_cmd_stability)

    p = sub.add_parser("sweep", help="evaluate a parameter grid")
    p.add_argument("config", help="scenario JSON path or preset name")
    p.add_argument("--outdir", help="output directory (default: $IPMSIM_OUTDIR or cwd)")
    p.add_argument("--workers", type=int, default=1, help="parallel worker count")
    p.add_argument(
        "--resume", action="store_true",
        help="keep rows already present in the output file",
    )
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser(
        "critical-period", help="largest stabilizing shared impulse period"
    )
    p.add_argument("config", help="scenario JSON path or preset name")
    p.add_argument("--v-i", type=float, default=None, dest="v_i",
                   help="override the biopesticide impulse strength")
    p.add_argument("--s-i", type=float, default=None, dest="s_i",
                   help="override the chemical impulse strength")
    p.set_defaults(func=_cmd_critical_period)

    p = sub.add_parser("preset", help="run a bundled scenario (all variants)")
    p.add_argument("name", choices=preset_names(), help="preset name")
    p.add_argument("--outdir", help="output directory (default: $IPMSIM_OUTDIR or cwd)")
    p.set_defaults(func=_cmd_preset)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except IntegrationError as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
