"""Command-line front end.

    pondharvest simulate <config>... [--out DIR] [--no-control] [--ode-only] [--jobs N]
    pondharvest levels <config>
    pondharvest presets

``<config>`` is a scenario file or the name of a bundled preset.  Exit
codes: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import list_presets, load_config
from .control import equilibrium_levels
from .errors import ConfigError, ModelError, NumericalError
from .scenario import ScenarioResult, format_levels, simulate, terminal_levels, write_outputs

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2

log = logging.getLogger("pondharvest")


def _summary(result: ScenarioResult, written) -> str:
    lines = [f"{result.config.name}: wrote {len(written)} files to {written[0].parent}"]
    if result.run is not None:
        for j, (lo, hi) in enumerate(terminal_levels(result.run)):
            lines.append(f"  species {j + 1}: final density in [{lo:.4f}, {hi:.4f}], "
                         f"w* = {result.levels.w_star[j]:.4f}")
    else:
        for j, w in enumerate(result.trajectory.final):
            lines.append(f"  species {j + 1}: final density {w:.4f}, "
                         f"w* = {result.levels.w_star[j]:.4f}")
    return "\n".join(lines)


def _run_one(source, out_dir, no_control, ode_only):
    """Run one scenario; returns (exit code, message).  Picklable for --jobs."""
    try:
        config = load_config(source)
        if no_control:
            config = config.with_overrides(control_enabled=False)
        result = simulate(config, ode_only=ode_only)
        target = out_dir if out_dir is not None else (config.output_dir or Path("out") / config.name)
        written = write_outputs(result, target)
    except (ConfigError, ModelError) as exc:
        return EXIT_CONFIG, f"{source}: configuration error: {exc}"
    except NumericalError as exc:
        return EXIT_NUMERICAL, f"{source}: numerical failure: {exc}"
    except OSError as exc:
        return EXIT_CONFIG, f"{source}: cannot write output: {exc}"
    return EXIT_OK, _summary(result, written)


def cmd_simulate(args) -> int:
    sources = args.configs
    if len(sources) == 1:
        jobs = [(sources[0], args.out)]
    else:
        # Batch mode: one sub-directory per scenario.
        base = Path(args.out) if args.out else None
        jobs = []
        for src in sources:
            try:
                name = load_config(src).name
            except (ConfigError, ModelError) as exc:
                print(f"{src}: configuration error: {exc}", file=sys.stderr)
                return EXIT_CONFIG
            jobs.append((src, base / name if base else None))

    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(_run_one, src, out, args.no_control, args.ode_only)
                       for src, out in jobs]
            outcomes = [f.result() for f in futures]
    else:
        outcomes = [_run_one(src, out, args.no_control, args.ode_only) for src, out in jobs]

    status = EXIT_OK
    for code, message in outcomes:
        print(message, file=sys.stderr if code else sys.stdout)
        status = max(status, code)
    return status


def cmd_levels(args) -> int:
    try:
        config = load_config(args.config)
        levels = equilibrium_levels(config.model)
    except (ConfigError, ModelError) as exc:
        print(f"{args.config}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(format_levels(config, levels))
    return EXIT_OK


def cmd_presets(args) -> int:
    for name, description in list_presets():
        print(f"{name:<26} {description}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pondharvest",
        description="Threshold harvesting of competing plant populations in a channel.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one or more scenarios and write CSV output")
    sim.add_argument("configs", nargs="+", metavar="config",
                     help="scenario file or preset name")
    sim.add_argument("--out", help="output directory (batch: parent of per-scenario dirs)")
    sim.add_argument("--no-control", action="store_true", help="disable harvesting")
    sim.add_argument("--ode-only", action="store_true",
                     help="integrate the space-free model from channel-averaged densities")
    sim.add_argument("--jobs", type=int, default=1, help="scenarios to run in parallel")
    sim.set_defaults(func=cmd_simulate)

    lev = sub.add_parser("levels", help="print harvest thresholds and equilibria")
    lev.add_argument("config")
    lev.set_defaults(func=cmd_levels)

    pre = sub.add_parser("presets", help="list bundled scenarios")
    pre.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
