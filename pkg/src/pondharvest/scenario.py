"""Run a configured scenario and write its result files."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ScenarioConfig
from .control import ControlLevels, equilibrium_levels
from .spatial import SimulationRun, run_pde
from .temporal import OdeTrajectory, integrate_temporal

log = logging.getLogger(__name__)


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    levels: ControlLevels
    run: SimulationRun | None = None
    trajectory: OdeTrajectory | None = None


def _g6(v):
    return f"{v:.6g}"


def simulate(config: ScenarioConfig, ode_only: bool = False) -> ScenarioResult:
    levels = equilibrium_levels(config.model)
    result = ScenarioResult(config=config, levels=levels)
    if ode_only:
        # Space-free run from the channel-averaged initial densities.
        w0 = config.initial_field().mean(axis=1)
        result.trajectory = integrate_temporal(
            config.model, levels, w0, config.disc.horizon, config.disc.dt,
            control_enabled=config.control_enabled, rule=config.switch_rule)
    else:
        result.run = run_pde(
            config.model, levels, config.disc, config.initial_field(),
            control_enabled=config.control_enabled, rule=config.switch_rule,
            output_stride=config.output_stride)
        if result.run.clamp_violations:
            log.warning("%s: harvest clamped to [0, w] at %d node-iterations",
                        config.name, result.run.clamp_violations)
    return result


def format_levels(config: ScenarioConfig, levels: ControlLevels) -> str:
    lines = [f"# management levels for {config.name}",
             "# xi: harvest threshold, P: source term, w*: harvested equilibrium,",
             "# u*: dry mass removed per day at equilibrium (g/m^2)"]
    for j in range(config.n_species):
        name = config.species_names[j] if j < len(config.species_names) else f"species {j + 1}"
        lines += [
            f"species {j + 1} ({name})",
            f"  xi = {levels.xi[j]:.4f}",
            f"  P  = {levels.p[j]:.4f}",
            f"  w* = {levels.w_star[j]:.4f}",
            f"  u* = {levels.u_star[j]:.4f}",
        ]
    return "\n".join(lines) + "\n"


def write_levels(path: Path, config: ScenarioConfig, levels: ControlLevels) -> list[Path]:
    txt = path / "levels.txt"
    txt.write_text(format_levels(config, levels))
    machine = path / "levels.csv"
    with machine.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["species", "xi", "p", "w_star", "u_star"])
        for j in range(config.n_species):
            writer.writerow([j + 1] + [repr(float(v[j])) for v in
                                       (levels.xi, levels.p, levels.w_star, levels.u_star)])
    return [txt, machine]


def write_field_csv(path: Path, run: SimulationRun) -> Path:
    n = run.fields.shape[1]
    out = path / "field.csv"
    x = run.x
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "x"] + [f"w_{j + 1}" for j in range(n)]
                        + [f"u_{j + 1}" for j in range(n)])
        for t, field, control in zip(run.times, run.fields, run.controls):
            for s in range(x.size):
                writer.writerow([_g6(t), _g6(x[s])] + [_g6(v) for v in field[:, s]]
                                + [_g6(v) for v in control[:, s]])
    return out


def write_diagnostics_csv(path: Path, run: SimulationRun) -> Path:
    n = run.controlled_nodes.shape[1]
    out = path / "diagnostics.csv"
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "inner_iterations", "residual"]
                        + [f"controlled_nodes_{j + 1}" for j in range(n)])
        for i, t in enumerate(run.step_times):
            writer.writerow([_g6(t), int(run.inner_iterations[i]), _g6(run.residuals[i])]
                            + [int(c) for c in run.controlled_nodes[i]])
    return out


def write_trajectory_csv(path: Path, traj: OdeTrajectory, stride: int) -> Path:
    n = traj.states.shape[0]
    out = path / "trajectory.csv"
    idx = list(range(0, traj.times.size, stride))
    if idx[-1] != traj.times.size - 1:
        idx.append(traj.times.size - 1)
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t"] + [f"w_{j + 1}" for j in range(n)] + [f"u_{j + 1}" for j in range(n)])
        for i in idx:
            writer.writerow([_g6(traj.times[i])] + [_g6(v) for v in traj.states[:, i]]
                            + [_g6(v) for v in traj.controls[:, i]])
    return out


PLOT_TEMPLATE = """\
# gnuplot script: density surfaces w_j(x, t) from field.csv
set datafile separator ','
set key autotitle columnhead
set xlabel 'x (m)'
set ylabel 't (days)'
set hidden3d
set dgrid3d {ngrid_t},{ngrid_x} qnorm 2
set terminal pngcairo size 900,700
"""

PLOT_SPECIES = """
set zlabel 'w_{j} (g/m^2)'
set title '{title}'
set output 'w_{j}.png'
splot 'field.csv' using 2:1:{col} with lines notitle
"""


def write_plot_script(path: Path, config: ScenarioConfig, run: SimulationRun) -> Path:
    out = path / "surface.gp"
    text = PLOT_TEMPLATE.format(ngrid_t=min(run.times.size, 60), ngrid_x=min(run.x.size, 50))
    for j in range(config.n_species):
        name = config.species_names[j] if j < len(config.species_names) else f"species {j + 1}"
        text += PLOT_SPECIES.format(j=j + 1, col=3 + j, title=f"{config.name}: {name}")
    out.write_text(text)
    return out


def write_outputs(result: ScenarioResult, out_dir) -> list[Path]:
    """Write every requested file; on failure, remove what was written."""
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    config = result.config
    try:
        written += write_levels(path, config, result.levels)
        if result.trajectory is not None:
            written.append(write_trajectory_csv(path, result.trajectory, config.output_stride))
        if result.run is not None:
            if "csv" in config.formats:
                written.append(write_field_csv(path, result.run))
                written.append(write_diagnostics_csv(path, result.run))
            if "plot-script" in config.formats:
                written.append(write_plot_script(path, config, result.run))
    except BaseException:
        for p in written:
            p.unlink(missing_ok=True)
        raise
    return written


def run_scenario(config: ScenarioConfig, out_dir=None, ode_only: bool = False) -> list[Path]:
    """Simulate ``config`` and write its files; returns the written paths.

    Nothing is written if the simulation itself fails.
    """
    if out_dir is None:
        out_dir = config.output_dir or Path("out") / config.name
    result = simulate(config, ode_only=ode_only)
    return write_outputs(result, out_dir)


def terminal_levels(run: SimulationRun) -> np.ndarray:
    """Per-species (min, max) over the channel of the final stored field."""
    return np.stack([run.final.min(axis=1), run.final.max(axis=1)], axis=1)
