"""Threshold harvesting of competing populations, with and without diffusion."""

from .config import ScenarioConfig, list_presets, load_config, load_preset, parse_config, render_config
from .control import (
    ControlLevels,
    compute_xi,
    control,
    equilibrium_levels,
    evaluate_objective,
    switch_indicator,
)
from .model import (
    Discretization,
    ModelSpec,
    StateField,
    StateVector,
    carrying_capacity,
    make_model,
    validate_model,
)
from .scenario import run_scenario
from .spatial import (
    DiffusionOperator,
    SimulationRun,
    StepDiagnostics,
    assemble_dxx,
    run_pde,
    semi_implicit_step,
    spatial_switch,
)
from .temporal import (
    OdeTrajectory,
    controlled_regime_closed_form,
    integrate_temporal,
    rhs_controlled,
    rhs_uncontrolled,
)
from .tridiag import solve_tridiagonal

__version__ = "0.1.0"
