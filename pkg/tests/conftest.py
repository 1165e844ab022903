import functools

import numpy as np
import pytest

from pondharvest.config import load_preset
from pondharvest.control import equilibrium_levels
from pondharvest.model import Discretization, make_model
from pondharvest.spatial import run_pde

PRESETS = (
    "eichhornia-const140",
    "eichhornia-linear80x",
    "eichhornia-uncontrolled",
    "two-plant-low-280-80",
    "two-plant-high-700-350",
    "two-plant-uncontrolled",
)

# Lines printed at the end of the session by the acceptance module.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def single():
    return make_model(0.103, 0.000147, 1.0, 1.33)


@pytest.fixture(scope="session")
def two():
    return make_model([0.061, 0.087], [[0.0000614, 0.00001], [0.0001, 0.0001992]],
                      [1.0, 1.0], [1.33, 1.3])


@pytest.fixture(scope="session")
def single_levels(single):
    return equilibrium_levels(single)


@pytest.fixture(scope="session")
def two_levels(two):
    return equilibrium_levels(two)


@functools.lru_cache(maxsize=None)
def preset_run(name, time_factor=1, horizon=None, stride=None):
    """Full-scale PDE run of a bundled preset, cached for the session."""
    cfg = load_preset(name)
    disc = cfg.disc
    if horizon is not None:
        disc = Discretization(disc.length, disc.n_space, horizon,
                              int(round(disc.n_time * horizon / disc.horizon)))
    disc = Discretization(disc.length, disc.n_space, disc.horizon, disc.n_time * time_factor)
    if stride is None:
        stride = cfg.output_stride * time_factor
    levels = equilibrium_levels(cfg.model)
    return cfg, levels, run_pde(cfg.model, levels, disc, cfg.initial_field(),
                                control_enabled=cfg.control_enabled,
                                rule=cfg.switch_rule, output_stride=stride)


@pytest.fixture(scope="session")
def runs():
    return preset_run


@pytest.fixture
def rng():
    return np.random.default_rng(20241016)
