"""Space-free competition dynamics with threshold harvesting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .control import ControlLevels, harvest, switch_indicator
from .errors import DimensionMismatch, NonFiniteState
from .model import ModelSpec


@dataclass
class OdeTrajectory:
    """Samples of an integrated trajectory.

    ``states``, ``controls`` and ``regime`` have shape (N, samples);
    ``regime[j, i]`` is True when species j was harvested at sample i.
    """

    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray
    regime: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.states[:, -1]


def _vector(spec, w):
    w = np.asarray(w, dtype=float)
    if w.shape != (spec.n_species,):
        raise DimensionMismatch(f"state has shape {w.shape}, expected ({spec.n_species},)")
    return w


def rhs_uncontrolled(spec: ModelSpec, w) -> np.ndarray:
    w = _vector(spec, w)
    return spec.a * w - w * (spec.b @ w)


def rhs_controlled(spec: ModelSpec, levels: ControlLevels, w, rule: str = "coupled") -> np.ndarray:
    """Right-hand side with each species in its own regime.

    Harvested species follow a_j xi_j - sum_k b_jk xi_j xi_k - tau_j u_j,
    which is P_j - tau_j w_j whenever the removal u_j = w_j - xi_j lies in
    [0, w_j]; outside that range u_j is clamped.  Free species grow with the
    raw densities of all species in the competition terms.
    """
    w = _vector(spec, w)
    active = switch_indicator(spec, w, rule) > 0
    u, _ = harvest(w, levels.xi, active)
    growth_at_xi = spec.a * levels.xi - levels.xi * (spec.b @ levels.xi)
    return np.where(active, growth_at_xi - spec.tau * u, rhs_uncontrolled(spec, w))


def controlled_regime_closed_form(spec: ModelSpec, levels: ControlLevels, w0, t) -> np.ndarray:
    """Exact solution of the linear harvested branch started from ``w0``.

    Only meaningful while every species stays harvested on [0, t].
    """
    w0 = np.asarray(w0, dtype=float)
    return levels.w_star + (w0 - levels.w_star) * np.exp(-spec.tau * t)


def integrate_temporal(spec: ModelSpec, levels: ControlLevels, w0, horizon: float,
                       dt: float | None = None, control_enabled: bool = True,
                       rule: str = "coupled") -> OdeTrajectory:
    """Classical RK4 on [0, horizon], regime re-evaluated at every stage.

    ``dt`` defaults to horizon / 5000 and is adjusted so that a whole number
    of steps lands exactly on ``horizon``.  Regime switches are resolved at
    step granularity.
    """
    w = _vector(spec, w0).copy()
    if dt is None:
        n_steps = 5000
    else:
        if dt <= 0:
            raise ValueError(f"dt must be positive, got {dt}")
        n_steps = max(1, int(round(horizon / dt)))
    h = horizon / n_steps

    if control_enabled:
        def f(state):
            return rhs_controlled(spec, levels, state, rule)
    else:
        def f(state):
            return rhs_uncontrolled(spec, state)

    n = spec.n_species
    times = horizon * np.arange(n_steps + 1) / n_steps
    states = np.empty((n, n_steps + 1))
    states[:, 0] = w
    for i in range(1, n_steps + 1):
        k1 = f(w)
        k2 = f(w + 0.5 * h * k1)
        k3 = f(w + 0.5 * h * k2)
        k4 = f(w + h * k3)
        w = w + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(w)):
            raise NonFiniteState(f"state became {w.tolist()}; reduce dt", step=i)
        states[:, i] = w

    if control_enabled:
        regime = switch_indicator(spec, states, rule) > 0
    else:
        regime = np.zeros_like(states, dtype=bool)
    controls, _ = harvest(states, levels.xi, regime)
    return OdeTrajectory(times=times, states=states, controls=controls, regime=regime)
