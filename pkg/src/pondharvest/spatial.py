"""Reaction-diffusion competition with threshold harvesting on a 1-D channel.

Each time step solves, per species j and node s,

    (w_hat - w_prev) / dt = D_j * Dxx w_hat + H_j(w_hat)

by fixed-point iteration on an iterate ``w_it``.  Free nodes use the
linearised growth a_j w_hat - 2 sum_k b_jk w_hat w_it_k + sum_k b_jk w_it_j w_it_k;
harvested nodes use the constant a_j xi_j - sum_k b_jk xi_j xi_k - tau_j u_j
with u_j = w_it_j - xi_j.  Iteration stops once successive iterates differ
by at most 1e-4 in the max norm.  Both channel ends are zero-flux.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .control import ControlLevels, harvest, switch_indicator
from .errors import (
    DimensionMismatch,
    InnerIterationDiverged,
    InvalidGrid,
    NegativeState,
    NonFiniteState,
    NumericalError,
)
from .model import Discretization, ModelSpec, StateField
from .tridiag import solve_tridiagonal_rows

INNER_TOL = 1e-4
MAX_INNER = 100
# Undershoot below zero that is silently clamped.
NEGATIVE_CLAMP = 1e-9


@dataclass(frozen=True)
class DiffusionOperator:
    """Second-difference matrix with zero-flux end rows, scaled by 1/dx^2.

    Interior rows are (1, -2, 1), the first row (-1, 1) and the last (1, -1).
    """

    n: int
    inv_dx2: float

    @property
    def diag(self) -> np.ndarray:
        d = np.full(self.n, -2.0 * self.inv_dx2)
        d[0] = d[-1] = -self.inv_dx2
        return d

    @property
    def off(self) -> np.ndarray:
        return np.full(self.n - 1, self.inv_dx2)

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.off, 1) + np.diag(self.off, -1)

    def apply(self, w) -> np.ndarray:
        """Dxx applied along the last axis."""
        w = np.asarray(w, dtype=float)
        out = np.empty_like(w)
        out[..., 1:-1] = w[..., :-2] - 2.0 * w[..., 1:-1] + w[..., 2:]
        out[..., 0] = w[..., 1] - w[..., 0]
        out[..., -1] = w[..., -2] - w[..., -1]
        return out * self.inv_dx2


def assemble_dxx(n: int, dx: float) -> DiffusionOperator:
    if int(n) != n or n < 2:
        raise InvalidGrid(f"need at least 2 nodes, got {n}")
    if not (dx > 0 and np.isfinite(dx)):
        raise InvalidGrid(f"dx must be positive, got {dx}")
    return DiffusionOperator(n=int(n), inv_dx2=1.0 / dx**2)


@dataclass
class StepDiagnostics:
    inner_iterations: int
    final_residual: float
    controlled_node_count: np.ndarray
    clamp_violations: int = 0


@dataclass
class SimulationRun:
    """Snapshots and per-step diagnostics of a PDE run.

    ``fields`` and ``controls`` have shape (snapshots, N, n_space) and are
    sampled at ``times``; the diagnostic arrays have one entry per time step.
    """

    disc: Discretization
    times: np.ndarray
    fields: np.ndarray
    controls: np.ndarray
    inner_iterations: np.ndarray
    residuals: np.ndarray
    controlled_nodes: np.ndarray
    control_enabled: bool = True
    switch_rule: str = "coupled"
    clamp_violations: int = 0
    step_times: np.ndarray = field(default=None)

    @property
    def x(self) -> np.ndarray:
        return self.disc.x

    @property
    def final(self) -> np.ndarray:
        return self.fields[-1]

    def snapshot_index(self, t: float) -> int:
        return int(np.argmin(np.abs(self.times - t)))

    def at(self, t: float) -> np.ndarray:
        """Stored field nearest to time ``t``."""
        return self.fields[self.snapshot_index(t)]


def spatial_switch(spec: ModelSpec, w_field, rule: str = "coupled") -> np.ndarray:
    """Nodewise switch indicator, shape (N, n_space)."""
    values = w_field.values if isinstance(w_field, StateField) else np.asarray(w_field, float)
    if values.ndim != 2:
        raise DimensionMismatch("field must have shape (n_species, n_space)")
    return switch_indicator(spec, values, rule)


def _flags(spec, levels, w_it, control_enabled, rule):
    if control_enabled:
        active = spatial_switch(spec, w_it, rule) > 0
        u, violations = harvest(w_it, levels.xi, active)
    else:
        active = np.zeros(w_it.shape, dtype=bool)
        u, violations = np.zeros_like(w_it), 0
    return active, u, violations


def linearized_system(spec: ModelSpec, levels: ControlLevels | None, op: DiffusionOperator,
                      prev: np.ndarray, w_it: np.ndarray, dt: float,
                      control_enabled: bool = True, rule: str = "coupled"):
    """Tridiagonal systems (one row per species) for one inner iteration.

    Each species solves (I/dt - D_j Dxx - diag(c_j)) w_hat = prev/dt + r_j,
    where free nodes carry c = a_j - 2 sum_k b_jk w_it_k and
    r = sum_k b_jk w_it_j w_it_k, and harvested nodes carry c = 0 and
    r = a_j xi_j - sum_k b_jk xi_j xi_k - tau_j u_j.

    Returns ``(lower, diag, upper, rhs, active, violations)``.
    """
    active, u, violations = _flags(spec, levels, w_it, control_enabled, rule)
    diff = spec.diffusion[:, None]
    bw = spec.b @ w_it
    react_diag = np.where(active, 0.0, spec.a[:, None] - 2.0 * bw)
    const = w_it * bw
    if control_enabled:
        xi = levels.xi
        growth_at_xi = (spec.a * xi - xi * (spec.b @ xi))[:, None]
        const = np.where(active, growth_at_xi - spec.tau[:, None] * u, const)
    off = np.ascontiguousarray(-diff * op.off[None, :])
    diag = np.ascontiguousarray(1.0 / dt - diff * op.diag[None, :] - react_diag)
    rhs = np.ascontiguousarray(prev / dt + const)
    return off, diag, off, rhs, active, violations


def semi_implicit_step(spec: ModelSpec, levels: ControlLevels | None, op: DiffusionOperator,
                       w_prev, dt: float, control_enabled: bool = True,
                       rule: str = "coupled", tol: float = INNER_TOL,
                       max_iterations: int = MAX_INNER):
    """Advance one time step; returns the new :class:`StateField` and diagnostics.

    ``levels`` may be None when ``control_enabled`` is False.  The loop runs
    while the residual exceeds ``tol`` and the counter (starting at 1) is
    below ``max_iterations``, so at most ``max_iterations - 1`` solves.
    """
    prev = w_prev.values if isinstance(w_prev, StateField) else np.asarray(w_prev, float)
    t_prev = w_prev.time if isinstance(w_prev, StateField) else 0.0
    n_sp = spec.n_species
    if prev.shape != (n_sp, op.n):
        raise DimensionMismatch(f"field has shape {prev.shape}, expected ({n_sp}, {op.n})")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")

    w_it = prev.copy()
    residual = np.inf
    solves = 0
    p = 1
    violations = 0
    active = np.zeros(prev.shape, dtype=bool)
    while residual > tol and p < max_iterations:
        lower, diag, upper, rhs, active, violations = linearized_system(
            spec, levels, op, prev, w_it, dt, control_enabled, rule)
        w_hat = solve_tridiagonal_rows(lower, diag, upper, rhs)
        if not np.all(np.isfinite(w_hat)):
            raise NonFiniteState("inner solve produced non-finite densities")
        low = w_hat.min()
        if low < 0:
            if low < -NEGATIVE_CLAMP:
                raise NegativeState(f"inner solve undershot to {low:.3e}")
            np.maximum(w_hat, 0.0, out=w_hat)
        residual = float(np.max(np.abs(w_hat - w_it)))
        w_it = w_hat
        solves += 1
        p += 1

    if residual > tol:
        raise InnerIterationDiverged(residual, solves)
    diag = StepDiagnostics(inner_iterations=solves, final_residual=residual,
                           controlled_node_count=active.sum(axis=1),
                           clamp_violations=violations)
    return StateField(w_it, t_prev + dt), diag


def control_field(spec, levels, values, control_enabled=True, rule="coupled"):
    """Removal u(x, t) the harvesting law prescribes for a stored field."""
    if not control_enabled:
        return np.zeros_like(values)
    u, _ = harvest(values, levels.xi, spatial_switch(spec, values, rule) > 0)
    return u


def run_pde(spec: ModelSpec, levels: ControlLevels | None, disc: Discretization, initial,
            control_enabled: bool = True, rule: str = "coupled",
            output_stride: int = 10) -> SimulationRun:
    """Advance ``disc.n_time`` steps from ``initial``.

    Fields are stored every ``output_stride`` steps plus the final step
    (``output_stride=1`` keeps everything).  Numerical errors propagate with
    the failing step index attached.
    """
    values = initial.values if isinstance(initial, StateField) else np.asarray(initial, float)
    if values.shape != (spec.n_species, disc.n_space):
        raise DimensionMismatch(
            f"initial field has shape {values.shape}, expected ({spec.n_species}, {disc.n_space})")
    if output_stride < 1:
        raise ValueError("output_stride must be >= 1")
    op = assemble_dxx(disc.n_space, disc.dx)
    dt = disc.dt
    n_steps = disc.n_time

    kept = list(range(0, n_steps + 1, output_stride))
    if kept[-1] != n_steps:
        kept.append(n_steps)
    fields = np.empty((len(kept), spec.n_species, disc.n_space))
    fields[0] = values
    iterations = np.empty(n_steps, dtype=int)
    residuals = np.empty(n_steps)
    controlled = np.empty((n_steps, spec.n_species), dtype=int)
    violations = 0

    state = StateField(values.copy(), 0.0)
    slot = 1
    for step in range(1, n_steps + 1):
        try:
            state, diag = semi_implicit_step(spec, levels, op, state, dt,
                                             control_enabled=control_enabled, rule=rule)
        except NumericalError as exc:
            exc.step = step
            exc.args = (f"time step {step}: {exc.args[0]}",)
            raise
        state.time = disc.time(step)
        iterations[step - 1] = diag.inner_iterations
        residuals[step - 1] = diag.final_residual
        controlled[step - 1] = diag.controlled_node_count
        violations += diag.clamp_violations
        if slot < len(kept) and kept[slot] == step:
            fields[slot] = state.values
            slot += 1

    times = np.array([disc.time(s) for s in kept])
    controls = np.stack([control_field(spec, levels, f, control_enabled, rule) for f in fields])
    return SimulationRun(
        disc=disc, times=times, fields=fields, controls=controls,
        inner_iterations=iterations, residuals=residuals, controlled_nodes=controlled,
        control_enabled=control_enabled, switch_rule=rule, clamp_violations=violations,
        step_times=np.array([disc.time(s) for s in range(1, n_steps + 1)]),
    )
