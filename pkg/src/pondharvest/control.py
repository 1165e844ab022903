"""Threshold harvesting law and the management levels derived from it.

The optimal levels xi solve (b + b^T) xi = a.  A species is harvested down
to its level wherever the switch indicator
A_j = -a_j + sum_k (b_jk + b_kj) w_k is strictly positive; under that
harvest its dynamics become linear and relax to w*_j = P_j / tau_j.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyTrajectory, SingularSymmetrizedMatrix
from .model import MAX_CONDITION, ModelSpec

SWITCH_RULES = ("coupled", "self")


@dataclass(frozen=True, eq=False)
class ControlLevels:
    """Per-species management levels.

    Attributes:
        xi: harvest threshold (optimal level), g/m^2.
        p: source term of the harvested dynamics, g m^-2 day^-1.
        w_star: harvested equilibrium p / tau, g/m^2.
        u_star: dry mass removed per day at equilibrium, w_star - xi.
    """

    xi: np.ndarray
    p: np.ndarray
    w_star: np.ndarray
    u_star: np.ndarray


def compute_xi(spec: ModelSpec) -> np.ndarray:
    s = spec.symmetrized
    cond = np.linalg.cond(s)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularSymmetrizedMatrix(f"b + b^T is singular (condition number {cond:.3e})")
    return np.linalg.solve(s, spec.a)


def _column(vec, ndim):
    return vec.reshape(vec.shape + (1,) * (ndim - 1))


def _check_state(spec, w):
    w = np.asarray(w, dtype=float)
    if w.ndim == 0 or w.shape[0] != spec.n_species:
        raise DimensionMismatch(
            f"state has leading dimension {w.shape[:1]}, expected {spec.n_species}")
    return w


def switch_indicator(spec: ModelSpec, w, rule: str = "coupled") -> np.ndarray:
    """Switch indicator A for a state of shape (N,) or (N, n_nodes).

    ``rule="coupled"`` couples species through sum_k S_jk w_k.  ``"self"``
    uses the species' own density in every term, (sum_k S_jk) w_j; the two
    agree for a single species.
    """
    w = _check_state(spec, w)
    s = spec.symmetrized
    if rule == "coupled":
        coupled = np.tensordot(s, w, axes=(1, 0))
    elif rule == "self":
        coupled = _column(s.sum(axis=1), w.ndim) * w
    else:
        raise ValueError(f"unknown switch rule {rule!r}; expected one of {SWITCH_RULES}")
    return coupled - _column(spec.a, w.ndim)


def harvest(w, xi, active):
    """Removal w - xi on active entries, clamped to [0, w].

    Returns the removal and the number of entries the clamp had to touch.
    """
    raw = np.where(active, w - _column(xi, np.ndim(w)), 0.0)
    u = np.clip(raw, 0.0, np.maximum(w, 0.0))
    return u, int(np.count_nonzero(u != raw))


def control(spec: ModelSpec, levels: ControlLevels, w, rule: str = "coupled") -> np.ndarray:
    """Pointwise removal u: w - xi where A > 0, zero where A <= 0."""
    w = _check_state(spec, w)
    u, _ = harvest(w, levels.xi, switch_indicator(spec, w, rule) > 0)
    return u


def equilibrium_levels(spec: ModelSpec) -> ControlLevels:
    xi = compute_xi(spec)
    p = spec.a * xi - xi * (spec.b @ xi) + spec.tau * xi
    w_star = p / spec.tau
    return ControlLevels(xi=xi, p=p, w_star=w_star, u_star=w_star - xi)


def evaluate_objective(spec: ModelSpec, times, w, u) -> float:
    """J = -sum_j w_j(T) - sum_j tau_j * integral_0^T u_j dt.

    ``w`` and ``u`` have shape (N, samples) on the sample instants ``times``;
    the integral is the trapezoidal rule on those samples.
    """
    times = np.asarray(times, dtype=float)
    w = np.atleast_2d(np.asarray(w, dtype=float))
    u = np.atleast_2d(np.asarray(u, dtype=float))
    if times.size == 0 or w.shape[-1] == 0:
        raise EmptyTrajectory("trajectory has no samples")
    if w.shape != u.shape or w.shape != (spec.n_species, times.size):
        raise DimensionMismatch(
            f"w {w.shape} and u {u.shape} must both be ({spec.n_species}, {times.size})")
    harvested = np.trapezoid(u, times, axis=1) if times.size > 1 else np.zeros(spec.n_species)
    return float(-w[:, -1].sum() - (spec.tau * harvested).sum())
