"""Model parameters, grids and state containers.

Units follow the aquatic-plant application: densities in g/m^2 dry mass,
time in days, space in metres.  They are documented, not enforced.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidGrid,
    InvalidInteraction,
    NegativeDiffusion,
    NonPositiveGrowth,
    NonPositiveHarvestCapacity,
    SingularSymmetrizedMatrix,
)

# Condition-number ceiling for the symmetrised interaction matrix.
MAX_CONDITION = 1e12


def _frozen(values, ndim):
    arr = np.array(values, dtype=float, ndmin=ndim)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Parameters of N competing populations.

    Attributes:
        a: growth rates, 1/day.
        b: interaction matrix, m^2 g^-1 day^-1; ``b[j, k]`` is the effect
            of species k on species j.
        tau: harvest-capacity coefficients, 1/day.
        diffusion: diffusion coefficients, m^2/day.

    Construct through :func:`make_model` (or call :func:`validate_model`)
    to get the invariants checked.  Arrays are read-only.
    """

    a: np.ndarray
    b: np.ndarray
    tau: np.ndarray
    diffusion: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _frozen(self.a, 1))
        object.__setattr__(self, "b", _frozen(self.b, 2))
        object.__setattr__(self, "tau", _frozen(self.tau, 1))
        object.__setattr__(self, "diffusion", _frozen(self.diffusion, 1))

    @property
    def n_species(self) -> int:
        return self.a.shape[0]

    @property
    def symmetrized(self) -> np.ndarray:
        """S[j, k] = b[j, k] + b[k, j]."""
        return self.b + self.b.T

    def __eq__(self, other):
        if not isinstance(other, ModelSpec):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, name), getattr(other, name))
            for name in ("a", "b", "tau", "diffusion")
        )

    def __repr__(self):
        return (f"ModelSpec(a={self.a.tolist()}, b={self.b.tolist()}, "
                f"tau={self.tau.tolist()}, diffusion={self.diffusion.tolist()})")


def validate_model(spec: ModelSpec) -> ModelSpec:
    """Return ``spec`` unchanged if every invariant holds, else raise."""
    n = spec.a.shape[0]
    if n < 1:
        raise DimensionMismatch("at least one species is required")
    if spec.b.shape != (n, n):
        raise DimensionMismatch(f"interaction matrix has shape {spec.b.shape}, expected ({n}, {n})")
    for name in ("tau", "diffusion"):
        if getattr(spec, name).shape != (n,):
            raise DimensionMismatch(f"{name} has {getattr(spec, name).shape[0]} entries, expected {n}")
    for name in ("a", "b", "tau", "diffusion"):
        if not np.all(np.isfinite(getattr(spec, name))):
            raise DimensionMismatch(f"{name} contains non-finite values")

    if np.any(spec.a <= 0):
        raise NonPositiveGrowth(f"growth rates must be > 0, got {spec.a.tolist()}")
    if np.any(spec.tau <= 0):
        raise NonPositiveHarvestCapacity(f"harvest capacities must be > 0, got {spec.tau.tolist()}")
    if np.any(spec.diffusion < 0):
        raise NegativeDiffusion(f"diffusion coefficients must be >= 0, got {spec.diffusion.tolist()}")
    if np.any(np.diag(spec.b) <= 0):
        raise InvalidInteraction("self-limitation b[j][j] must be > 0 for every species")
    if np.any(spec.b < 0):
        raise InvalidInteraction("competition coefficients b[j][k] must be >= 0")

    cond = np.linalg.cond(spec.symmetrized)
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularSymmetrizedMatrix(f"b + b^T is singular (condition number {cond:.3e})")
    return spec


def make_model(a, b, tau, diffusion) -> ModelSpec:
    """Build and validate a :class:`ModelSpec`.

    A scalar ``b`` is accepted for a single species.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.asarray(b, dtype=float)
    if b.ndim == 0:
        b = b.reshape(1, 1)
    return validate_model(ModelSpec(a=a, b=b,
                                    tau=np.atleast_1d(np.asarray(tau, dtype=float)),
                                    diffusion=np.atleast_1d(np.asarray(diffusion, dtype=float))))


def carrying_capacity(spec: ModelSpec) -> np.ndarray:
    """Monoculture carrying capacities K_j = a_j / b_jj."""
    return spec.a / np.diag(spec.b)


@dataclass(frozen=True)
class Discretization:
    """Uniform node grid on [0, length] and uniform time grid on [0, horizon].

    Both channel ends are grid nodes, so ``dx = length / (n_space - 1)``.
    """

    length: float = 10.0
    n_space: int = 100
    horizon: float = 30.0
    n_time: int = 5000

    def __post_init__(self):
        if int(self.n_space) != self.n_space or self.n_space < 2:
            raise InvalidGrid(f"n_space must be an integer >= 2, got {self.n_space}")
        if int(self.n_time) != self.n_time or self.n_time < 1:
            raise InvalidGrid(f"n_time must be an integer >= 1, got {self.n_time}")
        if not (self.length > 0 and np.isfinite(self.length)):
            raise InvalidGrid(f"length must be > 0, got {self.length}")
        if not (self.horizon > 0 and np.isfinite(self.horizon)):
            raise InvalidGrid(f"horizon must be > 0, got {self.horizon}")
        object.__setattr__(self, "n_space", int(self.n_space))
        object.__setattr__(self, "n_time", int(self.n_time))

    @property
    def dx(self) -> float:
        return self.length / (self.n_space - 1)

    @property
    def dt(self) -> float:
        return self.horizon / self.n_time

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.length, self.n_space)

    def time(self, step: int) -> float:
        return self.horizon * step / self.n_time


@dataclass
class StateVector:
    """Densities of the N species at one instant of the temporal model."""

    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1:
            raise DimensionMismatch("state vector must be one-dimensional")
        if np.any(self.values < 0):
            raise ValueError("densities must be non-negative")


@dataclass
class StateField:
    """Densities of N species on the spatial grid, shape (N, n_space)."""

    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise DimensionMismatch("state field must have shape (n_species, n_space)")
        if np.any(self.values < 0):
            raise ValueError("densities must be non-negative")

    def check_shape(self, spec: ModelSpec, disc: Discretization | None = None):
        expected_n = (spec.n_species, disc.n_space if disc else self.values.shape[1])
        if self.values.shape != expected_n:
            raise DimensionMismatch(f"field has shape {self.values.shape}, expected {expected_n}")
        return self

    @classmethod
    def uniform(cls, levels, n_space, time=0.0):
        levels = np.atleast_1d(np.asarray(levels, dtype=float))
        return cls(np.repeat(levels[:, None], n_space, axis=1), time)
