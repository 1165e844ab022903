"""Exception hierarchy.

Two families matter to callers: ``ModelError``/``ConfigError`` mean the
input is unusable (CLI exit code 1), ``NumericalError`` means a run broke
down part way through (CLI exit code 2).
"""


class PondHarvestError(Exception):
    """Base class for every error raised by this package."""


class ModelError(PondHarvestError, ValueError):
    """A parameter set violates a model invariant."""


class NonPositiveGrowth(ModelError):
    pass


class NonPositiveHarvestCapacity(ModelError):
    pass


class NegativeDiffusion(ModelError):
    pass


class InvalidInteraction(ModelError):
    """Self-limitation b[j][j] <= 0 or a negative competition coefficient."""


class SingularSymmetrizedMatrix(ModelError):
    pass


class DimensionMismatch(ModelError):
    pass


class InvalidGrid(ModelError):
    pass


class EmptyTrajectory(ModelError):
    pass


class ConfigError(PondHarvestError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigSyntaxError(ConfigError):
    pass


class UnknownKey(ConfigError):
    def __init__(self, key, line=None):
        self.key = key
        super().__init__(f"unknown key {key!r}", line)


class MissingRequiredKey(ConfigError):
    def __init__(self, key):
        self.key = key
        self.field = key.rsplit(".", 1)[-1]
        super().__init__(f"missing required key {key!r}")


class NumericalError(PondHarvestError):
    def __init__(self, message, step=None):
        self.step = step
        if step is not None:
            message = f"time step {step}: {message}"
        super().__init__(message)


class NonFiniteState(NumericalError):
    pass


class NegativeState(NonFiniteState):
    """The linearised solve undershot zero by more than the clamp allowance."""


class InnerIterationDiverged(NumericalError):
    def __init__(self, residual, iterations, step=None):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"inner iteration stopped after {iterations} solves "
            f"with residual {residual:.3e}", step)


class LinearSolveFailure(NumericalError):
    pass
