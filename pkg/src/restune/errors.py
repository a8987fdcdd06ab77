"""Exception types shared across the package."""


class RestuneError(Exception):
    """Base class for all package-specific errors."""


class ParameterDomainError(RestuneError, ValueError):
    """A physical parameter is outside its valid domain."""


class TrajectoryInfeasibleError(RestuneError, ValueError):
    """A commanded end-effector path leaves the arm's reachable workspace."""


class DimensionError(RestuneError, ValueError):
    """Array shapes do not match the model or operation contract."""


class TrainingDivergenceError(RestuneError, RuntimeError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch, loss):
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"non-finite training loss {loss!r} at epoch {epoch}")


class SimulationError(RestuneError, RuntimeError):
    """A simulator call failed; carries the index of the failing call."""

    def __init__(self, index, cause):
        self.index = index
        super().__init__(f"simulation failed at index {index}: {cause}")


class DatasetFormatError(RestuneError, ValueError):
    """A dataset file is corrupt or has an unsupported version."""


class ModelFormatError(RestuneError, ValueError):
    """A model file is corrupt or has an unsupported version."""


class MissingArtifactError(RestuneError, FileNotFoundError):
    """A required trained model or dataset file does not exist."""


class ConfigError(RestuneError, ValueError):
    """An experiment config file is invalid or incomplete."""
