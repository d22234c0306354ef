"""Exception types shared across the toolkit."""


class SpvError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(SpvError):
    """A parameter combination is invalid (bad level count, FOV too wide, ...)."""


class InvalidOrientationError(SpvError):
    """A quaternion with (near-)zero norm cannot encode an orientation."""


class InvalidRayError(SpvError):
    """A (near-)zero direction vector has no spherical coordinates."""


class ContractViolationError(SpvError):
    """Precomputed data does not match the configuration it is used with."""


class PlanningError(SpvError):
    """A trial plan cannot be built from the requested corpus/grid."""


class SchemaError(SpvError):
    """A session log record or manifest does not match the documented schema."""


class AnalysisError(SpvError):
    """Session logs cannot be analyzed as requested."""


class SingularFitError(AnalysisError):
    """A regression has no unique solution (e.g. a single distinct x value)."""
