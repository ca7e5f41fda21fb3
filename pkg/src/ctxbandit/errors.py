"""Exception hierarchy shared by the library."""


class BanditError(Exception):
    """Base class for all library errors."""


class DomainError(BanditError, ValueError):
    """An argument lies outside the domain of the operation (unknown context, empty class)."""


class ParameterError(BanditError, ValueError):
    """A numeric parameter is out of its admissible range."""


class ApplicabilityError(BanditError, ValueError):
    """A concentration bound was requested outside the regime where it holds."""


class ConvergenceError(BanditError, RuntimeError):
    """An iterative solver hit its iteration cap without reaching its target.

    ``best_value`` carries the best objective value reached before giving up.
    """

    def __init__(self, message, best_value=None):
        super().__init__(message)
        self.best_value = best_value


class NumericalError(BanditError, ArithmeticError):
    """Floating point breakdown inside a solver (e.g. an ellipsoid matrix lost definiteness)."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class EmptySetCertificate(BanditError):
    """A convex constraint f <= 0 is violated everywhere (zero subgradient with f > 0)."""


class InternalInconsistencyError(BanditError, RuntimeError):
    """A theoretically guaranteed property failed to hold; indicates a bug."""


class ConfigError(BanditError, ValueError):
    """Invalid experiment or environment configuration."""


class EpisodeError(BanditError, RuntimeError):
    """A learner failed mid-episode; ``round`` and the partial ``transcript`` are attached."""

    def __init__(self, message, round=None, transcript=None):
        super().__init__(message)
        self.round = round
        self.transcript = transcript
