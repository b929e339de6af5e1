"""Exception types shared across the package."""


class RegenbootError(Exception):
    """Base class for all regenboot errors."""


class ArgumentError(RegenbootError, ValueError):
    """Invalid argument, configuration, or model specification."""


class NumericError(RegenbootError, RuntimeError):
    """Non-finite or degenerate numeric result."""


class MinorizationError(RegenbootError, ValueError):
    """A splitting success probability exceeded 1 beyond float noise."""


class ImpossibleTransitionError(RegenbootError, ValueError):
    """The (estimated or true) transition density vanished at an observed pair."""


class NoBlocksError(RegenbootError, ValueError):
    """An operation requiring regenerative blocks received an empty decomposition."""


class InsufficientRepsError(ArgumentError):
    """Too few bootstrap replications for the requested quantile level."""


class DegenerateStudentizerError(NumericError):
    """A studentizing standard deviation fell below the configured floor."""
