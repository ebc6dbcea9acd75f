class ScorePowerError(ValueError):
    """Base class for errors raised by this package."""


class ConvergenceError(ScorePowerError):
    """An iterative fit did not meet its tolerance within the iteration budget."""


class DegenerateDataError(ScorePowerError):
    """Data or design cannot support the requested fit or statistic."""


class InfeasibleDesignError(ScorePowerError):
    """The scenario admits no finite sample size (e.g. true effect equals the null)."""
