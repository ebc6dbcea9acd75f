"""Power and sample size for score tests in generalized linear models."""

__version__ = "0.1.0"

from .exceptions import ConvergenceError, DegenerateDataError, InfeasibleDesignError, ScorePowerError
from .family import Family, FamilyKind, log_pmf
from .glm_core import (
    Dataset,
    Observation,
    RestrictedFit,
    fit_restricted,
    info_contributions,
    score_confidence_interval,
    score_contribution,
    score_statistic,
)

__all__ = [
    "ConvergenceError",
    "Dataset",
    "DegenerateDataError",
    "Family",
    "FamilyKind",
    "InfeasibleDesignError",
    "Observation",
    "RestrictedFit",
    "ScorePowerError",
    "fit_restricted",
    "info_contributions",
    "log_pmf",
    "score_confidence_interval",
    "score_contribution",
    "score_statistic",
]
