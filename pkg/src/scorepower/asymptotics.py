"""Asymptotic mean and variances of the score statistic, and the power and
sample-size formulas built on them.

Three methods are offered:

``new``
    uses both the null variance ``sigma0_sq`` and the alternative variance
    ``sigma1_sq``;
``sm``
    uses ``sigma1_sq`` only (the noncentral chi-squared approximation);
``s0``
    uses ``sigma0_sq`` only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .exceptions import DegenerateDataError, InfeasibleDesignError
from .exemplary import ExemplaryDataset
from .family import Family
from .glm_core import (
    RestrictedFit,
    fit_restricted,
    null_variance,
    observed_info_contribution,
    score_contribution,
)


class Method(str, enum.Enum):
    NEW = "new"
    SM = "sm"
    S0 = "s0"


class Sidedness(str, enum.Enum):
    TWO_SIDED = "two_sided"
    ONE_SIDED = "one_sided"


METHODS = (Method.NEW, Method.SM, Method.S0)


@dataclass(frozen=True, eq=False)
class AsymptoticSummary:
    """Per-subject moments of the score for ``beta`` at the limiting restricted fit.

    ``score_mean``, ``score_cov`` and ``info_tilde`` are the full aggregates
    (``beta`` first, then the nuisance parameters); they are kept for
    diagnostics.
    """

    e_beta: float
    sigma0_sq: float
    sigma1_sq: float
    lambda_star: RestrictedFit | None = None
    score_mean: np.ndarray | None = field(default=None, repr=False)
    score_cov: np.ndarray | None = field(default=None, repr=False)
    info_tilde: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if not (self.sigma0_sq > 0 and self.sigma1_sq > 0):
            raise DegenerateDataError("score variances must be positive")

    @property
    def sigma0(self) -> float:
        return math.sqrt(self.sigma0_sq)

    @property
    def sigma1(self) -> float:
        return math.sqrt(self.sigma1_sq)

    def as_dict(self) -> dict:
        out = {"e_beta": self.e_beta, "sigma0_sq": self.sigma0_sq, "sigma1_sq": self.sigma1_sq}
        if self.lambda_star is not None:
            out["alpha_star"] = self.lambda_star.alpha_hat.tolist()
            out["kappa_star"] = self.lambda_star.kappa_hat
        return out


def summarize(
    exemplary: ExemplaryDataset,
    family: Family,
    beta0: float,
    true_params=None,
    *,
    variance: str = "conditional",
    fit: RestrictedFit | None = None,
) -> AsymptoticSummary:
    """Limiting moments of the score statistic from an exemplary dataset.

    The exemplary weights already encode the true model, so ``true_params``
    is accepted only for symmetry with :func:`exemplary.build_exemplary`.

    ``variance`` selects how covariate configurations enter the score
    covariance:

    ``"conditional"``
        configurations are fixed by design; ``V`` is the weighted average of
        the within-configuration covariances.
    ``"marginal"``
        configurations are sampled with the subjects; ``V`` is the total
        covariance over all exemplary rows.
    """
    del true_params
    data = exemplary.data
    total = float(data.weight.sum())
    if not total > 0:
        raise DegenerateDataError("exemplary weights sum to zero")
    if fit is None:
        fit = fit_restricted(data, family, beta0)
    params = fit.params
    w = data.weight / total

    scores = score_contribution(family, data, params)
    e = w @ scores
    second = (scores * w[:, None]).T @ scores
    if variance == "marginal":
        cov = second - np.outer(e, e)
    elif variance == "conditional":
        cov = second.copy()
        idx = exemplary.config_index
        for k in np.unique(idx):
            sel = idx == k
            pk = w[sel].sum()
            if pk > 0:
                ek = w[sel] @ scores[sel] / pk
                cov -= pk * np.outer(ek, ek)
    else:
        raise ValueError("variance must be 'conditional' or 'marginal'")

    info_tilde = np.einsum("n,nij->ij", w, observed_info_contribution(family, data, params))
    try:
        proj = np.linalg.solve(info_tilde[1:, 1:], info_tilde[1:, 0])
    except np.linalg.LinAlgError as exc:
        raise DegenerateDataError("nuisance block of the information is singular") from exc
    a = np.concatenate(([1.0], -proj))
    sigma1_sq = float(a @ cov @ a)

    scaled = data.with_weights(w)
    sigma0_sq = null_variance(family, scaled, fit)
    return AsymptoticSummary(float(e[0]), sigma0_sq, sigma1_sq, fit, e, cov, info_tilde)


def _critical(alpha: float, sidedness) -> float:
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    side = Sidedness(sidedness)
    return float(norm.ppf(1 - alpha / 2)) if side is Sidedness.TWO_SIDED else float(norm.ppf(1 - alpha))


def _sigmas(summary: AsymptoticSummary, method) -> tuple[float, float]:
    m = Method(method)
    if m is Method.NEW:
        return summary.sigma0, summary.sigma1
    if m is Method.SM:
        return summary.sigma1, summary.sigma1
    return summary.sigma0, summary.sigma0


def power_at(
    summary: AsymptoticSummary,
    n: float,
    alpha: float = 0.05,
    method=Method.NEW,
    sidedness=Sidedness.TWO_SIDED,
) -> float:
    """Nominal power of the score test with ``n`` subjects."""
    if not n > 0:
        raise ValueError("n must be positive")
    z = _critical(alpha, sidedness)
    s_null, s_alt = _sigmas(summary, method)
    return float(norm.cdf((math.sqrt(n) * abs(summary.e_beta) - z * s_null) / s_alt))


def sample_size_real(
    summary: AsymptoticSummary,
    alpha: float = 0.05,
    target_power: float = 0.8,
    method=Method.NEW,
    sidedness=Sidedness.TWO_SIDED,
) -> float:
    """Unrounded total sample size."""
    if not 0 < target_power < 1:
        raise ValueError("target_power must lie in (0, 1)")
    if summary.e_beta == 0:
        raise InfeasibleDesignError("expected score is zero; no finite sample size")
    z = _critical(alpha, sidedness)
    zp = float(norm.ppf(target_power))
    s_null, s_alt = _sigmas(summary, method)
    return (z * s_null + zp * s_alt) ** 2 / summary.e_beta**2


def sample_size(
    summary: AsymptoticSummary,
    alpha: float = 0.05,
    target_power: float = 0.8,
    method=Method.NEW,
    sidedness=Sidedness.TWO_SIDED,
    *,
    rounding: str = "total",
    theta: float = 1.0,
) -> int:
    """Total sample size reaching ``target_power``.

    ``rounding="total"`` takes the ceiling of the total.  ``"per_arm"``
    rounds the control arm up first and sets the treated arm to
    ``ceil(theta * n0)``.
    """
    real = sample_size_real(summary, alpha, target_power, method, sidedness)
    if rounding == "total":
        return max(1, math.ceil(real))
    if rounding == "per_arm":
        n0 = math.ceil(real / (1 + theta))
        return n0 + math.ceil(theta * n0)
    raise ValueError("rounding must be 'total' or 'per_arm'")


@dataclass(frozen=True, eq=False)
class DesignResult:
    """Sample sizes by method, and nominal powers at ``n_query``."""

    n_new: int
    n_sm: int
    n_s0: int
    power: dict
    n_query: int
    summary: AsymptoticSummary
    alpha: float
    target_power: float
    sidedness: Sidedness = Sidedness.TWO_SIDED
    comparators: dict = field(default_factory=dict)

    def sizes(self) -> dict:
        return {"new": self.n_new, "sm": self.n_sm, "s0": self.n_s0, **self.comparators}

    def as_dict(self) -> dict:
        return {
            "n_new": self.n_new,
            "n_sm": self.n_sm,
            "n_s0": self.n_s0,
            "n_query": self.n_query,
            "power": dict(self.power),
            "comparators": dict(self.comparators),
            "alpha": self.alpha,
            "target_power": self.target_power,
            "sidedness": Sidedness(self.sidedness).value,
            "summary": self.summary.as_dict(),
        }


def design(
    summary: AsymptoticSummary,
    alpha: float = 0.05,
    target_power: float = 0.8,
    sidedness=Sidedness.TWO_SIDED,
    *,
    n_query: int | None = None,
    rounding: str = "total",
    theta: float = 1.0,
) -> DesignResult:
    """Sample sizes for every method plus powers at ``n_query`` (default ``n_new``)."""
    sizes = {m.value: sample_size(summary, alpha, target_power, m, sidedness, rounding=rounding, theta=theta) for m in METHODS}
    nq = sizes["new"] if n_query is None else int(n_query)
    powers = {m.value: power_at(summary, nq, alpha, m, sidedness) for m in METHODS}
    return DesignResult(sizes["new"], sizes["sm"], sizes["s0"], powers, nq, summary, alpha, target_power, Sidedness(sidedness))
