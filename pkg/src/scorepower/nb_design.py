"""Negative binomial rate comparisons: superiority and noninferiority designs.

The treatment effect is ``beta = log(lambda1 / lambda0)`` and the null value
is ``beta0 = log(M0)`` with ``M0 = 1`` for superiority.  Lower event rates
are better, so the one-sided noninferiority test rejects for
``Z <= -z_{1 - alpha/2}``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import norm

from .asymptotics import AsymptoticSummary, DesignResult, Sidedness, design, summarize
from .exceptions import DegenerateDataError, InfeasibleDesignError
from .exemplary import (
    CovariateConfig,
    ExemplaryDataset,
    FollowupGrid,
    build_exemplary,
    discretize_followup,
    mean_followup,
)
from .family import Family
from .glm_core import Dataset, RestrictedFit, fit_restricted


@dataclass(frozen=True)
class NbTrialSpec:
    """Two-arm negative binomial trial.

    ``dropout`` is the probability of leaving before ``tau_c`` under
    exponential loss to follow-up; ``dropout_treated`` overrides it for the
    treated arm.  ``theta`` is the allocation ratio ``n1 / n0``.
    """

    lambda0: float
    rate_ratio: float
    kappa: float
    tau_c: float
    dropout: float = 0.0
    margin: float = 1.0
    theta: float = 1.0
    alpha: float = 0.05
    target_power: float = 0.8
    dropout_treated: float | None = None
    L: int = 100
    J: int = 200
    variance: str = "marginal"
    rounding: str = "total"

    def __post_init__(self):
        positive = ("lambda0", "rate_ratio", "tau_c", "margin", "theta")
        for name in positive:
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive number, got {v!r}")
        if not (math.isfinite(self.kappa) and self.kappa >= 0):
            raise ValueError(f"kappa must be a nonnegative number, got {self.kappa!r}")
        for name in ("dropout", "dropout_treated"):
            v = getattr(self, name)
            if v is not None and not 0 <= v < 1:
                raise ValueError(f"{name} must lie in [0, 1), got {v!r}")
        for name in ("alpha", "target_power"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v!r}")
        if self.margin < 1:
            raise ValueError(f"margin must be at least 1, got {self.margin!r}")
        if self.L < 2:
            raise ValueError(f"L must be at least 2, got {self.L!r}")
        if self.J < 2:
            raise ValueError(f"J must be at least 2, got {self.J!r}")
        if self.variance not in ("marginal", "conditional"):
            raise ValueError(f"variance must be 'marginal' or 'conditional', got {self.variance!r}")
        if self.rounding not in ("total", "per_arm"):
            raise ValueError(f"rounding must be 'total' or 'per_arm', got {self.rounding!r}")

    @property
    def lambda1(self) -> float:
        return self.lambda0 * self.rate_ratio

    @property
    def beta_true(self) -> float:
        return math.log(self.rate_ratio)

    @property
    def beta0(self) -> float:
        return math.log(self.margin)

    def arm_dropout(self, arm: int) -> float:
        if arm == 1 and self.dropout_treated is not None:
            return self.dropout_treated
        return self.dropout

    def followup_grid(self, arm: int) -> FollowupGrid:
        return discretize_followup(self.arm_dropout(arm), self.tau_c, self.L)

    def mean_followup(self, arm: int) -> float:
        return mean_followup(self.arm_dropout(arm), self.tau_c)

    def arm_fraction(self, arm: int) -> float:
        return self.theta / (1 + self.theta) if arm == 1 else 1 / (1 + self.theta)

    def check_feasible(self) -> None:
        if self.margin == 1.0 and self.rate_ratio == 1.0:
            raise InfeasibleDesignError("rate_ratio equals the margin; no finite sample size")
        if self.margin > 1.0 and self.rate_ratio >= self.margin:
            raise InfeasibleDesignError(
                f"rate_ratio={self.rate_ratio} must be below margin={self.margin} for a noninferiority design"
            )

    def to_dict(self) -> dict:
        return asdict(self)


def nb_configs(spec: NbTrialSpec) -> list[CovariateConfig]:
    """Treatment arm by follow-up atom; covariates ``z = (1,)``, offset ``log t``."""
    configs = []
    for arm in (1, 0):
        grid = spec.followup_grid(arm)
        share = spec.arm_fraction(arm)
        for t, p in grid.atoms:
            configs.append(CovariateConfig(arm, (1.0,), math.log(t), share * p))
    # guard against rounding drift in the frequencies
    total = sum(c.pi for c in configs)
    if abs(total - 1.0) > 1e-12:
        configs = [CovariateConfig(c.x, c.z, c.offset_base, c.pi / total) for c in configs]
    return configs


def nb_exemplary(spec: NbTrialSpec) -> ExemplaryDataset:
    truth = [spec.beta_true, math.log(spec.lambda0), spec.kappa]
    return build_exemplary(nb_configs(spec), Family.negbin(spec.kappa), truth, J=spec.J)


def nb_summary(spec: NbTrialSpec) -> AsymptoticSummary:
    ex = nb_exemplary(spec)
    return summarize(ex, Family.negbin(spec.kappa), spec.beta0, variance=spec.variance)


def nb_design(spec: NbTrialSpec, n_query: int | None = None) -> DesignResult:
    """Sample sizes and nominal powers for the score test, plus the Zhu-Lakkis comparator."""
    spec.check_feasible()
    summary = nb_summary(spec)
    res = design(
        summary,
        spec.alpha,
        spec.target_power,
        Sidedness.TWO_SIDED,
        n_query=n_query,
        rounding=spec.rounding,
        theta=spec.theta,
    )
    zl = zhu_lakkis_size(spec)
    res.comparators["zhu_lakkis"] = zl
    res.power["zhu_lakkis"] = zhu_lakkis_power(spec, res.n_query)
    return res


# ----------------------------------------------------------------------
# equal follow-up closed forms


def moments_kappa_star(mu0: float, mu1: float, theta: float, kappa: float) -> tuple[float, float]:
    """Moment-based limits of the pooled mean and dispersion under a superiority null.

    Returns ``(mu_bar, kappa_star)``; ``kappa_star`` matches the average
    squared deviation from the pooled mean to the NB variance function.
    """
    if mu0 <= 0 or mu1 <= 0 or theta <= 0 or kappa < 0:
        raise ValueError("means and theta must be positive, kappa nonnegative")
    mu_bar = (theta * mu1 + mu0) / (theta + 1)
    k_star = kappa * (theta * mu1**2 + mu0**2) / ((theta + 1) * mu_bar**2) + theta * (mu1 - mu0) ** 2 / (
        (theta + 1) ** 2 * mu_bar**2
    )
    return mu_bar, k_star


def _common_followup(spec: NbTrialSpec) -> float:
    if spec.arm_dropout(0) != 0 or spec.arm_dropout(1) != 0:
        raise ValueError("equal follow-up formulas require dropout = 0 in both arms")
    return spec.tau_c


def nb_size_equal_followup_real(spec: NbTrialSpec, source: str = "exemplary") -> float:
    """Unrounded control-arm size from the equal follow-up closed form.

    ``source="exemplary"`` takes the null limits of the means and dispersion
    from the restricted fit to the exemplary dataset; ``"moments"`` uses
    :func:`moments_kappa_star` (superiority only).  The null variance of the
    treated-minus-scaled-control mean difference carries ``M0**2`` on the
    control term.
    """
    t = _common_followup(spec)
    mu0, mu1 = spec.lambda0 * t, spec.lambda1 * t
    m0, th = spec.margin, spec.theta
    if mu1 == m0 * mu0:
        raise InfeasibleDesignError("mu1 equals M0 * mu0; the closed form divides by zero")
    if source == "moments":
        if m0 != 1.0:
            raise ValueError("moment-based limits apply to superiority designs only")
        mu_bar, k_star = moments_kappa_star(mu0, mu1, th, spec.kappa)
        s0, s1, ks = mu_bar, mu_bar, k_star
    elif source == "exemplary":
        fit = nb_summary(spec).lambda_star
        s0 = math.exp(fit.alpha_hat[0]) * t
        s1 = m0 * s0
        ks = fit.kappa_hat
    else:
        raise ValueError("source must be 'exemplary' or 'moments'")
    za = float(norm.ppf(1 - spec.alpha / 2))
    zp = float(norm.ppf(spec.target_power))
    v_null = (s1 + ks * s1**2) / th + m0**2 * (s0 + ks * s0**2)
    v_alt = (mu1 + spec.kappa * mu1**2) / th + m0**2 * (mu0 + spec.kappa * mu0**2)
    return (za * math.sqrt(v_null) + zp * math.sqrt(v_alt)) ** 2 / (mu1 - m0 * mu0) ** 2


def nb_size_equal_followup(spec: NbTrialSpec, source: str = "exemplary") -> int:
    """Control-arm size (ceiling) from the equal follow-up closed form."""
    return math.ceil(nb_size_equal_followup_real(spec, source))


# ----------------------------------------------------------------------
# Zhu-Lakkis comparator


def _zl_means(spec: NbTrialSpec) -> tuple[float, float, float, float]:
    """True and null-restricted means at the average exposure."""
    tbar0, tbar1 = spec.mean_followup(0), spec.mean_followup(1)
    mu0, mu1 = spec.lambda0 * tbar0, spec.lambda1 * tbar1
    m0, th, k = spec.margin, spec.theta, spec.kappa
    a = -k * m0 * (1 + th)
    b = k * (mu0 * m0 + th * mu1) - (1 + th * m0)
    c = mu0 + th * mu1
    if a == 0:
        r0 = -c / b
    else:
        disc = b * b - 4 * a * c
        assert disc >= 0, "negative discriminant"
        r0 = (-b - math.sqrt(disc)) / (2 * a)
    return mu0, mu1, r0, m0 * r0


def _zl_terms(spec: NbTrialSpec) -> tuple[float, float, float]:
    mu0, mu1, r0, r1 = _zl_means(spec)
    th, k = spec.theta, spec.kappa
    v0 = 1 / r0 + 1 / (th * r1) + (1 + th) / th * k
    v1 = 1 / mu0 + 1 / (th * mu1) + (1 + th) / th * k
    effect = math.log(mu1 / mu0) - math.log(spec.margin)
    return v0, v1, effect


def zhu_lakkis_n0(spec: NbTrialSpec) -> float:
    """Unrounded control-arm size for the log rate-ratio statistic."""
    v0, v1, effect = _zl_terms(spec)
    if effect == 0:
        raise InfeasibleDesignError("true rate ratio equals the margin")
    za = float(norm.ppf(1 - spec.alpha / 2))
    zp = float(norm.ppf(spec.target_power))
    return (za * math.sqrt(v0) + zp * math.sqrt(v1)) ** 2 / effect**2


def zhu_lakkis_size(spec: NbTrialSpec) -> int:
    """Total size, the ceiling of ``n0 * (1 + theta)``."""
    return math.ceil(zhu_lakkis_n0(spec) * (1 + spec.theta))


def zhu_lakkis_power(spec: NbTrialSpec, n_total: float) -> float:
    """Nominal power of the log rate-ratio statistic with ``n_total`` subjects."""
    v0, v1, effect = _zl_terms(spec)
    n0 = n_total / (1 + spec.theta)
    za = float(norm.ppf(1 - spec.alpha / 2))
    return float(norm.cdf((math.sqrt(n0) * abs(effect) - za * math.sqrt(v0)) / math.sqrt(v1)))


# ----------------------------------------------------------------------
# test statistics on trial data


def trial_dataset(g, t, y) -> Dataset:
    g = np.asarray(g, dtype=float)
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if g.shape != t.shape or g.shape != y.shape:
        raise ValueError("g, t and y must have the same length")
    if np.any(t <= 0):
        raise ValueError("follow-up times must be positive")
    if not (np.any(g == 1) and np.any(g == 0)) or np.any((g != 0) & (g != 1)):
        raise ValueError("g must be 0/1 with both arms present")
    return Dataset(g, np.ones((g.size, 1)), np.log(t), y, 1.0)


def nb_score_test(g, t, y, margin: float = 1.0, *, fit: RestrictedFit | None = None) -> float:
    """Score statistic for ``lambda1 / lambda0 = margin`` from per-subject data.

    Computed from the restricted fit as the treated-arm sum of
    ``(y - mu) / (1 + kappa mu)`` over ``sqrt(d0 d1 / (d0 + d1))`` with
    ``d_g`` the arm totals of ``mu / (1 + kappa mu)``.
    """
    data = trial_dataset(g, t, y)
    if not np.any(data.y > 0):
        raise DegenerateDataError("no events observed")
    beta0 = math.log(margin)
    if fit is None:
        fit = fit_restricted(data, Family.negbin(0.0), beta0)
    k = fit.kappa_hat
    mu = np.exp(fit.alpha_hat[0] + beta0 * data.x + data.offset)
    wmu = mu / (1 + k * mu)
    treated = data.x == 1
    num = float(np.sum((data.y[treated] - mu[treated]) / (1 + k * mu[treated])))
    d1, d0 = float(wmu[treated].sum()), float(wmu[~treated].sum())
    return num / math.sqrt(d0 * d1 / (d0 + d1))


def equal_followup_statistic(y1, y0, margin: float, mu0_hat: float, kappa_hat: float) -> float:
    """Difference-of-means form of the score statistic for a common follow-up.

    ``mu0_hat`` and ``kappa_hat`` are the restricted estimates; the treated
    null mean is ``margin * mu0_hat``.
    """
    y1 = np.asarray(y1, dtype=float)
    y0 = np.asarray(y0, dtype=float)
    n1, n0 = y1.size, y0.size
    m1 = margin * mu0_hat
    var = (m1 + kappa_hat * m1**2) / n1 + margin**2 * (mu0_hat + kappa_hat * mu0_hat**2) / n0
    return float((y1.mean() - margin * y0.mean()) / math.sqrt(var))
