"""Stratified two-group comparison of binary outcomes under a logistic model.

The response probability in stratum ``s`` for group ``g`` is
``expit(alpha0 + alpha_s + beta * g)`` with ``alpha_1 = 0``.  The score test
of ``beta = 0`` adjusting for strata is the Cochran statistic, and its
asymptotic moments have simple closed forms in the stratum fractions,
within-stratum allocation and response rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit, logit

from .asymptotics import AsymptoticSummary, DesignResult, Sidedness, design
from .exceptions import DegenerateDataError
from .exemplary import CovariateConfig, ExemplaryDataset, build_exemplary
from .family import Family


@dataclass(frozen=True)
class StratumSpec:
    """Stratum share ``t``, treated fraction ``rho`` and true response rates."""

    t: float
    rho: float
    p1: float
    p0: float

    def __post_init__(self):
        for name in ("t", "rho", "p1", "p0"):
            v = getattr(self, name)
            if not 0 < v <= 1 or (name != "t" and v >= 1):
                raise ValueError(f"{name} must lie in (0, 1), got {v!r}")

    @property
    def p_star(self) -> float:
        return self.rho * self.p1 + (1 - self.rho) * self.p0


@dataclass(frozen=True)
class LogisticScenario:
    """Population layout and effect sizes for a stratified binary design.

    ``cells[g][s]`` is the population share of group ``g`` in stratum ``s``.
    ``alpha_strata`` holds the stratum log odds ratios relative to stratum 1
    (its first entry must be 0).  ``beta`` is the treatment log odds ratio and
    ``mean_rate`` the overall response rate used to solve for ``alpha0``.
    With ``stratified=False`` the analysis ignores strata and the test
    compares pooled group proportions.
    """

    cells: tuple
    alpha_strata: tuple
    beta: float
    mean_rate: float
    stratified: bool = True

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=float)
        if cells.ndim != 2 or cells.shape[0] != 2:
            raise ValueError("cells must have shape (2, S)")
        if np.any(cells < 0) or abs(cells.sum() - 1.0) > 1e-12:
            raise ValueError("cells must be nonnegative and sum to 1")
        a = np.atleast_1d(np.asarray(self.alpha_strata, dtype=float))
        if a.size != cells.shape[1]:
            raise ValueError("alpha_strata must have one entry per stratum")
        if a[0] != 0:
            raise ValueError("alpha_strata[0] must be 0 (reference stratum)")
        if not 0 < self.mean_rate < 1:
            raise ValueError(f"mean_rate must lie in (0, 1), got {self.mean_rate!r}")
        if not math.isfinite(self.beta):
            raise ValueError("beta must be finite")
        object.__setattr__(self, "cells", tuple(map(tuple, cells.tolist())))
        object.__setattr__(self, "alpha_strata", tuple(a.tolist()))

    @classmethod
    def from_four_cells(
        cls, pi, or_stratum: float, or_treatment: float, mean_rate: float, stratified: bool = True
    ) -> "LogisticScenario":
        """Two strata with cell shares ordered (g, z) = (0,1), (0,2), (1,1), (1,2)."""
        p = list(pi)
        if len(p) != 4:
            raise ValueError("pi must have four entries")
        return cls(((p[0], p[1]), (p[2], p[3])), (0.0, math.log(or_stratum)), math.log(or_treatment), mean_rate, stratified)

    @property
    def n_strata(self) -> int:
        return len(self.alpha_strata)

    @property
    def cell_array(self) -> np.ndarray:
        return np.asarray(self.cells, dtype=float)

    def response_probs(self, alpha0: float) -> np.ndarray:
        """Array ``[g, s]`` of true response probabilities."""
        a = np.asarray(self.alpha_strata)
        return expit(alpha0 + a[None, :] + self.beta * np.array([[0.0], [1.0]]))

    def overall_rate(self, alpha0: float) -> float:
        return float(np.sum(self.cell_array * self.response_probs(alpha0)))


def solve_alpha0(scenario: LogisticScenario, xtol: float = 1e-14) -> float:
    """Intercept reproducing the overall response rate.

    The overall rate is increasing in ``alpha0`` and spans (0, 1), so a
    bracket is found by doubling and refined with Brent's method.
    """
    target = scenario.mean_rate

    def f(a0):
        return scenario.overall_rate(a0) - target

    lo, hi = -1.0, 1.0
    while f(lo) > 0:
        lo *= 2
        if lo < -1e3:
            raise ValueError("mean_rate is below the achievable range")
    while f(hi) < 0:
        hi *= 2
        if hi > 1e3:
            raise ValueError("mean_rate is above the achievable range")
    a0 = brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500)
    if abs(f(a0)) > 1e-10:
        raise ValueError("could not match mean_rate to 1e-10")
    return float(a0)


def strata_from_scenario(scenario: LogisticScenario, alpha0: float | None = None) -> list[StratumSpec]:
    """Per-stratum (t, rho, p1, p0); a single pooled stratum when unstratified."""
    if alpha0 is None:
        alpha0 = solve_alpha0(scenario)
    cells = scenario.cell_array
    probs = scenario.response_probs(alpha0)
    if not scenario.stratified:
        n1, n0 = cells[1].sum(), cells[0].sum()
        p1 = float(np.dot(cells[1], probs[1]) / n1)
        p0 = float(np.dot(cells[0], probs[0]) / n0)
        return [StratumSpec(1.0, float(n1), p1, p0)]
    out = []
    for s in range(scenario.n_strata):
        t = cells[0, s] + cells[1, s]
        if t == 0:
            continue
        # shares normalised in floating point can sum a hair above 1
        out.append(StratumSpec(min(float(t), 1.0), float(cells[1, s] / t), float(probs[1, s]), float(probs[0, s])))
    return out


def stratified_summary(strata: Sequence[StratumSpec]) -> AsymptoticSummary:
    """Closed-form mean and variances of the per-subject Cochran numerator."""
    t = np.array([s.t for s in strata])
    if abs(t.sum() - 1.0) > 1e-12:
        raise ValueError("stratum shares must sum to 1")
    rho = np.array([s.rho for s in strata])
    p1 = np.array([s.p1 for s in strata])
    p0 = np.array([s.p0 for s in strata])
    ps = rho * p1 + (1 - rho) * p0
    c = t * rho * (1 - rho)
    e = float(np.sum(c * (p1 - p0)))
    s0 = float(np.sum(c * ps * (1 - ps)))
    s1 = float(np.sum(c * ((1 - rho) * p1 * (1 - p1) + rho * p0 * (1 - p0))))
    return AsymptoticSummary(e, s0, s1)


@dataclass(frozen=True, eq=False)
class LogisticDesign:
    """Design result together with the solved intercept and strata."""

    alpha0: float
    strata: list
    result: DesignResult = field(repr=False)

    def as_dict(self) -> dict:
        return {"alpha0": self.alpha0, **self.result.as_dict()}


def logistic_design(
    scenario: LogisticScenario,
    alpha: float = 0.05,
    target_power: float = 0.8,
    n_query: int | None = None,
) -> LogisticDesign:
    a0 = solve_alpha0(scenario)
    strata = strata_from_scenario(scenario, a0)
    summary = stratified_summary(strata)
    res = design(summary, alpha, target_power, Sidedness.TWO_SIDED, n_query=n_query)
    return LogisticDesign(a0, strata, res)


def logistic_exemplary(scenario: LogisticScenario, alpha0: float | None = None):
    """Exemplary dataset for the generic engine.

    Returns ``(exemplary, family, true_params)``.  For a stratified analysis
    the nuisance design is an intercept plus stratum indicators; otherwise it
    is an intercept only and each arm is one configuration with its pooled
    response rate.
    """
    if alpha0 is None:
        alpha0 = solve_alpha0(scenario)
    fam = Family.bernoulli()
    cells = scenario.cell_array
    if scenario.stratified:
        S = scenario.n_strata
        configs = []
        for g in (0, 1):
            for s in range(S):
                z = np.zeros(S)
                z[0] = 1.0
                if s > 0:
                    z[s] = 1.0
                configs.append(CovariateConfig(g, tuple(z), 0.0, float(cells[g, s])))
        truth = np.concatenate(([scenario.beta, alpha0], scenario.alpha_strata[1:]))
    else:
        (st,) = strata_from_scenario(scenario, alpha0)
        configs = [CovariateConfig(0, (1.0,), 0.0, 1 - st.rho), CovariateConfig(1, (1.0,), 0.0, st.rho)]
        truth = np.array([logit(st.p1) - logit(st.p0), logit(st.p0)])
    configs = [c for c in configs if c.pi > 0]
    return build_exemplary(configs, fam, truth), fam, truth


def cochran_score_statistic(x1, n1, x0, n0) -> float:
    """Stratified score statistic for a common odds ratio of 1.

    Arguments are per-stratum counts of responders and subjects in the
    treated (1) and control (0) groups.
    """
    x1, n1, x0, n0 = (np.atleast_1d(np.asarray(v, dtype=float)) for v in (x1, n1, x0, n0))
    if np.any(n1 < 0) or np.any(n0 < 0) or np.any(x1 > n1) or np.any(x0 > n0) or np.any(x1 < 0) or np.any(x0 < 0):
        raise ValueError("counts must satisfy 0 <= x <= n")
    n = n1 + n0
    keep = (n1 > 0) & (n0 > 0)
    if not np.any(keep):
        raise DegenerateDataError("no stratum contains both groups")
    x1, n1, x0, n0, n = x1[keep], n1[keep], x0[keep], n0[keep], n[keep]
    h = n1 * n0 / n
    pbar = (x0 + x1) / n
    num = float(np.sum(h * (x1 / n1 - x0 / n0)))
    den = float(np.sum(h * pbar * (1 - pbar)))
    if not den > 0:
        raise DegenerateDataError("all outcomes identical within every stratum")
    return num / math.sqrt(den)
