"""Two-sample binomial tests on the risk difference and their exact power.

Hypotheses are ``H0: p1 - p0 >= M`` against ``H1: p1 - p0 < M`` for the
default ``direction="lower"`` (a lower response is better), and the mirror
image for ``"upper"``.  Each test rejects at the one-sided level
``alpha / 2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.stats import binom, norm

MAX_CELLS = 100_000_000
_BISECTION_STEPS = 100


@dataclass(frozen=True)
class TwoSampleBinomialSpec:
    n1: int
    n0: int
    p1: float
    p0: float
    margin: float = 0.0
    alpha: float = 0.05
    direction: str = "lower"

    def __post_init__(self):
        for name in ("n1", "n0"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        for name in ("p1", "p0"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
        if not -1 < self.margin < 1:
            raise ValueError(f"margin must lie in (-1, 1), got {self.margin!r}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if self.direction not in ("lower", "upper"):
            raise ValueError(f"direction must be 'lower' or 'upper', got {self.direction!r}")


def _check_counts(x1, n1, x0, n0):
    x1 = np.asarray(x1, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if np.any(x1 < 0) or np.any(x1 > n1) or np.any(x0 < 0) or np.any(x0 > n0):
        raise ValueError("counts must satisfy 0 <= x <= n")
    return x1, x0


def fm_constrained_mle(x1, n1, x0, n0, margin: float):
    """Binomial MLE of ``(p1, p0)`` subject to ``p1 - p0 = margin``.

    The profile log likelihood in ``p0`` is concave on the feasible interval,
    so its derivative is bisected.  Vectorised over ``x1`` and ``x0``.
    """
    if not -1 < margin < 1:
        raise ValueError("constrained MLE requires |margin| < 1")
    x1, x0 = _check_counts(x1, n1, x0, n0)
    x1, x0 = np.broadcast_arrays(x1, x0)
    lo = np.full(x1.shape, max(0.0, -margin))
    hi = np.full(x1.shape, min(1.0, 1.0 - margin))

    def slope(p0):
        p1 = p0 + margin
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = (
                np.where(x1 > 0, x1 / p1, 0.0)
                - np.where(n1 - x1 > 0, (n1 - x1) / (1 - p1), 0.0)
                + np.where(x0 > 0, x0 / p0, 0.0)
                - np.where(n0 - x0 > 0, (n0 - x0) / (1 - p0), 0.0)
            )
        return terms

    for _ in range(_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        up = slope(mid) > 0
        lo = np.where(up, mid, lo)
        hi = np.where(up, hi, mid)
    p0 = 0.5 * (lo + hi)
    return p0 + margin, p0


def fm_score_statistic(x1, n1, x0, n0, margin: float = 0.0):
    """Risk-difference score statistic with the variance at the constrained MLE."""
    x1, x0 = _check_counts(x1, n1, x0, n0)
    t1, t0 = fm_constrained_mle(x1, n1, x0, n0, margin)
    var = t1 * (1 - t1) / n1 + t0 * (1 - t0) / n0
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (x1 / n1 - x0 / n0 - margin) / np.sqrt(var)
    return z[()] if np.ndim(z) == 0 else z


class WaldStatistics(NamedTuple):
    z_diff: np.ndarray
    z_logodds: np.ndarray
    boundary: np.ndarray


def wald_statistics(x1, n1, x0, n0, margin: float = 0.0) -> WaldStatistics:
    """Wald statistics on the identity and logit scales.

    ``boundary`` flags tables with an estimated proportion of 0 or 1.  There
    the identity-scale statistic is NaN when both arms are on the boundary,
    and the log odds ratio form is NaN (or +/-inf when its numerator is
    infinite and finite-signed).  The log odds ratio form tests a zero
    difference only, and is NaN for a nonzero margin.
    """
    x1, x0 = _check_counts(x1, n1, x0, n0)
    h1, h0 = x1 / n1, x0 / n0
    boundary = (h1 == 0) | (h1 == 1) | (h0 == 0) | (h0 == 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        var = h1 * (1 - h1) / n1 + h0 * (1 - h0) / n0
        zd = np.where(var > 0, (h1 - h0 - margin) / np.sqrt(var), np.nan)
        if margin == 0:
            lor = (np.log(h1) - np.log1p(-h1)) - (np.log(h0) - np.log1p(-h0))
            se = np.sqrt(1 / (n1 * h1 * (1 - h1)) + 1 / (n0 * h0 * (1 - h0)))
            zl = np.where(np.isfinite(se), lor / se, np.where(np.isinf(lor), lor, np.nan))
        else:
            zl = np.full(np.shape(h1), np.nan)
    return WaldStatistics(zd, zl, boundary)


def _reject_wald(stats: WaldStatistics, statistic: str, h1, h0, crit, sign, convention):
    z = stats.z_diff if statistic == "wald" else stats.z_logodds
    finite = np.isfinite(z)
    rej = finite & (sign * z >= crit)
    if convention == "directional":
        # undefined statistic: reject only if the estimate is infinitely
        # favourable, i.e. one arm on the favourable boundary and the other interior
        interior1 = (h1 > 0) & (h1 < 1)
        interior0 = (h0 > 0) & (h0 < 1)
        if sign < 0:
            fav = ((h1 == 0) & interior0) | ((h0 == 1) & interior1)
        else:
            fav = ((h1 == 1) & interior0) | ((h0 == 0) & interior1)
        rej |= ~finite & fav
    elif convention != "nonreject":
        raise ValueError("convention must be 'directional' or 'nonreject'")
    return rej


def exact_power(spec: TwoSampleBinomialSpec, statistic: str = "score", *, convention: str = "directional") -> float:
    """Rejection probability by enumerating every ``(x1, x0)`` table.

    ``statistic`` is ``"score"``, ``"wald"`` or ``"wald2"`` (log odds ratio,
    zero margin only).  ``convention`` governs tables where a Wald statistic
    is undefined; see :func:`wald_statistics`.
    """
    cells = (spec.n1 + 1) * (spec.n0 + 1)
    if cells > MAX_CELLS:
        raise ValueError(f"enumeration of {cells} tables exceeds the limit of {MAX_CELLS}")
    if statistic == "wald2" and spec.margin != 0:
        raise ValueError("the log odds ratio Wald test is defined for margin 0 only")
    x1 = np.arange(spec.n1 + 1, dtype=float)[:, None]
    x0 = np.arange(spec.n0 + 1, dtype=float)[None, :]
    prob = binom.pmf(x1, spec.n1, spec.p1) * binom.pmf(x0, spec.n0, spec.p0)
    crit = float(norm.ppf(1 - spec.alpha / 2))
    # lower direction rejects for Z <= -crit; flip the sign so both cases read sign*Z >= crit
    sign = -1.0 if spec.direction == "lower" else 1.0
    if statistic == "score":
        z = fm_score_statistic(x1, spec.n1, x0, spec.n0, spec.margin)
        rej = np.isfinite(z) & (sign * z >= crit)
    elif statistic in ("wald", "wald2"):
        stats = wald_statistics(x1, spec.n1, x0, spec.n0, spec.margin)
        x1b, x0b = np.broadcast_arrays(x1, x0)
        rej = _reject_wald(stats, statistic, x1b / spec.n1, x0b / spec.n0, crit, sign, convention)
    else:
        raise ValueError("statistic must be 'score', 'wald' or 'wald2'")
    return float(np.sum(prob[rej]))


def enumeration_total(spec: TwoSampleBinomialSpec) -> float:
    """Sum of the table probabilities (1 up to rounding)."""
    x1 = np.arange(spec.n1 + 1)[:, None]
    x0 = np.arange(spec.n0 + 1)[None, :]
    return float(np.sum(binom.pmf(x1, spec.n1, spec.p1) * binom.pmf(x0, spec.n0, spec.p0)))
