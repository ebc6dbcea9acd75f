"""Weighted exemplary datasets.

An exemplary dataset lists every (covariate configuration, outcome value)
pair once, weighted by its probability under the true model.  Fitting the
null model to it gives the limiting nuisance values, and weighted sums over
it give the population moments of the score.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .family import Family
from .glm_core import Dataset, Observation

DEFAULT_J_CAP = 200
DEFAULT_TAIL_TOL = 1e-5


@dataclass(frozen=True)
class CovariateConfig:
    """One distinct covariate pattern and its population frequency."""

    x: float
    z: tuple
    offset_base: float
    pi: float

    def __post_init__(self):
        if not (self.pi >= 0 and math.isfinite(self.pi)):
            raise ValueError(f"config frequency must be finite and nonnegative, got {self.pi!r}")
        object.__setattr__(self, "z", tuple(float(v) for v in np.atleast_1d(self.z)))


@dataclass(frozen=True, eq=False)
class FollowupGrid:
    """Discrete follow-up distribution: atoms ``times`` with masses ``probs``."""

    times: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float).ravel()
        p = np.asarray(self.probs, dtype=float).ravel()
        if t.size != p.size or t.size == 0:
            raise ValueError("times and probs must be non-empty and of equal length")
        if np.any(t <= 0):
            raise ValueError("follow-up times must be positive")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("follow-up probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "probs", p)

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.times.tolist(), self.probs.tolist()))

    def mean(self) -> float:
        return float(np.dot(self.times, self.probs))

    def __len__(self) -> int:
        return self.times.size


def dropout_rate(dropout_prob: float, tau_c: float) -> float:
    """Exponential rate with ``P(T < tau_c) = dropout_prob``."""
    return -math.log1p(-dropout_prob) / tau_c


def discretize_followup(dropout_prob: float, tau_c: float, L: int = 100, *, quantile_base: str = "dropout") -> FollowupGrid:
    """Follow-up grid under exponential loss to follow-up, truncated at ``tau_c``.

    Completers form one atom at ``tau_c`` with mass ``1 - dropout_prob``.  The
    dropouts are represented by ``L - 1`` equal-mass atoms placed at
    mid-point quantiles of the dropout-time distribution on ``(0, tau_c)``.

    ``quantile_base="completer"`` uses ``1 - dropout_prob`` as the quantile
    scale instead; those quantiles can exceed ``tau_c`` and are clipped to it.
    It is kept only for comparison.
    """
    if not 0 <= dropout_prob < 1:
        raise ValueError("dropout_prob must lie in [0, 1)")
    if not tau_c > 0:
        raise ValueError("tau_c must be positive")
    if L < 2:
        raise ValueError("L must be at least 2")
    if dropout_prob == 0:
        return FollowupGrid(np.array([tau_c]), np.array([1.0]))
    rate = dropout_rate(dropout_prob, tau_c)
    l = np.arange(1, L)
    if quantile_base == "dropout":
        scale = dropout_prob
    elif quantile_base == "completer":
        scale = 1.0 - dropout_prob
    else:
        raise ValueError("quantile_base must be 'dropout' or 'completer'")
    u = scale * (l - 0.5) / (L - 1)
    t = np.minimum(-np.log1p(-u) / rate, tau_c)
    probs = np.append(np.full(L - 1, dropout_prob / (L - 1)), 1.0 - dropout_prob)
    probs[-1] = 1.0 - probs[:-1].sum()
    return FollowupGrid(np.append(t, tau_c), probs)


def mean_followup(dropout_prob: float, tau_c: float) -> float:
    """Expected exposure ``E[min(T, tau_c)]`` under exponential dropout."""
    if dropout_prob == 0:
        return float(tau_c)
    rate = dropout_rate(dropout_prob, tau_c)
    return -math.expm1(-rate * tau_c) / rate


def _tail_mass(family: Family, mu: float, J: int) -> float:
    ys = np.arange(J, dtype=float)
    return max(0.0, 1.0 - float(np.sum(family.pmf(ys, np.full(J, mu)))))


def outcome_truncation(
    family: Family, max_mu: float, tol: float = DEFAULT_TAIL_TOL, j_cap: int = DEFAULT_J_CAP
) -> int:
    """Smallest number of outcome levels ``J`` with ``P(Y >= J) < tol`` at ``max_mu``.

    Raises ``ValueError`` when even ``j_cap`` levels leave more than ``tol``
    in the tail.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if family.is_binary:
        return 2
    if not max_mu > 0:
        raise ValueError("max_mu must be positive")
    ys = np.arange(j_cap, dtype=float)
    cdf = np.cumsum(family.pmf(ys, np.full(j_cap, float(max_mu))))
    ok = np.nonzero(1.0 - cdf < tol)[0]
    if ok.size == 0:
        raise ValueError(
            f"tail mass {1.0 - cdf[-1]:.3g} at J_cap={j_cap} exceeds tol={tol:g} for mean {max_mu:g}"
        )
    return int(ok[0]) + 1


@dataclass(frozen=True, eq=False)
class ExemplaryDataset:
    """Exemplary rows plus bookkeeping linking each row to its configuration."""

    data: Dataset
    config_index: np.ndarray
    configs: tuple
    J: int

    @property
    def m(self) -> int:
        return len(self.configs)

    @property
    def pi(self) -> np.ndarray:
        return np.array([c.pi for c in self.configs])

    @property
    def rows(self) -> list[Observation]:
        return self.data.observations()

    def __len__(self) -> int:
        return len(self.data)

    def to_csv(self, path=None) -> str:
        """Write columns ``x, z1..zp, offset, y, weight``; returns the text."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        p = self.data.z.shape[1]
        w.writerow(["x", *[f"z{i + 1}" for i in range(p)], "offset", "y", "weight"])
        d = self.data
        for i in range(len(d)):
            w.writerow([repr(float(d.x[i])), *map(repr, d.z[i].tolist()), repr(float(d.offset[i])), int(d.y[i]), repr(float(d.weight[i]))])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def build_exemplary(
    configs: Sequence[CovariateConfig],
    family: Family,
    true_params,
    J: int | None = None,
    *,
    tol: float = DEFAULT_TAIL_TOL,
    j_cap: int = DEFAULT_J_CAP,
) -> ExemplaryDataset:
    """Enumerate configurations by outcome levels with true-model weights.

    ``true_params`` is ``[beta, alpha..., (kappa)]`` as in :mod:`glm_core`.
    Within each configuration the outcome probabilities are renormalised over
    the ``J`` retained levels so that the total weight is exactly 1.
    """
    configs = tuple(configs)
    if not configs:
        raise ValueError("at least one covariate configuration is required")
    pis = np.array([c.pi for c in configs])
    if abs(pis.sum() - 1.0) > 1e-12:
        raise ValueError(f"configuration frequencies sum to {pis.sum()!r}, not 1")
    params = np.asarray(true_params, dtype=float)
    p = len(configs[0].z)
    beta = params[0]
    alpha = params[1 : 1 + p]
    kappa = float(params[1 + p]) if family.has_dispersion else None
    law = family.with_dispersion(kappa) if family.has_dispersion else family

    eta = np.array([beta * c.x + np.dot(c.z, alpha) + c.offset_base for c in configs])
    mus = law.mean(eta)
    if J is None:
        J = outcome_truncation(law, float(mus.max()), tol, j_cap)
    if family.is_binary:
        J = 2
    ys = np.arange(J, dtype=float)

    xs, zs, offs, yy, ww, idx = [], [], [], [], [], []
    for k, (c, mu) in enumerate(zip(configs, mus)):
        pr = law.pmf(ys, np.full(J, mu))
        pr = pr / pr.sum()
        xs.append(np.full(J, c.x))
        zs.append(np.tile(c.z, (J, 1)))
        offs.append(np.full(J, c.offset_base))
        yy.append(ys)
        ww.append(c.pi * pr)
        idx.append(np.full(J, k))
    data = Dataset(
        np.concatenate(xs), np.vstack(zs), np.concatenate(offs), np.concatenate(yy), np.concatenate(ww)
    )
    return ExemplaryDataset(data, np.concatenate(idx), configs, int(J))
