"""Exponential-family outcome models used by the score tests.

Three families are supported, each with its canonical-style link:

* ``bernoulli_logit``  -- binary outcome, logit link
* ``negbin_log``       -- negative binomial with dispersion ``kappa``, log link,
  ``Var(Y) = mu + kappa * mu**2``
* ``poisson_log``      -- Poisson, log link (the ``kappa = 0`` limit)

All derivative helpers are vectorised over observations and are expressed in
terms of the linear predictor ``eta``; callers chain them with the covariate
vector to obtain derivatives with respect to regression coefficients.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, gammaln

# |kappa * mu| below this switches the dispersion terms to their power series
_SERIES_CUTOFF = 1e-2


class FamilyKind(str, enum.Enum):
    BERNOULLI_LOGIT = "bernoulli_logit"
    NEGBIN_LOG = "negbin_log"
    POISSON_LOG = "poisson_log"


@dataclass(frozen=True)
class Family:
    """Outcome distribution for one design.

    ``dispersion`` is the negative binomial ``kappa``; it is ignored by the
    other kinds.  A negative binomial with ``dispersion == 0`` has Poisson
    mean-variance behaviour but keeps ``kappa`` as an estimable parameter.
    """

    kind: FamilyKind
    dispersion: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", FamilyKind(self.kind))
        if not np.isfinite(self.dispersion) or self.dispersion < 0:
            raise ValueError(f"dispersion must be a finite nonnegative number, got {self.dispersion!r}")

    @classmethod
    def bernoulli(cls) -> "Family":
        return cls(FamilyKind.BERNOULLI_LOGIT)

    @classmethod
    def negbin(cls, kappa: float) -> "Family":
        return cls(FamilyKind.NEGBIN_LOG, float(kappa))

    @classmethod
    def poisson(cls) -> "Family":
        return cls(FamilyKind.POISSON_LOG)

    @property
    def has_dispersion(self) -> bool:
        """True when the dispersion is a nuisance parameter to be estimated."""
        return self.kind is FamilyKind.NEGBIN_LOG

    @property
    def is_binary(self) -> bool:
        return self.kind is FamilyKind.BERNOULLI_LOGIT

    def with_dispersion(self, kappa: float) -> "Family":
        return Family(self.kind, float(kappa))

    # ------------------------------------------------------------------
    # mean and variance

    def mean(self, eta):
        eta = np.asarray(eta, dtype=float)
        if self.is_binary:
            return expit(eta)
        return np.exp(eta)

    def link(self, mu):
        mu = np.asarray(mu, dtype=float)
        if self.is_binary:
            return np.log(mu) - np.log1p(-mu)
        return np.log(mu)

    def variance(self, mu, kappa: float | None = None):
        mu = np.asarray(mu, dtype=float)
        if self.is_binary:
            return mu * (1.0 - mu)
        if self.kind is FamilyKind.POISSON_LOG:
            return mu
        k = self.dispersion if kappa is None else kappa
        return mu + k * mu**2

    def support_max(self) -> int | None:
        """Largest outcome value, or None for unbounded support."""
        return 1 if self.is_binary else None

    # ------------------------------------------------------------------
    # log likelihood and derivatives with respect to eta and kappa

    def log_pmf(self, y, mu, kappa: float | None = None):
        """Log probability mass of ``y`` at mean ``mu``."""
        y = np.asarray(y, dtype=float)
        mu = np.asarray(mu, dtype=float)
        _check_outcomes(self, y)
        if not np.all(np.isfinite(mu)):
            raise ValueError("mean must be finite")
        if self.is_binary:
            if np.any((mu <= 0) | (mu >= 1)):
                raise ValueError("Bernoulli mean must lie strictly inside (0, 1)")
            return np.where(y > 0, np.log(mu), np.log1p(-mu))
        if np.any(mu <= 0):
            raise ValueError("count mean must be positive")
        if self.kind is FamilyKind.POISSON_LOG:
            return y * np.log(mu) - mu - gammaln(y + 1.0)
        k = self.dispersion if kappa is None else float(kappa)
        tables = _CountTables(y, k)
        return tables.log_rising(y) + y * np.log(mu) - _log_norm_term(y, mu, k) - gammaln(y + 1.0)

    def pmf(self, y, mu, kappa: float | None = None):
        return np.exp(self.log_pmf(y, mu, kappa))

    def eta_score(self, y, mu, kappa: float = 0.0):
        """d log f / d eta."""
        if self.kind is FamilyKind.NEGBIN_LOG:
            return (y - mu) / (1.0 + kappa * mu)
        return y - mu

    def eta_hessian(self, y, mu, kappa: float = 0.0):
        """d^2 log f / d eta^2 (observed)."""
        if self.is_binary:
            return -mu * (1.0 - mu) + 0.0 * y
        if self.kind is FamilyKind.POISSON_LOG:
            return -mu + 0.0 * y
        u = 1.0 + kappa * mu
        return -mu * (1.0 + kappa * y) / u**2

    def eta_weight(self, mu, kappa: float = 0.0):
        """Expected information for eta, E[-d^2 log f / d eta^2] at the model mean."""
        if self.is_binary:
            return mu * (1.0 - mu)
        if self.kind is FamilyKind.POISSON_LOG:
            return mu
        return mu / (1.0 + kappa * mu)

    def eta_kappa_hessian(self, y, mu, kappa: float):
        """d^2 log f / d eta d kappa (negative binomial only)."""
        return -(y - mu) * mu / (1.0 + kappa * mu) ** 2

    def kappa_derivatives(self, y, mu, kappa: float):
        """First and second derivatives of the negative binomial log pmf in ``kappa``.

        Uses the rising-factorial form of the gamma ratio so that ``kappa``
        down to exactly 0 is handled without cancellation.
        """
        y = np.asarray(y, dtype=float)
        mu = np.asarray(mu, dtype=float)
        tables = _CountTables(y, kappa)
        u = 1.0 + kappa * mu
        d1 = tables.first(y) - y * mu / u + dispersion_d1(mu, kappa)
        d2 = -tables.second(y) + y * mu**2 / u**2 + dispersion_d2(mu, kappa)
        return d1, d2


def _check_outcomes(family: Family, y: np.ndarray) -> None:
    if not np.all(np.isfinite(y)) or np.any(y < 0) or np.any(y != np.floor(y)):
        raise ValueError("outcomes must be nonnegative integers")
    if family.is_binary and np.any(y > 1):
        raise ValueError("Bernoulli outcomes must be 0 or 1")


class _CountTables:
    """Cumulative sums over j < y of log(1 + k j), j/(1 + k j) and j^2/(1 + k j)^2."""

    def __init__(self, y: np.ndarray, kappa: float):
        top = int(np.max(y, initial=0))
        j = np.arange(top, dtype=float)
        kj = 1.0 + kappa * j
        self._log = np.concatenate(([0.0], np.cumsum(np.log1p(kappa * j))))
        self._first = np.concatenate(([0.0], np.cumsum(j / kj)))
        self._second = np.concatenate(([0.0], np.cumsum(j**2 / kj**2)))

    def log_rising(self, y):
        return self._log[np.asarray(y, dtype=np.int64)]

    def first(self, y):
        return self._first[np.asarray(y, dtype=np.int64)]

    def second(self, y):
        return self._second[np.asarray(y, dtype=np.int64)]


def _log_norm_term(y, mu, kappa):
    """(y + 1/kappa) * log(1 + kappa*mu) with its kappa -> 0 limit y*0 + mu."""
    if kappa == 0:
        return mu + 0.0 * y
    u = kappa * mu
    return y * np.log1p(u) + np.log1p(u) / kappa


# Series coefficients in u = kappa*mu for
#   h(u)  = [log(1+u) - u/(1+u)] / u^2   = sum_{k>=2} (-1)^k (k-1)/k u^(k-2)
#   h'(u)                                = sum_{k>=3} (-1)^k (k-1)(k-2)/k u^(k-3)
_K = np.arange(2, 16)
_H_COEF = ((-1.0) ** _K) * (_K - 1) / _K
_K3 = np.arange(3, 17)
_HP_COEF = ((-1.0) ** _K3) * (_K3 - 1) * (_K3 - 2) / _K3


def dispersion_d1(mu, kappa):
    """d/dkappa of -(1/kappa) log(1 + kappa mu) = mu^2 h(kappa mu)."""
    mu, kappa = np.broadcast_arrays(np.asarray(mu, dtype=float), np.asarray(kappa, dtype=float))
    u = kappa * mu
    small = u < _SERIES_CUTOFF
    out = np.empty_like(u)
    if np.any(small):
        us = u[small]
        out[small] = mu[small] ** 2 * np.polynomial.polynomial.polyval(us, _H_COEF)
    if np.any(~small):
        ul, ml, kl = u[~small], mu[~small], kappa[~small]
        out[~small] = np.log1p(ul) / kl**2 - ml / (kl * (1.0 + ul))
    return out


def dispersion_d2(mu, kappa):
    """Second kappa derivative of the same term, mu^3 h'(kappa mu)."""
    mu, kappa = np.broadcast_arrays(np.asarray(mu, dtype=float), np.asarray(kappa, dtype=float))
    u = kappa * mu
    small = u < _SERIES_CUTOFF
    out = np.empty_like(u)
    if np.any(small):
        us = u[small]
        out[small] = mu[small] ** 3 * np.polynomial.polynomial.polyval(us, _HP_COEF)
    if np.any(~small):
        ul, ml, kl = u[~small], mu[~small], kappa[~small]
        out[~small] = (
            2.0 * ml / (kl**2 * (1.0 + ul))
            - 2.0 * np.log1p(ul) / kl**3
            + ml**2 / (kl * (1.0 + ul) ** 2)
        )
    return out


def log_pmf(family: Family, y, mu, kappa: float | None = None):
    """Module-level alias of :meth:`Family.log_pmf`."""
    return family.log_pmf(y, mu, kappa)
