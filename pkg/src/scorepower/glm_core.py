"""Weighted likelihood machinery shared by every design.

Parameters are packed as one flat vector ``[beta, alpha_1..alpha_p, kappa]``
where ``beta`` multiplies the treatment indicator ``x``, ``alpha`` are the
nuisance regression coefficients for the columns of ``z`` and ``kappa`` is
present only for the negative binomial family.  The linear predictor is
``eta = beta*x + z @ alpha + offset``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import norm

from .exceptions import ConvergenceError, DegenerateDataError
from .family import Family

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200
_KAPPA_FLOOR = 1e-12


@dataclass(frozen=True)
class Observation:
    """One (possibly weighted) record."""

    x: float
    z: tuple
    offset: float
    y: float
    weight: float = 1.0

    def __post_init__(self):
        if self.weight < 0 or not math.isfinite(self.weight):
            raise ValueError("observation weight must be finite and nonnegative")
        object.__setattr__(self, "z", tuple(float(v) for v in np.atleast_1d(self.z)))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Column-oriented collection of observations."""

    x: np.ndarray
    z: np.ndarray
    offset: np.ndarray
    y: np.ndarray
    weight: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        n = x.size
        z = np.asarray(self.z, dtype=float)
        if z.ndim == 1:
            z = z.reshape(n, -1) if n else z.reshape(0, 1)
        off = np.broadcast_to(np.asarray(self.offset, dtype=float), (n,)).copy()
        y = np.asarray(self.y, dtype=float).ravel()
        w = np.broadcast_to(np.asarray(self.weight, dtype=float), (n,)).copy()
        if z.shape[0] != n or y.size != n:
            raise ValueError("x, z, offset, y and weight must describe the same number of rows")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and nonnegative")
        for name, val in (("x", x), ("z", z), ("offset", off), ("y", y), ("weight", w)):
            object.__setattr__(self, name, val)

    @classmethod
    def from_observations(cls, observations: Iterable[Observation]) -> "Dataset":
        obs = list(observations)
        if not obs:
            raise ValueError("no observations")
        return cls(
            x=[o.x for o in obs],
            z=np.array([o.z for o in obs], dtype=float),
            offset=[o.offset for o in obs],
            y=[o.y for o in obs],
            weight=[o.weight for o in obs],
        )

    def __len__(self) -> int:
        return self.x.size

    @property
    def n_nuisance_coef(self) -> int:
        return self.z.shape[1]

    def with_weights(self, weight) -> "Dataset":
        return Dataset(self.x, self.z, self.offset, self.y, weight)

    def observations(self) -> list[Observation]:
        return [
            Observation(float(x), tuple(z), float(o), float(y), float(w))
            for x, z, o, y, w in zip(self.x, self.z, self.offset, self.y, self.weight)
        ]


def as_dataset(data: Dataset | Observation | Sequence[Observation]) -> Dataset:
    if isinstance(data, Dataset):
        return data
    if isinstance(data, Observation):
        return Dataset.from_observations([data])
    return Dataset.from_observations(data)


@dataclass(frozen=True)
class RestrictedFit:
    """Maximum likelihood fit of the nuisance parameters with ``beta`` held at ``beta0``."""

    beta0: float
    alpha_hat: np.ndarray
    kappa_hat: float | None
    converged: bool
    iterations: int
    max_score_residual: float
    loglik: float = field(default=float("nan"), compare=False)

    @property
    def params(self) -> np.ndarray:
        return pack_params(self.beta0, self.alpha_hat, self.kappa_hat)

    @property
    def at_boundary(self) -> bool:
        """Dispersion estimate sits on the Poisson boundary ``kappa = 0``."""
        return self.kappa_hat is not None and self.kappa_hat == 0.0


def pack_params(beta: float, alpha, kappa: float | None = None) -> np.ndarray:
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    tail = [] if kappa is None else [float(kappa)]
    return np.concatenate(([float(beta)], alpha, tail))


def unpack_params(family: Family, params, p: int) -> tuple[float, np.ndarray, float]:
    params = np.asarray(params, dtype=float)
    expected = 1 + p + (1 if family.has_dispersion else 0)
    if params.size != expected:
        raise ValueError(f"expected {expected} parameters, got {params.size}")
    kappa = float(params[-1]) if family.has_dispersion else 0.0
    if kappa < 0:
        raise ValueError("kappa must be nonnegative")
    return float(params[0]), params[1 : 1 + p], kappa


def _mean(family: Family, data: Dataset, beta: float, alpha) -> np.ndarray:
    return family.mean(beta * data.x + data.z @ alpha + data.offset)


# ----------------------------------------------------------------------
# per-observation derivatives


def score_contribution(family: Family, data: Dataset | Sequence[Observation], params) -> np.ndarray:
    """Per-observation score vectors, shape ``(n, 1 + p [+ 1])``.

    Columns are d log f / d beta, d log f / d alpha, and for the negative
    binomial d log f / d kappa.  Weights are not applied.
    """
    data = as_dataset(data)
    beta, alpha, kappa = unpack_params(family, params, data.n_nuisance_coef)
    mu = _mean(family, data, beta, alpha)
    s_eta = family.eta_score(data.y, mu, kappa)
    cols = [data.x * s_eta, data.z * s_eta[:, None]]
    if family.has_dispersion:
        d1, _ = family.kappa_derivatives(data.y, mu, kappa)
        cols.append(d1[:, None])
    return np.column_stack(cols)


def observed_info_contribution(family: Family, data: Dataset | Sequence[Observation], params) -> np.ndarray:
    """Per-observation negative Hessian of the log pmf, shape ``(n, d, d)``."""
    data = as_dataset(data)
    beta, alpha, kappa = unpack_params(family, params, data.n_nuisance_coef)
    mu = _mean(family, data, beta, alpha)
    design = np.column_stack([data.x, data.z])
    h_eta = family.eta_hessian(data.y, mu, kappa)
    q = design.shape[1]
    d = q + (1 if family.has_dispersion else 0)
    info = np.zeros((len(data), d, d))
    info[:, :q, :q] = -h_eta[:, None, None] * design[:, :, None] * design[:, None, :]
    if family.has_dispersion:
        cross = -family.eta_kappa_hessian(data.y, mu, kappa)[:, None] * design
        info[:, :q, q] = cross
        info[:, q, :q] = cross
        _, d2 = family.kappa_derivatives(data.y, mu, kappa)
        info[:, q, q] = -d2
    return info


def _support_expectation(family: Family, data: Dataset, params, true_mu, true_kappa, tail_tol=1e-15):
    """E[J] per observation with y drawn from ``family`` at (true_mu, true_kappa)."""
    from .exemplary import outcome_truncation

    true_mu = np.broadcast_to(np.asarray(true_mu, dtype=float), (len(data),))
    if family.is_binary:
        ys = np.array([0.0, 1.0])
    else:
        law = family.with_dispersion(true_kappa) if family.has_dispersion else family
        top = outcome_truncation(law, float(true_mu.max()), tol=tail_tol, j_cap=100_000)
        ys = np.arange(top, dtype=float)
    law = family.with_dispersion(true_kappa) if family.has_dispersion else family
    total = np.zeros((len(data),) + (observed_info_contribution(family, _row(data, 0), params).shape[1:]))
    mass = np.zeros(len(data))
    for yv in ys:
        probs = law.pmf(np.full(len(data), yv), true_mu)
        shifted = Dataset(data.x, data.z, data.offset, np.full(len(data), yv), data.weight)
        total += probs[:, None, None] * observed_info_contribution(family, shifted, params)
        mass += probs
    return total / mass[:, None, None]


def _row(data: Dataset, i: int) -> Dataset:
    return Dataset(data.x[i : i + 1], data.z[i : i + 1], data.offset[i : i + 1], data.y[i : i + 1], data.weight[i : i + 1])


def info_contributions(
    family: Family,
    data: Dataset | Sequence[Observation],
    params,
    true_mu=None,
    true_kappa: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Expected observed information under a true model, and Fisher information.

    Returns ``(info_tilde, fisher)``, each of shape ``(n, d, d)``.
    ``info_tilde`` is the expectation of the observed information when the
    outcome follows ``family`` with mean ``true_mu`` and dispersion
    ``true_kappa`` (defaulting to the model implied by ``params``);
    ``fisher`` is the same expectation under the model at ``params`` itself.
    The ``y`` column of ``data`` is ignored.
    """
    data = as_dataset(data)
    beta, alpha, kappa = unpack_params(family, params, data.n_nuisance_coef)
    model_mu = _mean(family, data, beta, alpha)
    if true_mu is None:
        true_mu = model_mu
    if true_kappa is None:
        true_kappa = kappa
    fisher = _support_expectation(family, data, params, model_mu, kappa)
    tilde = _support_expectation(family, data, params, true_mu, true_kappa)
    return tilde, fisher


def loglik(family: Family, data: Dataset, params) -> float:
    data = as_dataset(data)
    beta, alpha, kappa = unpack_params(family, params, data.n_nuisance_coef)
    mu = _mean(family, data, beta, alpha)
    keep = data.weight > 0
    lp = family.log_pmf(data.y[keep], mu[keep], kappa)
    return float(np.dot(data.weight[keep], lp))


# ----------------------------------------------------------------------
# fitting


class _Problem:
    """Weighted GLM likelihood in (coef, kappa) for a fixed design and offset."""

    def __init__(self, family: Family, design: np.ndarray, offset: np.ndarray, y: np.ndarray, w: np.ndarray):
        keep = w > 0
        self.family = family
        self.X = design[keep]
        self.off = offset[keep]
        self.y = y[keep]
        self.w = w[keep]
        self.total = float(self.w.sum())

    def mu(self, coef):
        return self.family.mean(self.X @ coef + self.off)

    def loglik(self, coef, kappa):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            mu = self.mu(coef)
            if not np.all(np.isfinite(mu)) or np.any(mu <= 0) or (self.family.is_binary and np.any(mu >= 1)):
                return -np.inf
            return float(np.dot(self.w, self.family.log_pmf(self.y, mu, kappa)))

    def coef_score(self, coef, kappa):
        mu = self.mu(coef)
        return self.X.T @ (self.w * self.family.eta_score(self.y, mu, kappa))

    def kappa_terms(self, coef, kappa):
        mu = self.mu(coef)
        d1, d2 = self.family.kappa_derivatives(self.y, mu, kappa)
        return float(np.dot(self.w, d1)), float(np.dot(self.w, d2))

    def fisher_step(self, coef, kappa):
        mu = self.mu(coef)
        score = self.X.T @ (self.w * self.family.eta_score(self.y, mu, kappa))
        info = (self.X * (self.w * self.family.eta_weight(mu, kappa))[:, None]).T @ self.X
        return np.linalg.solve(info, score)

    def joint_newton_step(self, coef, kappa):
        """Newton step in (coef, log kappa) using the observed Hessian, or None if not concave."""
        mu = self.mu(coef)
        y, w, X, fam = self.y, self.w, self.X, self.family
        g_coef = X.T @ (w * fam.eta_score(y, mu, kappa))
        d1, d2 = fam.kappa_derivatives(y, mu, kappa)
        g_k = float(np.dot(w, d1))
        h_cc = (X * (w * fam.eta_hessian(y, mu, kappa))[:, None]).T @ X
        h_ck = X.T @ (w * fam.eta_kappa_hessian(y, mu, kappa))
        h_kk = float(np.dot(w, d2))
        q = X.shape[1]
        grad = np.concatenate([g_coef, [kappa * g_k]])
        hess = np.zeros((q + 1, q + 1))
        hess[:q, :q] = h_cc
        hess[:q, q] = hess[q, :q] = kappa * h_ck
        hess[q, q] = kappa**2 * h_kk + kappa * g_k
        try:
            np.linalg.cholesky(-hess)
        except np.linalg.LinAlgError:
            return None
        return np.linalg.solve(-hess, grad)


def _check_rank(design: np.ndarray, w: np.ndarray) -> None:
    active = design[w > 0]
    if active.shape[0] == 0:
        raise DegenerateDataError("total weight must be positive")
    if np.linalg.matrix_rank(active) < design.shape[1]:
        raise DegenerateDataError("nuisance design matrix is rank deficient")


def _initial_coef(prob: _Problem) -> np.ndarray:
    fam = prob.family
    ybar = np.dot(prob.w, prob.y) / prob.total
    coef = np.zeros(prob.X.shape[1])
    if fam.is_binary:
        if ybar <= 0 or ybar >= 1:
            raise DegenerateDataError("all binary outcomes are identical")
        target = np.log(ybar / (1 - ybar))
        base = target - np.dot(prob.w, prob.off) / prob.total
    else:
        if ybar <= 0:
            raise DegenerateDataError("all counts are zero")
        base = np.log(np.dot(prob.w, prob.y) / np.dot(prob.w, np.exp(prob.off)))
    # least-squares projection of a constant predictor onto the design
    coef, *_ = np.linalg.lstsq(prob.X, np.full(prob.X.shape[0], base), rcond=None)
    return coef


def _fisher_scoring(prob: _Problem, coef, kappa, tol, max_iter):
    """Maximise over coef at fixed kappa.  Returns (coef, iterations, converged)."""
    ll = prob.loglik(coef, kappa)
    for it in range(1, max_iter + 1):
        step = prob.fisher_step(coef, kappa)
        t = 1.0
        while True:
            trial = coef + t * step
            ll_new = prob.loglik(trial, kappa)
            if ll_new >= ll - 1e-13 * abs(ll) or t < 1e-8:
                break
            t /= 2
        coef, ll = trial, ll_new
        res = np.max(np.abs(prob.coef_score(coef, kappa))) / prob.total
        if res < tol and np.max(np.abs(t * step)) < max(tol, 1e-9):
            return coef, it, True
    return coef, max_iter, False


def _kappa_step(prob: _Problem, coef, kappa):
    """Safeguarded Newton step on log kappa at fixed coef."""
    g, h = prob.kappa_terms(coef, kappa)
    grad = kappa * g
    curv = kappa**2 * h + kappa * g
    step = -grad / curv if curv < 0 else math.copysign(1.0, grad)
    step = float(np.clip(step, -2.0, 2.0))
    ll = prob.loglik(coef, kappa)
    t = 1.0
    while t > 1e-8:
        new = max(kappa * math.exp(t * step), _KAPPA_FLOOR)
        if prob.loglik(coef, new) >= ll - 1e-13 * abs(ll):
            return new
        t /= 2
    return kappa


def _fit(family: Family, design, offset, y, w, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, start=None):
    """Weighted ML of coef (and kappa for the negative binomial).

    Returns (coef, kappa, converged, iterations, max_score_residual, loglik).
    """
    try:
        return _fit_unguarded(family, design, offset, y, w, tol, max_iter, start)
    except np.linalg.LinAlgError:
        # the information degenerates as an estimate diverges (e.g. separation)
        raise DegenerateDataError("information matrix became singular; the estimate is not finite") from None


def _fit_unguarded(family, design, offset, y, w, tol, max_iter, start):
    design = np.asarray(design, dtype=float)
    _check_rank(design, w)
    prob = _Problem(family, design, offset, y, w)
    if start is not None:
        coef = np.asarray(start[0], dtype=float).copy()
        if not np.isfinite(prob.loglik(coef, start[1] or 0.0)):
            coef = _initial_coef(prob)
    else:
        coef = _initial_coef(prob)

    if not family.has_dispersion:
        coef, it, ok = _fisher_scoring(prob, coef, 0.0, tol, max_iter)
        res = float(np.max(np.abs(prob.coef_score(coef, 0.0)))) / prob.total
        return coef, None, ok, it, res, prob.loglik(coef, 0.0)

    # Poisson boundary: the kappa score at kappa = 0 is sum w[(y - mu)^2 - y] / 2
    pcoef, it0, _ = _fisher_scoring(prob, coef, 0.0, tol, max_iter)
    mu0 = prob.mu(pcoef)
    slope0 = 0.5 * float(np.dot(prob.w, (prob.y - mu0) ** 2 - prob.y))
    if slope0 <= 0:
        res = float(np.max(np.abs(prob.coef_score(pcoef, 0.0)))) / prob.total
        return pcoef, 0.0, res < tol, it0, res, prob.loglik(pcoef, 0.0)

    if start is not None and start[1]:
        kappa = float(start[1])
    else:
        kappa = max(2.0 * slope0 / float(np.dot(prob.w, mu0**2)), 1e-3)
        coef = pcoef
    it = 0
    converged = False
    while it < max_iter:
        it += 1
        g_coef = prob.coef_score(coef, kappa)
        g_k, _ = prob.kappa_terms(coef, kappa)
        res = max(float(np.max(np.abs(g_coef))), abs(g_k)) / prob.total
        step = prob.joint_newton_step(coef, kappa) if res < 1e-3 else None
        if step is not None:
            ll = prob.loglik(coef, kappa)
            t = 1.0
            while t > 1e-8:
                c_new = coef + t * step[:-1]
                k_new = max(kappa * math.exp(np.clip(t * step[-1], -2.0, 2.0)), _KAPPA_FLOOR)
                if prob.loglik(c_new, k_new) >= ll - 1e-13 * abs(ll):
                    break
                t /= 2
            moved = max(float(np.max(np.abs(c_new - coef))), abs(k_new - kappa))
            coef, kappa = c_new, k_new
        else:
            c_new = coef + prob.fisher_step(coef, kappa)
            if prob.loglik(c_new, kappa) < prob.loglik(coef, kappa):
                c_new, _, _ = _fisher_scoring(prob, coef, kappa, tol, 5)
            k_new = _kappa_step(prob, c_new, kappa)
            moved = max(float(np.max(np.abs(c_new - coef))), abs(k_new - kappa))
            coef, kappa = c_new, k_new
        g_coef = prob.coef_score(coef, kappa)
        g_k, _ = prob.kappa_terms(coef, kappa)
        res = max(float(np.max(np.abs(g_coef))), abs(g_k)) / prob.total
        if res < tol and moved < max(tol, 1e-9):
            converged = True
            break
    return coef, kappa, converged, it + it0, res, prob.loglik(coef, kappa)


def fit_restricted(
    data: Dataset | Sequence[Observation],
    family: Family,
    beta0: float,
    *,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    start: RestrictedFit | None = None,
    raise_on_failure: bool = True,
) -> RestrictedFit:
    """Fit the nuisance parameters with ``beta`` fixed at ``beta0``.

    ``beta0`` enters through the offset, so the nuisance design is just
    ``data.z``.  For the negative binomial the dispersion is estimated by
    maximum likelihood, with the Poisson boundary ``kappa = 0`` taken when
    the likelihood does not increase away from it.

    Raises
    ------
    DegenerateDataError
        Rank-deficient design, zero total weight, or outcomes that admit
        no finite estimate.
    ConvergenceError
        Tolerance not met within ``max_iter`` (only if ``raise_on_failure``).
    """
    data = as_dataset(data)
    off = data.offset + beta0 * data.x
    st = None if start is None else (start.alpha_hat, start.kappa_hat)
    coef, kappa, ok, it, res, ll = _fit(family, data.z, off, data.y, data.weight, tol, max_iter, st)
    if not ok and raise_on_failure:
        raise ConvergenceError(f"restricted fit did not converge in {it} iterations (max score {res:.3g})")
    return RestrictedFit(float(beta0), coef, kappa, ok, it, res, ll)


def fit_unrestricted(
    data: Dataset | Sequence[Observation], family: Family, *, tol: float = DEFAULT_TOL
) -> tuple[float, RestrictedFit]:
    """Maximum likelihood with ``beta`` free; returns ``(beta_hat, fit)``.

    The fit is reported as a :class:`RestrictedFit` at ``beta0 = beta_hat``.
    """
    data = as_dataset(data)
    design = np.column_stack([data.x, data.z])
    coef, kappa, ok, it, res, ll = _fit(family, design, data.offset, data.y, data.weight, tol)
    if not ok:
        raise ConvergenceError("unrestricted fit did not converge (possible separation)")
    return float(coef[0]), RestrictedFit(float(coef[0]), coef[1:], kappa, ok, it, res, ll)


# ----------------------------------------------------------------------
# score test


def null_variance(family: Family, data: Dataset, fit: RestrictedFit) -> float:
    """Schur complement of the Fisher information for beta at the restricted fit.

    The mean and dispersion parameters are orthogonal in expected information
    for the negative binomial, so only the (beta, alpha) block is needed.
    """
    data = as_dataset(data)
    mu = _mean(family, data, fit.beta0, fit.alpha_hat)
    wt = data.weight * family.eta_weight(mu, fit.kappa_hat or 0.0)
    i_bb = float(np.dot(wt, data.x**2))
    i_ba = (data.z * (wt * data.x)[:, None]).sum(axis=0)
    i_aa = (data.z * wt[:, None]).T @ data.z
    return i_bb - float(i_ba @ np.linalg.solve(i_aa, i_ba))


def score_statistic(
    data: Dataset | Sequence[Observation],
    family: Family,
    beta0: float,
    *,
    fit: RestrictedFit | None = None,
) -> float:
    """Standardised score statistic for ``H0: beta = beta0``.

    Positive values mean the treated outcomes exceed what the null model
    predicts.
    """
    data = as_dataset(data)
    if fit is None:
        fit = fit_restricted(data, family, beta0)
    mu = _mean(family, data, fit.beta0, fit.alpha_hat)
    s_beta = float(np.dot(data.weight * data.x, family.eta_score(data.y, mu, fit.kappa_hat or 0.0)))
    v = null_variance(family, data, fit)
    if not v > 0:
        raise DegenerateDataError("null variance of the score is not positive")
    return s_beta / math.sqrt(v)


@dataclass(frozen=True)
class ScoreInterval:
    lower: float
    upper: float
    estimate: float
    level: float

    @property
    def lower_open(self) -> bool:
        return math.isinf(self.lower)

    @property
    def upper_open(self) -> bool:
        return math.isinf(self.upper)


def _z_at(data, family, beta, start):
    fit = fit_restricted(data, family, beta, start=start)
    return score_statistic(data, family, beta, fit=fit), fit


def _least_extreme(data, family, max_distance):
    best = (math.inf, 0.0, None)
    for b in np.linspace(-max_distance, max_distance, 81):
        try:
            z, f = _z_at(data, family, float(b), None)
        except (ConvergenceError, DegenerateDataError):
            continue
        if abs(z) < best[0]:
            best = (abs(z), float(b), f)
    if best[2] is None:
        raise DegenerateDataError("the score statistic is undefined at every null value tried")
    return best[1], best[2]


def score_confidence_interval(
    data: Dataset | Sequence[Observation],
    family: Family,
    level: float = 0.95,
    *,
    xtol: float = 1e-8,
    max_distance: float = 50.0,
) -> ScoreInterval:
    """Invert the score test: ``{beta : |Z(beta)| <= z_{(1+level)/2}}``.

    Each side is bracketed by doubling the distance from the unrestricted
    estimate until ``|Z|`` exceeds the critical value, then refined by
    bisection.  An endpoint that cannot be bracketed within
    ``max_distance`` is reported as infinite.  When the unrestricted
    estimate does not exist (separation) ``estimate`` is NaN and the search
    starts from the least extreme null value on a coarse grid.
    """
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    data = as_dataset(data)
    crit = float(norm.ppf(0.5 + level / 2))
    try:
        beta_hat, fit_hat = fit_unrestricted(data, family)
        center = beta_hat
    except (ConvergenceError, DegenerateDataError):
        # no finite MLE: start from the grid point with the smallest |Z|
        beta_hat = math.nan
        center, fit_hat = _least_extreme(data, family, max_distance)
        z0, _ = _z_at(data, family, center, fit_hat)
        if abs(z0) >= crit:
            raise DegenerateDataError("no null value is accepted at this level") from None
    v = null_variance(family, data, fit_hat)
    step0 = min(0.5 / math.sqrt(v), 1.0) if v > 0 else 0.1

    def endpoint(direction: int) -> float:
        inner, inner_fit = center, fit_hat
        dist = step0
        while True:
            b = center + direction * dist
            try:
                z, f = _z_at(data, family, b, inner_fit)
            except (ConvergenceError, DegenerateDataError):
                return direction * math.inf
            if abs(z) >= crit:
                outer = b
                break
            inner, inner_fit = b, f
            if dist > max_distance:
                return direction * math.inf
            dist *= 2
        while abs(outer - inner) > xtol:
            mid = 0.5 * (inner + outer)
            z, f = _z_at(data, family, mid, inner_fit)
            if abs(z) >= crit:
                outer = mid
            else:
                inner, inner_fit = mid, f
        return 0.5 * (inner + outer)

    return ScoreInterval(endpoint(-1), endpoint(+1), beta_hat, level)


def z2_trace(data: Dataset | Sequence[Observation], family: Family, betas) -> np.ndarray:
    """Squared score statistic over a grid of null values."""
    data = as_dataset(data)
    out = []
    fit = None
    for b in np.asarray(betas, dtype=float):
        fit = fit_restricted(data, family, float(b), start=fit)
        out.append(score_statistic(data, family, float(b), fit=fit) ** 2)
    return np.array(out)
