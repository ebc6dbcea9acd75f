"""Monte Carlo estimates of the rejection rate of the score tests.

Replicate ``i`` draws from ``numpy.random.default_rng([seed, i])``, and
replicates are processed in fixed blocks, so results do not depend on how
many worker processes are used.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.stats import norm

from . import __version__
from .exceptions import ScorePowerError
from .exemplary import dropout_rate
from .family import dispersion_d1, dispersion_d2
from .logistic_design import LogisticScenario, cochran_score_statistic, solve_alpha0
from .nb_design import NbTrialSpec, nb_score_test

DEFAULT_BLOCK = 500
UNRELIABLE_FAILURE_RATE = 0.01


class NbTrialData(NamedTuple):
    g: np.ndarray
    t: np.ndarray
    y: np.ndarray


class BinaryTrialData(NamedTuple):
    """Responders ``x[g, s]`` among ``n[g, s]`` subjects."""

    x: np.ndarray
    n: np.ndarray


def arm_sizes(n: int, theta: float) -> tuple[int, int]:
    """(n1, n0) with ``n1`` the nearest integer to ``n * theta / (1 + theta)``."""
    n1 = int(math.floor(n * theta / (1 + theta) + 0.5))
    return n1, n - n1


def simulate_nb_trial(spec: NbTrialSpec, n: int, rng: np.random.Generator) -> NbTrialData:
    """Counts from a gamma-Poisson mixture with exponential dropout truncated at ``tau_c``."""
    n1, n0 = arm_sizes(n, spec.theta)
    if n1 < 1 or n0 < 1:
        raise ValueError(f"n={n} leaves an empty arm at theta={spec.theta}")
    g = np.concatenate([np.ones(n1), np.zeros(n0)])
    t = np.empty(n)
    for arm, sl in ((1, slice(0, n1)), (0, slice(n1, n))):
        w = spec.arm_dropout(arm)
        size = sl.stop - sl.start
        if w > 0:
            t[sl] = np.minimum(rng.exponential(1.0 / dropout_rate(w, spec.tau_c), size), spec.tau_c)
        else:
            t[sl] = spec.tau_c
    rate = np.where(g == 1, spec.lambda1, spec.lambda0)
    if spec.kappa > 0:
        eps = rng.gamma(1.0 / spec.kappa, spec.kappa, n)
    else:
        eps = 1.0
    y = rng.poisson(eps * rate * t).astype(float)
    return NbTrialData(g, t, y)


def simulate_binary_trial(scenario: LogisticScenario, n: int, rng: np.random.Generator, alpha0: float | None = None) -> BinaryTrialData:
    """Multinomial cell membership and binomial responders per cell."""
    if alpha0 is None:
        alpha0 = solve_alpha0(scenario)
    cells = scenario.cell_array
    counts = rng.multinomial(n, cells.ravel()).reshape(cells.shape)
    probs = scenario.response_probs(alpha0)
    x = rng.binomial(counts, probs)
    return BinaryTrialData(x.astype(float), counts.astype(float))


# ----------------------------------------------------------------------
# batched restricted NB fit


def _rising_tables(y_int: np.ndarray, kappa: np.ndarray, top: int):
    """Per-row cumulative sums over j < y of log1p(k j), j/(1 + k j), j^2/(1 + k j)^2."""
    j = np.arange(top, dtype=float)[None, :]
    kj = kappa[:, None] * j
    zero = np.zeros((kappa.size, 1))
    tabs = []
    for term in (np.log1p(kj), j / (1 + kj), j**2 / (1 + kj) ** 2):
        cum = np.concatenate([zero, np.cumsum(term, axis=1)], axis=1)
        tabs.append(np.take_along_axis(cum, y_int, axis=1))
    return tabs


def _nb_loglik(y, y_int, c, alpha, kappa, top):
    mu = np.exp(alpha)[:, None] * c
    a0, _, _ = _rising_tables(y_int, kappa, top)
    k = kappa[:, None]
    norm_term = np.where(k > 0, np.log1p(k * mu) / np.where(k > 0, k, 1.0), mu)
    ll = a0 + y * np.log(mu) - y * np.log1p(k * mu) - norm_term
    return ll.sum(axis=1)


def _nb_derivs(y, y_int, c, alpha, kappa, top):
    mu = np.exp(alpha)[:, None] * c
    k = kappa[:, None]
    u = 1 + k * mu
    _, a1, a2 = _rising_tables(y_int, kappa, top)
    ga = np.sum((y - mu) / u, axis=1)
    haa = -np.sum(mu * (1 + k * y) / u**2, axis=1)
    hak = -np.sum((y - mu) * mu / u**2, axis=1)
    gk = np.sum(a1 - y * mu / u + dispersion_d1(mu, k), axis=1)
    hkk = np.sum(-a2 + y * mu**2 / u**2 + dispersion_d2(mu, k), axis=1)
    return ga, haa, hak, gk, hkk


def batch_nb_restricted_fit(y, c, *, tol: float = 1e-10, max_iter: int = 100):
    """Restricted NB fits for many replicates sharing one subject count.

    ``y`` and ``c`` are ``(R, n)`` arrays of counts and exposures with the
    null rate ratio folded into ``c``.  Returns ``(alpha, kappa, ok)``;
    ``ok`` is False where the iteration did not converge or the data carry
    no events.
    """
    y = np.asarray(y, dtype=float)
    c = np.asarray(c, dtype=float)
    R, n = y.shape
    y_int = y.astype(np.int64)
    top = int(y_int.max(initial=0))
    total = y.sum(axis=1)
    has_events = total > 0
    alpha = np.log(np.where(has_events, total, 1.0) / c.sum(axis=1))
    mu = np.exp(alpha)[:, None] * c
    slope0 = np.sum((y - mu) ** 2 - y, axis=1)
    interior = has_events & (slope0 > 0)
    kappa = np.where(interior, np.maximum(slope0 / np.sum(mu**2, axis=1), 1e-3), 0.0)
    ok = has_events & ~interior
    active = np.nonzero(interior)[0]
    for _ in range(max_iter):
        if active.size == 0:
            break
        ya, yi, ca = y[active], y_int[active], c[active]
        a, k = alpha[active], kappa[active]
        ga, haa, hak, gk, hkk = _nb_derivs(ya, yi, ca, a, k, top)
        # Newton in (alpha, log kappa)
        gl = k * gk
        hal = k * hak
        hll = k**2 * hkk + k * gk
        det = haa * hll - hal**2
        concave = (haa < 0) & (det > 0)
        safe_det = np.where(concave, det, 1.0)
        da = np.where(concave, -(hll * ga - hal * gl) / safe_det, -ga / haa)
        dl_newton = -(haa * gl - hal * ga) / safe_det
        dl_fallback = np.where(hll < 0, -gl / np.where(hll < 0, hll, 1.0), np.sign(gl))
        dl = np.clip(np.where(concave, dl_newton, dl_fallback), -3.0, 3.0)
        ll0 = _nb_loglik(ya, yi, ca, a, k, top)
        step = np.ones(active.size)
        accepted = np.zeros(active.size, dtype=bool)
        new_a, new_k = a.copy(), k.copy()
        for _h in range(40):
            pending = ~accepted
            if not pending.any():
                break
            ta = a + step * da
            tk = k * np.exp(step * dl)
            ll1 = _nb_loglik(ya, yi, ca, ta, tk, top)
            good = pending & (ll1 >= ll0 - 1e-12 * np.abs(ll0))
            new_a = np.where(good, ta, new_a)
            new_k = np.where(good, tk, new_k)
            accepted |= good
            step = np.where(accepted, step, step / 2)
        moved = np.maximum(np.abs(new_a - a), np.abs(np.log(new_k) - np.log(k)))
        alpha[active], kappa[active] = new_a, new_k
        ga, _, _, gk, _ = _nb_derivs(ya, yi, ca, new_a, new_k, top)
        res = np.maximum(np.abs(ga), np.abs(gk)) / n
        done = (res < tol) & (moved < 1e-8)
        ok[active[done]] = True
        active = active[~done]
    return alpha, kappa, ok


def batch_nb_score_statistics(g, t, y, margin: float = 1.0, *, tol: float = 1e-10):
    """Score statistics for many NB replicates.

    ``g`` is the common ``(n,)`` arm vector; ``t`` and ``y`` are ``(R, n)``.
    Returns ``(z, ok)``; replicates the batched fit could not handle are
    refitted one at a time and ``ok`` is False only where that also fails.
    """
    g = np.asarray(g, dtype=float)
    t = np.atleast_2d(np.asarray(t, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    c = t * np.where(g == 1, margin, 1.0)[None, :]
    alpha, kappa, ok = batch_nb_restricted_fit(y, c, tol=tol)
    mu = np.exp(alpha)[:, None] * c
    u = 1 + kappa[:, None] * mu
    treated = (g == 1)[None, :]
    num = np.sum(np.where(treated, (y - mu) / u, 0.0), axis=1)
    wmu = mu / u
    d1 = np.sum(np.where(treated, wmu, 0.0), axis=1)
    d0 = np.sum(np.where(treated, 0.0, wmu), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = num / np.sqrt(d0 * d1 / (d0 + d1))
    for r in np.nonzero(~ok)[0]:
        if y[r].sum() == 0:
            continue
        try:
            z[r] = nb_score_test(g, t[r], y[r], margin)
            ok[r] = True
        except ScorePowerError:
            pass
    z = np.where(ok, z, np.nan)
    return z, ok


# ----------------------------------------------------------------------
# Monte Carlo driver


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    ``sidedness`` is ``"lower"``, ``"upper"`` or ``"two_sided"``; by default
    NB noninferiority tests use the lower tail and everything else is
    two-sided.  ``workers`` only affects speed.
    """

    scenario: object
    n_total: int
    replications: int
    seed: int = 20240101
    workers: int = 1
    alpha: float = 0.05
    sidedness: str | None = None
    block_size: int = DEFAULT_BLOCK

    def __post_init__(self):
        if not isinstance(self.scenario, (NbTrialSpec, LogisticScenario)):
            raise TypeError("scenario must be an NbTrialSpec or LogisticScenario")
        if self.replications < 1:
            raise ValueError(f"replications must be at least 1, got {self.replications!r}")
        if self.n_total < 2:
            raise ValueError(f"n_total must be at least 2, got {self.n_total!r}")
        if self.block_size < 1:
            raise ValueError("block_size must be positive")
        if self.sidedness not in (None, "lower", "upper", "two_sided"):
            raise ValueError(f"sidedness must be lower, upper or two_sided, got {self.sidedness!r}")

    @property
    def resolved_sidedness(self) -> str:
        if self.sidedness is not None:
            return self.sidedness
        if isinstance(self.scenario, NbTrialSpec) and self.scenario.margin != 1.0:
            return "lower"
        return "two_sided"

    def identity(self) -> dict:
        """Everything that determines the result (``workers`` excluded)."""
        kind = "nb" if isinstance(self.scenario, NbTrialSpec) else "logistic"
        return {
            "kind": kind,
            "scenario": dataclasses.asdict(self.scenario),
            "n_total": self.n_total,
            "replications": self.replications,
            "seed": self.seed,
            "alpha": self.alpha,
            "sidedness": self.resolved_sidedness,
            "block_size": self.block_size,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.identity(), sort_keys=True, default=list).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class SimResult:
    rejections: int
    replications: int
    fit_failures: int
    seed: int
    config_hash: str
    extra: dict = field(default_factory=dict)

    @property
    def effective(self) -> int:
        return self.replications - self.fit_failures

    @property
    def power_hat(self) -> float:
        return self.rejections / self.effective if self.effective else float("nan")

    @property
    def mc_stderr(self) -> float:
        p = self.power_hat
        return math.sqrt(p * (1 - p) / self.effective) if self.effective else float("nan")

    @property
    def unreliable(self) -> bool:
        return self.fit_failures > UNRELIABLE_FAILURE_RATE * self.replications

    def to_dict(self) -> dict:
        return {
            "version": __version__,
            "seed": self.seed,
            "config_hash": self.config_hash,
            "replications": self.replications,
            "rejections": self.rejections,
            "fit_failures": self.fit_failures,
            "power_hat": self.power_hat,
            "mc_stderr": self.mc_stderr,
            "unreliable": self.unreliable,
            **self.extra,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _reject(z: np.ndarray, crit: float, sidedness: str) -> np.ndarray:
    if sidedness == "lower":
        return z <= -crit
    if sidedness == "upper":
        return z >= crit
    return np.abs(z) >= crit


def _run_block(config: SimConfig, start: int, stop: int) -> tuple[int, int, int]:
    """(rejections, failures, lower-tail rejections) for replicates [start, stop)."""
    sc = config.scenario
    crit = float(norm.ppf(1 - config.alpha / 2))
    side = config.resolved_sidedness
    if isinstance(sc, NbTrialSpec):
        rows = [simulate_nb_trial(sc, config.n_total, np.random.default_rng([config.seed, i])) for i in range(start, stop)]
        g = rows[0].g
        t = np.stack([r.t for r in rows])
        y = np.stack([r.y for r in rows])
        z, ok = batch_nb_score_statistics(g, t, y, sc.margin)
    else:
        a0 = solve_alpha0(sc)
        z = np.full(stop - start, np.nan)
        ok = np.zeros(stop - start, dtype=bool)
        for k, i in enumerate(range(start, stop)):
            d = simulate_binary_trial(sc, config.n_total, np.random.default_rng([config.seed, i]), a0)
            x, n = (d.x, d.n) if sc.stratified else (d.x.sum(axis=1, keepdims=True), d.n.sum(axis=1, keepdims=True))
            try:
                z[k] = cochran_score_statistic(x[1], n[1], x[0], n[0])
                ok[k] = True
            except ScorePowerError:
                pass
    zz = z[ok]
    return int(_reject(zz, crit, side).sum()), int((~ok).sum()), int((zz <= -crit).sum())


def default_workers() -> int:
    env = os.environ.get("SCOREPOWER_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"SCOREPOWER_WORKERS must be an integer, got {env!r}") from None
    return 1


def empirical_power(config: SimConfig, progress: Callable[[int, int], None] | None = None) -> SimResult:
    """Rejection rate of the matching score test over simulated trials.

    ``progress(done, total)`` is called after each block of replicates.
    """
    blocks = [(s, min(s + config.block_size, config.replications)) for s in range(0, config.replications, config.block_size)]
    rej = fail = lower = done = 0
    if config.workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = [pool.submit(_run_block, config, s, e) for s, e in blocks]
            for (s, e), fut in zip(blocks, futures):
                r, f, lo = fut.result()
                rej, fail, lower, done = rej + r, fail + f, lower + lo, done + (e - s)
                if progress:
                    progress(done, config.replications)
    else:
        for s, e in blocks:
            r, f, lo = _run_block(config, s, e)
            rej, fail, lower, done = rej + r, fail + f, lower + lo, done + (e - s)
            if progress:
                progress(done, config.replications)
    return SimResult(
        rej,
        config.replications,
        fail,
        config.seed,
        config.config_hash(),
        {"n_total": config.n_total, "sidedness": config.resolved_sidedness, "lower_tail_rejections": lower},
    )
