"""Scenario grids for the published design tables and the functions that
compute one output row per scenario.

Power columns are reported in percent.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Callable

from .binomial_exact import TwoSampleBinomialSpec, exact_power
from .logistic_design import LogisticScenario, logistic_design
from .nb_design import NbTrialSpec, nb_design
from .simulator import SimConfig, empirical_power

TABLE_IDS = (1, 2, 4, 5, 6)


def _pct(p: float) -> float:
    return 100.0 * p


# ----------------------------------------------------------------------
# two-sample binomial


def table1_specs() -> list[TwoSampleBinomialSpec]:
    return [
        TwoSampleBinomialSpec(60, 30, 0.1, 0.3, 0.0),
        TwoSampleBinomialSpec(80, 80, 0.35, 0.4, 0.15),
    ]


def table1_row(spec: TwoSampleBinomialSpec) -> dict:
    row = {"n1": spec.n1, "n0": spec.n0, "p1": spec.p1, "p0": spec.p0, "margin": spec.margin}
    row["score"] = _pct(exact_power(spec, "score"))
    row["wald"] = _pct(exact_power(spec, "wald"))
    row["wald2"] = _pct(exact_power(spec, "wald2")) if spec.margin == 0 else None
    return row


# ----------------------------------------------------------------------
# negative binomial


def table2_specs() -> list[NbTrialSpec]:
    """Superiority grid: rate ratio 0.4, 1:1 allocation."""
    out = []
    for power, wc, tau, lam, kappa in itertools.product((0.8, 0.9), (0.0, 0.25), (3.0, 1.0), (1.1, 0.8), (0.9, 1.2)):
        out.append(NbTrialSpec(lam, 0.4, kappa, tau, dropout=wc, target_power=power))
    return out


def table4_specs() -> list[NbTrialSpec]:
    """Noninferiority grid: margin 1.25, kappa 1, one-year follow-up."""
    out = []
    for ratio, wc, lam in itertools.product((0.8, 1.0), (0.0, 0.25), (1.0, 1.5)):
        out.append(NbTrialSpec(lam, ratio, 1.0, 1.0, dropout=wc, margin=1.25, target_power=0.8))
    return out


def nb_row(spec: NbTrialSpec) -> dict:
    res = nb_design(spec)
    return {
        "w_c": _pct(spec.dropout),
        "lambda0": spec.lambda0,
        "rate_ratio": spec.rate_ratio,
        "kappa": spec.kappa,
        "tau_c": spec.tau_c,
        "margin": spec.margin,
        "target_power": _pct(spec.target_power),
        "N_new": res.n_new,
        "N_SM": res.n_sm,
        "N_s0": res.n_s0,
        "ZL": res.comparators["zhu_lakkis"],
        "P_new": _pct(res.power["new"]),
        "P_SM": _pct(res.power["sm"]),
        "P_s0": _pct(res.power["s0"]),
        "P_ZL": _pct(res.power["zhu_lakkis"]),
    }


# ----------------------------------------------------------------------
# logistic


def table5_scenarios() -> list[tuple[LogisticScenario, float]]:
    out = []
    for pi, mean_rate, or_t, power in itertools.product(
        ((0.25, 0.25, 0.25, 0.25), (0.4, 0.1, 0.1, 0.4)), (0.15, 0.5), (2.0, 3.0), (0.8, 0.9, 0.95)
    ):
        out.append((LogisticScenario.from_four_cells(pi, 2.0, or_t, mean_rate), power))
    return out


def table6_scenarios() -> list[tuple[LogisticScenario, float]]:
    out = []
    for confounding, share, mean_rate, power in itertools.product((False, True), (0.05, 0.5, 0.75), (0.02, 0.15), (0.8, 0.9)):
        pi = (0.8 * (1 - share), 0.2 * (1 - share), 0.2 * share, 0.8 * share)
        or_s = 2.0 if confounding else 1.0
        out.append((LogisticScenario.from_four_cells(pi, or_s, 2.0, mean_rate, stratified=confounding), power))
    return out


def logistic_row(item: tuple[LogisticScenario, float]) -> dict:
    sc, power = item
    d = logistic_design(sc, target_power=power)
    r = d.result
    at_sm = logistic_design(sc, target_power=power, n_query=r.n_sm).result.power
    cells = sc.cell_array
    return {
        "Pi1": float(cells[0, 0]),
        "Pi2": float(cells[0, 1]),
        "Pi3": float(cells[1, 0]),
        "Pi4": float(cells[1, 1]),
        "stratified": sc.stratified,
        "or_stratum": math.exp(sc.alpha_strata[1]),
        "or_treatment": math.exp(sc.beta),
        "mean_rate": sc.mean_rate,
        "target_power": _pct(power),
        "alpha0": d.alpha0,
        "N_new": r.n_new,
        "N_SM": r.n_sm,
        "N_s0": r.n_s0,
        "P_new": _pct(r.power["new"]),
        "P_SM": _pct(r.power["sm"]),
        "P_s0": _pct(r.power["s0"]),
        "P_new_at_N_SM": _pct(at_sm["new"]),
        "P_SM_at_N_SM": _pct(at_sm["sm"]),
        "P_s0_at_N_SM": _pct(at_sm["s0"]),
    }


# ----------------------------------------------------------------------


_TABLES: dict[int, tuple[Callable[[], list], Callable]] = {
    1: (table1_specs, table1_row),
    2: (table2_specs, nb_row),
    4: (table4_specs, nb_row),
    5: (table5_scenarios, logistic_row),
    6: (table6_scenarios, logistic_row),
}


def table_scenarios(table: int) -> list:
    if table not in _TABLES:
        raise ValueError(f"table must be one of {TABLE_IDS}, got {table!r}")
    return _TABLES[table][0]()


def _simulated(item, reps: int, seed: int, workers: int) -> float:
    if isinstance(item, tuple):
        sc, power = item
        n = logistic_design(sc, target_power=power).result.n_new
    elif isinstance(item, NbTrialSpec):
        sc = item
        n = nb_design(item).n_new
    else:
        raise ValueError("simulation is not available for this table")
    res = empirical_power(SimConfig(sc, n, reps, seed=seed, workers=workers))
    return _pct(res.power_hat)


def table_rows(table: int, *, workers: int = 1, sim_reps: int = 0, seed: int = 20240101) -> list[dict]:
    """All rows of a table, in grid order.

    With ``sim_reps > 0`` each row also gets a ``SIM`` column: the simulated
    power at ``N_new``.
    """
    items = table_scenarios(table)
    row_fn = _TABLES[table][1]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row_fn, items))
    else:
        rows = [row_fn(it) for it in items]
    if sim_reps > 0:
        for row, it in zip(rows, items):
            row["SIM"] = _simulated(it, sim_reps, seed, workers)
    return rows
