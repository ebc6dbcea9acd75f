"""Command-line front end.

Every subcommand takes its inputs as flags or from a JSON ``--config`` file
(flags win).  A JSON manifest written with ``--json`` can be passed back as
``--config`` to reproduce the run.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .binomial_exact import TwoSampleBinomialSpec, exact_power
from .exceptions import ScorePowerError
from .family import Family
from .glm_core import Dataset, score_confidence_interval, z2_trace
from .logistic_design import LogisticScenario, logistic_design
from .nb_design import NbTrialSpec, nb_design, trial_dataset
from .simulator import SimConfig, arm_sizes, default_workers, empirical_power
from .tables import TABLE_IDS, table_rows

TOOL = "scorepower"


class ConfigError(ValueError):
    """Invalid or missing input; the message names the field."""


# ----------------------------------------------------------------------
# input schemas: name -> (parser, default, help).  ``_REQUIRED`` marks
# fields without a default.

_REQUIRED = object()


def _bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {v!r}")


def _int(v) -> int:
    if isinstance(v, bool):
        raise ValueError(f"expected an integer, got {v!r}")
    f = float(v)
    if not f.is_integer():
        raise ValueError(f"expected an integer, got {v!r}")
    return int(f)


def _opt_float(v):
    return None if v is None else float(v)


def _opt_int(v):
    return None if v is None else _int(v)


def _floats(v) -> tuple:
    if isinstance(v, str):
        v = [p for p in v.replace(",", " ").split() if p]
    return tuple(float(p) for p in v)


def _choice(*options: str) -> Callable[[Any], str]:
    def parse(v):
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {v!r}")
        return v

    return parse


_NB_FIELDS = {
    "lambda0": (float, _REQUIRED, "control event rate per unit time"),
    "rate_ratio": (float, _REQUIRED, "true rate ratio lambda1/lambda0"),
    "kappa": (float, _REQUIRED, "dispersion (Var = mu + kappa mu^2)"),
    "tau_c": (float, _REQUIRED, "planned follow-up"),
    "dropout": (float, 0.0, "probability of dropout before tau_c"),
    "dropout_treated": (_opt_float, None, "treated-arm dropout, if different"),
    "margin": (float, 1.0, "null rate ratio M0 (1 for superiority)"),
    "theta": (float, 1.0, "allocation ratio n1/n0"),
    "alpha": (float, 0.05, "two-sided level"),
    "target_power": (float, 0.8, "target power"),
    "L": (_int, 100, "follow-up grid size"),
    "J": (_int, 200, "outcome truncation cap"),
    "variance": (_choice("marginal", "conditional"), "marginal", "score variance under the truth"),
    "rounding": (_choice("total", "per_arm"), "total", "sample-size rounding"),
    "n_query": (_opt_int, None, "report powers at this N (default N_new)"),
}

_LOGISTIC_FIELDS = {
    "pi": (_floats, _REQUIRED, "cell shares (g,z) = (0,1),(0,2),(1,1),(1,2)"),
    "or_stratum": (float, _REQUIRED, "stratum odds ratio"),
    "or_treatment": (float, _REQUIRED, "treatment odds ratio"),
    "mean_rate": (float, _REQUIRED, "overall response rate"),
    "stratified": (_bool, True, "adjust the test for strata"),
    "alpha": (float, 0.05, "two-sided level"),
    "target_power": (float, 0.8, "target power"),
    "n_query": (_opt_int, None, "report powers at this N (default N_new)"),
}

_BINOM_FIELDS = {
    "n1": (_int, _REQUIRED, "treated sample size"),
    "n0": (_int, _REQUIRED, "control sample size"),
    "p1": (float, _REQUIRED, "treated response probability"),
    "p0": (float, _REQUIRED, "control response probability"),
    "margin": (float, 0.0, "risk-difference margin"),
    "alpha": (float, 0.05, "two-sided level"),
    "direction": (_choice("lower", "upper"), "lower", "favourable direction of p1 - p0"),
    "convention": (_choice("directional", "nonreject"), "directional", "Wald handling of undefined statistics"),
}

_SIM_FIELDS = {
    "model": (_choice("nb", "logistic"), _REQUIRED, "scenario type"),
    "n_total": (_opt_int, None, "total sample size (default N_new)"),
    "replications": (_int, 20000, "simulated trials"),
    "seed": (_int, 20240101, "master seed"),
    "workers": (_opt_int, None, "worker processes (default $SCOREPOWER_WORKERS or 1)"),
    "sidedness": (_choice("lower", "upper", "two_sided"), None, "rejection region (default by scenario)"),
    **{k: v for k, v in _NB_FIELDS.items() if k not in ("n_query", "alpha", "target_power")},
    **{k: v for k, v in _LOGISTIC_FIELDS.items() if k not in ("n_query", "alpha", "target_power")},
    "alpha": (float, 0.05, "two-sided level"),
    "target_power": (float, 0.8, "target power used for the default N"),
}
_SIM_NB_KEYS = set(_NB_FIELDS) - {"n_query"}
_SIM_LOGISTIC_KEYS = set(_LOGISTIC_FIELDS) - {"n_query"}

_CI_FIELDS = {
    "data": (str, _REQUIRED, "CSV file: g,t,y for counts or g,stratum,y for binary outcomes"),
    "family": (_choice("negbin", "poisson", "bernoulli"), "negbin", "outcome model"),
    "level": (float, 0.95, "confidence level"),
    "xtol": (float, 1e-8, "endpoint tolerance"),
    "trace": (str, None, "write the Z^2 trace to this CSV"),
    "trace_from": (_opt_float, None, "trace grid start (default: interval-based)"),
    "trace_to": (_opt_float, None, "trace grid end"),
    "trace_points": (_int, 201, "trace grid points"),
}

_TABLE_FIELDS = {
    "table": (_int, _REQUIRED, f"table to reproduce, one of {TABLE_IDS}"),
    "simulate": (_int, 0, "add a SIM column with this many replications"),
    "seed": (_int, 20240101, "master seed for SIM"),
    "workers": (_opt_int, None, "worker processes (default $SCOREPOWER_WORKERS or 1)"),
}

_SCHEMAS: dict[str, dict] = {
    "nb-design": _NB_FIELDS,
    "nb-ni-design": _NB_FIELDS,
    "logistic-design": _LOGISTIC_FIELDS,
    "binom-exact": _BINOM_FIELDS,
    "simulate": _SIM_FIELDS,
    "ci-invert": _CI_FIELDS,
    "reproduce-tables": _TABLE_FIELDS,
}


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _load_config(path: str, command: str) -> dict:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    if not text.strip():
        raise ConfigError(f"config: {path} is empty")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: {path} is not valid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(obj, dict):
        raise ConfigError("config: top level must be an object")
    if "inputs" in obj:
        if obj.get("command", command) != command:
            raise ConfigError(f"config: manifest was written by {obj['command']!r}, not {command!r}")
        obj = obj["inputs"]
        if not isinstance(obj, dict):
            raise ConfigError("config: inputs must be an object")
    if not obj:
        raise ConfigError(f"config: {path} has no settings")
    return obj


def _model_schema(schema: dict, cli_values: dict, config: dict) -> dict:
    """Restrict the simulate schema to the chosen model's fields."""
    raw = cli_values.get("model") or config.get("model")
    if raw is None:
        raise ConfigError("model: required (use --model or the config file)")
    try:
        model = schema["model"][0](raw)
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from None
    keep, drop = (_SIM_NB_KEYS, _SIM_LOGISTIC_KEYS) if model == "nb" else (_SIM_LOGISTIC_KEYS, _SIM_NB_KEYS)
    for name in sorted(drop - keep):
        if cli_values.get(name) is not None or name in config:
            raise ConfigError(f"{name}: not a setting for model {model!r}")
    return {k: v for k, v in schema.items() if k in keep or k not in drop}


def resolve_inputs(command: str, cli_values: dict, config: dict | None) -> dict:
    """Merge defaults, config and flags, then parse every field."""
    schema = _SCHEMAS[command]
    config = config or {}
    unknown = sorted(set(config) - set(schema))
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown setting for {command}")
    if command == "simulate":
        schema = _model_schema(schema, cli_values, config)
    out = {}
    for name, (parse, default, _) in schema.items():
        if cli_values.get(name) is not None:
            raw = cli_values[name]
        elif name in config:
            raw = config[name]
        elif default is _REQUIRED:
            raise ConfigError(f"{name}: required (use {_flag(name)} or the config file)")
        else:
            raw = default
        try:
            out[name] = parse(raw) if raw is not None else None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{name}: {exc}") from None
    return out


# ----------------------------------------------------------------------
# commands; each returns (results, rows) where rows feed the CSV/text output


def _pct2(p: float) -> float:
    return round(100.0 * p, 2)


def _nb_spec(inp: dict) -> NbTrialSpec:
    keys = [k for k in _NB_FIELDS if k != "n_query"]
    return NbTrialSpec(**{k: inp[k] for k in keys})


def _cmd_nb(inp: dict, command: str) -> tuple[dict, list[dict]]:
    if command == "nb-ni-design" and not inp["margin"] > 1:
        raise ConfigError(f"margin: must exceed 1 for a noninferiority design, got {inp['margin']!r}")
    spec = _nb_spec(inp)
    res = nb_design(spec, inp["n_query"])
    results = res.as_dict()
    results["arms"] = {}
    rows = []
    for method, n in (("new", res.n_new), ("SM", res.n_sm), ("s0", res.n_s0), ("ZL", res.comparators["zhu_lakkis"])):
        n1, n0 = arm_sizes(n, spec.theta)
        results["arms"][method] = {"n1": n1, "n0": n0}
        key = method.lower() if method != "ZL" else "zhu_lakkis"
        rows.append({"method": method, "N": n, "n1": n1, "n0": n0, "power_at_N_query": _pct2(res.power[key])})
    return results, rows


def _cmd_logistic(inp: dict, command: str) -> tuple[dict, list[dict]]:
    if len(inp["pi"]) != 4:
        raise ConfigError(f"pi: expected 4 cell shares, got {len(inp['pi'])}")
    for name in ("or_stratum", "or_treatment"):
        if not inp[name] > 0:
            raise ConfigError(f"{name}: must be positive, got {inp[name]!r}")
    sc = LogisticScenario.from_four_cells(inp["pi"], inp["or_stratum"], inp["or_treatment"], inp["mean_rate"], inp["stratified"])
    d = logistic_design(sc, inp["alpha"], inp["target_power"], inp["n_query"])
    results = d.as_dict()
    share1 = float(sum(sc.cells[1]))
    theta = share1 / (1 - share1)
    rows = []
    results["arms"] = {}
    for method, n in (("new", d.result.n_new), ("SM", d.result.n_sm), ("s0", d.result.n_s0)):
        n1, n0 = arm_sizes(n, theta)
        results["arms"][method] = {"n1": n1, "n0": n0}
        rows.append({"method": method, "N": n, "n1": n1, "n0": n0, "power_at_N_query": _pct2(d.result.power[method.lower()])})
    return results, rows


def _cmd_binom(inp: dict, command: str) -> tuple[dict, list[dict]]:
    spec = TwoSampleBinomialSpec(inp["n1"], inp["n0"], inp["p1"], inp["p0"], inp["margin"], inp["alpha"], inp["direction"])
    stats = ("score", "wald", "wald2") if spec.margin == 0 else ("score", "wald")
    powers = {s: exact_power(spec, s, convention=inp["convention"]) for s in stats}
    rows = [{"statistic": s, "power": _pct2(p)} for s, p in powers.items()]
    return {"power": powers}, rows


def _cmd_simulate(inp: dict, command: str) -> tuple[dict, list[dict]]:
    if inp["model"] == "nb":
        spec = _nb_spec({**inp, "n_query": None})
        spec.check_feasible()
        scenario = spec
        n_default = nb_design(spec).n_new
    else:
        if len(inp["pi"]) != 4:
            raise ConfigError(f"pi: expected 4 cell shares, got {len(inp['pi'])}")
        scenario = LogisticScenario.from_four_cells(inp["pi"], inp["or_stratum"], inp["or_treatment"], inp["mean_rate"], inp["stratified"])
        n_default = logistic_design(scenario, inp["alpha"], inp["target_power"]).result.n_new
    n_total = inp["n_total"] if inp["n_total"] is not None else n_default
    workers = inp["workers"] if inp["workers"] is not None else default_workers()
    cfg = SimConfig(scenario, n_total, inp["replications"], inp["seed"], workers, inp["alpha"], inp["sidedness"])
    res = empirical_power(cfg)
    results = res.to_dict()
    rows = [{
        "n_total": n_total,
        "replications": res.replications,
        "fit_failures": res.fit_failures,
        "power": _pct2(res.power_hat),
        "mc_stderr": _pct2(res.mc_stderr),
        "unreliable": res.unreliable,
    }]
    return results, rows


def _read_ci_data(path: str, family: str) -> Dataset:
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            cols = reader.fieldnames or []
            records = list(reader)
    except OSError as exc:
        raise ConfigError(f"data: cannot read {path}: {exc.strerror}") from None
    need = ("g", "stratum", "y") if family == "bernoulli" else ("g", "t", "y")
    missing = [c for c in need if c not in cols]
    if missing:
        raise ConfigError(f"data: missing column {missing[0]!r} (need {', '.join(need)})")
    if not records:
        raise ConfigError("data: no rows")
    try:
        g = [float(r["g"]) for r in records]
        y = [float(r["y"]) for r in records]
        if family != "bernoulli":
            t = [float(r["t"]) for r in records]
    except ValueError as exc:
        raise ConfigError(f"data: {exc}") from None
    if family != "bernoulli":
        return trial_dataset(g, t, y)
    levels = sorted({r["stratum"] for r in records})
    z = np.zeros((len(records), len(levels)))
    z[:, 0] = 1.0
    for i, r in enumerate(records):
        j = levels.index(r["stratum"])
        if j > 0:
            z[i, j] = 1.0
    return Dataset(np.asarray(g), z, np.zeros(len(records)), np.asarray(y), 1.0)


def _family(name: str) -> Family:
    return {"negbin": Family.negbin(0.0), "poisson": Family.poisson(), "bernoulli": Family.bernoulli()}[name]


def _cmd_ci(inp: dict, command: str) -> tuple[dict, list[dict]]:
    data = _read_ci_data(inp["data"], inp["family"])
    fam = _family(inp["family"])
    ci = score_confidence_interval(data, fam, inp["level"], xtol=inp["xtol"])
    results = {"estimate": ci.estimate, "lower": ci.lower, "upper": ci.upper, "level": ci.level}
    if fam.kind.value != "bernoulli_logit":
        results.update({"ratio_estimate": math.exp(ci.estimate), "ratio_lower": math.exp(ci.lower), "ratio_upper": math.exp(ci.upper)})
    if inp["trace"]:
        lo = inp["trace_from"]
        hi = inp["trace_to"]
        if lo is None or hi is None:
            finite = [v for v in (ci.lower, ci.upper) if math.isfinite(v)]
            half = max((abs(v - ci.estimate) for v in finite), default=1.0)
            lo = ci.estimate - 2 * half if lo is None else lo
            hi = ci.estimate + 2 * half if hi is None else hi
        if not hi > lo or inp["trace_points"] < 2:
            raise ConfigError("trace_to: grid must be increasing with at least 2 points")
        betas = np.linspace(lo, hi, inp["trace_points"])
        z2 = z2_trace(data, fam, betas)
        with open(inp["trace"], "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["beta", "z2"])
            for b, v in zip(betas, z2):
                w.writerow([repr(float(b)), repr(float(v))])
        results["trace"] = inp["trace"]
    return results, [{k: v for k, v in results.items() if k != "trace"}]


def _cmd_tables(inp: dict, command: str) -> tuple[dict, list[dict]]:
    if inp["table"] not in TABLE_IDS:
        raise ConfigError(f"table: must be one of {', '.join(map(str, TABLE_IDS))}, got {inp['table']!r}")
    if inp["simulate"] < 0:
        raise ConfigError("simulate: must be nonnegative")
    workers = inp["workers"] if inp["workers"] is not None else default_workers()
    rows = table_rows(inp["table"], workers=workers, sim_reps=inp["simulate"], seed=inp["seed"])
    return {"rows": rows}, rows


_COMMANDS: dict[str, tuple[Callable, str]] = {
    "nb-design": (_cmd_nb, "negative binomial rate comparison: sample size and power"),
    "nb-ni-design": (_cmd_nb, "negative binomial noninferiority design (margin > 1)"),
    "logistic-design": (_cmd_logistic, "two-stratum logistic design"),
    "binom-exact": (_cmd_binom, "exact power of two-sample binomial tests"),
    "simulate": (_cmd_simulate, "Monte Carlo power of the score test"),
    "ci-invert": (_cmd_ci, "score confidence interval for the group effect from a CSV"),
    "reproduce-tables": (_cmd_tables, "sweep one of the published design grids"),
}


# ----------------------------------------------------------------------
# output


def _format_value(v) -> str:
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.2f}" if abs(v) >= 0.01 or v == 0 else f"{v:.6g}"
    if v is None:
        return ""
    return str(v)


def rows_to_csv(rows: list[dict], decimals: bool = True) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    cols = list(rows[0])
    for r in rows[1:]:
        cols.extend(k for k in r if k not in cols)
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _format_value(r.get(k)) if decimals else r.get(k) for k in cols})
    return buf.getvalue()


def rows_to_text(rows: list[dict]) -> str:
    if not rows:
        return ""
    cols = list(rows[0])
    cells = [[_format_value(r.get(c)) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if hasattr(obj, "item") and callable(obj.item):
        return _jsonable(obj.item())
    return obj


def config_hash(command: str, inputs: dict) -> str:
    blob = json.dumps({"command": command, "inputs": _jsonable(inputs)}, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def build_manifest(command: str, inputs: dict, results: dict) -> dict:
    return {
        "tool": TOOL,
        "version": __version__,
        "command": command,
        "config_hash": config_hash(command, inputs),
        "seed": inputs.get("seed"),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "inputs": _jsonable(inputs),
        "results": _jsonable(results),
    }


# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=TOOL, description="Power and sample size for score tests in GLMs.")
    parser.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    for name, (_, help_text) in _COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", help="JSON file of settings, or a manifest written with --json")
        fmt = p.add_mutually_exclusive_group()
        fmt.add_argument("--json", action="store_true", help="emit a JSON run manifest")
        fmt.add_argument("--csv", action="store_true", help="emit CSV")
        p.add_argument("--out", help="write output to this file instead of stdout")
        for field, (_, default, help_field) in _SCHEMAS[name].items():
            extra = "" if default is _REQUIRED or default is None else f" (default {default})"
            p.add_argument(_flag(field), dest=field, default=None, help=help_field + extra)
    return parser


def run(argv: list[str] | None = None) -> tuple[int, str]:
    """Parse ``argv`` and execute; returns ``(exit_code, output_text)``."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2, ""
    command = args.command
    cli_values = {k: getattr(args, k) for k in _SCHEMAS[command]}
    config = _load_config(args.config, command) if args.config else None
    inputs = resolve_inputs(command, cli_values, config)
    fn = _COMMANDS[command][0]
    results, rows = fn(inputs, command)
    if args.json:
        text = json.dumps(build_manifest(command, inputs, results), indent=2, sort_keys=False) + "\n"
    elif args.csv or command == "reproduce-tables":
        text = rows_to_csv(rows)
    else:
        text = rows_to_text(rows)
    if args.out:
        Path(args.out).write_text(text)
        return 0, ""
    return 0, text


def main(argv: list[str] | None = None) -> int:
    try:
        code, text = run(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ScorePowerError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if text:
        sys.stdout.write(text)
    return code
