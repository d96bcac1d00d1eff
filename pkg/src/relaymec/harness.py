"""Experiment configuration, parameter sweeps, CSV output and simulation checks.

Configuration files are JSON. Powers are given in milliwatts (``p_max_mw``,
``power_mw``) while channel thresholds stay in watts, as in::

    {
      "a": 0.001, "qc_r": 0.05, "qc_h": 0.05, "p_max_mw": 10,
      "channel": {"type": "rayleigh", "gamma_sr": 0.01, "gamma_rs": 0.01,
                  "gamma_rh": 0.01, "gamma_hr": 0.01},
      "solver": {"delta": 1e-4, "k": 1},
      "schemes": ["MART", "MARE_RAYLEIGH", "ALLRS", "ALLHS"],
      "sweep": {"variable": "a", "from": 0.001, "to": 0.096, "step": 0.005},
      "sim": {"n_slots": 10000000, "seed": 1, "warmup_fraction": 0.1},
      "validate": {"tolerance": 0.03, "probes": [{"power_mw": 4, "rho": 0.5}]}
    }
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .channel import channel_from_dict
from .errors import ConfigError, DomainError
from .perf import Decision, SystemParams, art_components, mean_response_time
from .sim import SimConfig, SimReport, run_simulation
from .solve import (
    Solution,
    SolverConfig,
    baseline,
    exhaustive_oracle,
    solve_mare_general,
    solve_mare_rayleigh,
    solve_mart,
)

__all__ = [
    "SCHEMES",
    "SWEEP_VARIABLES",
    "CSV_COLUMNS",
    "Sweep",
    "ExperimentConfig",
    "ResultRow",
    "ProbeResult",
    "load_config",
    "config_from_dict",
    "sweep_values",
    "solve_scheme",
    "run_sweep",
    "emit_csv",
    "read_csv",
    "validate",
    "rho_sweep",
]

MW = 1e-3

SCHEMES = ("MART", "MARE", "MARE_RAYLEIGH", "ALLRS", "ALLHS", "MART_E", "MARE_E")
SWEEP_VARIABLES = ("a", "qc_r", "qc_h", "p_max")

CSV_COLUMNS = (
    "sweep_variable",
    "sweep_value",
    "a",
    "qc_r",
    "qc_h",
    "p_max_mw",
    "scheme",
    "feasible",
    "p_star_mw",
    "rho_star",
    "art_slots",
    "sap_mw",
    "are_mw_slots",
    "evaluations",
    "sim_art_slots",
    "sim_art_ci_slots",
    "sim_sap_mw",
)

DIVERGENT = "divergent"


@dataclass(frozen=True)
class Sweep:
    variable: str
    start: float
    stop: float
    step: float


@dataclass(frozen=True)
class ExperimentConfig:
    params: SystemParams
    solver: SolverConfig = SolverConfig()
    schemes: tuple = ("MART", "MARE_RAYLEIGH", "ALLRS", "ALLHS")
    sweep: Sweep | None = None
    sim: SimConfig | None = None
    sim_in_sweep: bool = False
    oracle_step: float = 1e-3
    tolerance: float = 0.03
    probes: tuple = ()


def _num(d, key, default=None):
    if key not in d:
        if default is not None:
            return default
        raise ConfigError(f"{key} required")
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key} must be a number, got {v!r}")
    return float(v)


def config_from_dict(d: dict) -> ExperimentConfig:
    """Validate a parsed JSON document and build an :class:`ExperimentConfig`."""
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    if "channel" not in d:
        raise ConfigError("channel required")
    try:
        channel = channel_from_dict(d["channel"])
    except (DomainError, TypeError, AttributeError) as e:
        raise ConfigError(f"channel: {e}") from None
    a, qc_r, qc_h = _num(d, "a"), _num(d, "qc_r"), _num(d, "qc_h")
    p_max_mw = _num(d, "p_max_mw")
    try:
        params = SystemParams(a, qc_r, qc_h, channel, p_max_mw * MW)
    except DomainError as e:
        raise ConfigError(str(e)) from None

    s = d.get("solver", {})
    try:
        solver = SolverConfig(
            delta=_num(s, "delta", 1e-4),
            k_partitions=int(_num(s, "k", 1)),
            power_unit=_num(s, "power_unit_mw", 1.0) * MW,
        )
    except DomainError as e:
        raise ConfigError(f"solver: {e}") from None

    schemes = tuple(str(x).upper() for x in d.get("schemes", ExperimentConfig.schemes))
    bad = [x for x in schemes if x not in SCHEMES]
    if bad or not schemes:
        raise ConfigError(f"schemes: unknown {bad}; choose from {list(SCHEMES)}")

    sweep = None
    if d.get("sweep") is not None:
        w = d["sweep"]
        var = w.get("variable")
        if var not in SWEEP_VARIABLES:
            raise ConfigError(f"sweep.variable must be one of {list(SWEEP_VARIABLES)}")
        sweep = Sweep(var, _num(w, "from"), _num(w, "to"), _num(w, "step"))
        if not sweep.step > 0:
            raise ConfigError("sweep.step must be positive")
        if sweep.stop < sweep.start:
            raise ConfigError("sweep range is empty (to < from)")

    sim, in_sweep = None, False
    if d.get("sim") is not None:
        m = d["sim"]
        try:
            sim = SimConfig(
                n_slots=int(_num(m, "n_slots", 10_000_000)),
                seed=int(_num(m, "seed", 0.0)),
                warmup_fraction=_num(m, "warmup_fraction", 0.1),
            )
        except DomainError as e:
            raise ConfigError(f"sim: {e}") from None
        in_sweep = bool(m.get("in_sweep", False))

    v = d.get("validate", {})
    probes = []
    for i, p in enumerate(v.get("probes", [])):
        try:
            probes.append(Decision(float(p["power_mw"]) * MW, float(p["rho"])))
        except (KeyError, TypeError, ValueError):
            raise ConfigError(f"validate.probes[{i}] needs numeric power_mw and rho") from None
    tolerance = _num(v, "tolerance", 0.03)
    oracle_step = _num(d, "oracle_step", 1e-3)
    if not (tolerance > 0 and oracle_step > 0):
        raise ConfigError("tolerance and oracle_step must be positive")
    return ExperimentConfig(params, solver, schemes, sweep, sim, in_sweep, oracle_step,
                            tolerance, tuple(probes))


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from None
    return config_from_dict(doc)


def sweep_values(sweep: Sweep) -> np.ndarray:
    """Grid ``start + i*step``, including ``stop`` when within half a step."""
    n = int(math.floor((sweep.stop - sweep.start) / sweep.step + 0.5))
    vals = sweep.start + sweep.step * np.arange(n + 1)
    return np.round(vals, 12)


def _with_value(params: SystemParams, variable: str, value: float) -> SystemParams:
    if variable == "p_max":
        return params.replace(p_max=value * MW)
    return params.replace(**{variable: value})


def solve_scheme(scheme: str, params: SystemParams, solver: SolverConfig, oracle_step=1e-3) -> Solution:
    scheme = scheme.upper()
    if scheme == "MART":
        return solve_mart(params, solver)
    if scheme == "MARE":
        return solve_mare_general(params, solver)
    if scheme == "MARE_RAYLEIGH":
        return solve_mare_rayleigh(params, solver)
    if scheme in ("ALLRS", "ALLHS"):
        return baseline(scheme, params)
    if scheme == "MART_E":
        return exhaustive_oracle("ART", params, oracle_step)
    if scheme == "MARE_E":
        return exhaustive_oracle("ARE", params, oracle_step)
    raise ConfigError(f"unknown scheme {scheme!r}")


@dataclass
class ResultRow:
    sweep_variable: str
    sweep_value: float
    a: float
    qc_r: float
    qc_h: float
    p_max_mw: float
    scheme: str
    feasible: bool
    p_star_mw: float
    rho_star: float
    art_slots: float
    sap_mw: float
    are_mw_slots: float
    evaluations: int
    sim_art_slots: float = math.nan
    sim_art_ci_slots: float = math.nan
    sim_sap_mw: float = math.nan


def _row(variable, value, params: SystemParams, scheme: str, sol: Solution) -> ResultRow:
    m = sol.metrics
    if sol.feasible and m is not None:
        art, sap_mw, are_mw = m.t, m.sap / MW, m.are / MW
    else:
        art = sap_mw = are_mw = math.inf
    return ResultRow(
        variable, value, params.a, params.qc_r, params.qc_h, params.p_max / MW, scheme,
        bool(sol.feasible), sol.p_star / MW, sol.rho_star, art, sap_mw, are_mw, int(sol.evaluations),
    )


def run_sweep(config: ExperimentConfig, progress=None) -> list[ResultRow]:
    """One row per (sweep point, scheme), ordered by sweep value then scheme order."""
    if config.sweep is None:
        points = [("", math.nan, config.params)]
    else:
        points = [
            (config.sweep.variable, float(v), _with_value(config.params, config.sweep.variable, float(v)))
            for v in sweep_values(config.sweep)
        ]
    rows = []
    for variable, value, params in points:
        for scheme in config.schemes:
            sol = solve_scheme(scheme, params, config.solver, config.oracle_step)
            row = _row(variable, value, params, scheme, sol)
            if config.sim is not None and config.sim_in_sweep and row.feasible:
                rep = run_simulation(params, Decision(sol.p_star, sol.rho_star), config.sim)
                row.sim_art_slots = rep.mean_response
                row.sim_art_ci_slots = rep.ci_half_width
                row.sim_sap_mw = rep.empirical_sap / MW
            rows.append(row)
            if progress is not None:
                progress(row)
    return rows


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.16e}"
    return str(v)


def emit_csv(rows, path=None) -> str:
    """Write rows as CSV (LF line endings, UTF-8). Returns the text as well."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


_INT_COLS = {"evaluations"}
_STR_COLS = {"sweep_variable", "scheme"}


def read_csv(path) -> list[ResultRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ConfigError(f"{path}: unexpected columns {reader.fieldnames}")
        out = []
        for rec in reader:
            kw = {}
            for f in fields(ResultRow):
                s = rec[f.name]
                if f.name in _STR_COLS:
                    kw[f.name] = s
                elif f.name == "feasible":
                    kw[f.name] = s == "1"
                elif f.name in _INT_COLS:
                    kw[f.name] = int(s)
                else:
                    kw[f.name] = float(s)
            out.append(ResultRow(**kw))
    return out


@dataclass
class ProbeResult:
    power: float
    rho: float
    analytic_art: float
    sim_art: float
    art_rel_error: float
    ci_half_width: float
    analytic_sap: float
    sim_sap: float
    sap_rel_error: float
    status: str
    sim_divergent: bool = False

    @property
    def passed(self) -> bool:
        return self.status != "fail"


def _sim_divergent(rep: SimReport) -> bool:
    backlog = rep.in_flight_at_end
    return backlog > max(100, 0.01 * (rep.completed + backlog))


def validate(config: ExperimentConfig, probes=None) -> list[ProbeResult]:
    """Compare analytic ART/SAP with simulation at each probe.

    Probes default to the configured ones, or else to the operating points
    chosen by the configured schemes at the base parameters.
    """
    if config.sim is None:
        raise ConfigError("sim required for validation")
    params = config.params
    if probes is None:
        probes = list(config.probes)
    if not probes:
        for scheme in config.schemes:
            sol = solve_scheme(scheme, params, config.solver, config.oracle_step)
            if math.isfinite(sol.p_star):
                probes.append(Decision(sol.p_star, sol.rho_star))
    out = []
    for d in probes:
        m = art_components(params, d)
        rep = run_simulation(params, d, config.sim)
        divergent = _sim_divergent(rep)
        if not math.isfinite(m.t):
            out.append(ProbeResult(d.power, d.rho, m.t, rep.mean_response, math.nan,
                                   rep.ci_half_width, m.sap, rep.empirical_sap, math.nan,
                                   DIVERGENT, divergent))
            continue
        e_t = abs(rep.mean_response / m.t - 1.0) if rep.completed else math.inf
        e_s = abs(rep.empirical_sap / m.sap - 1.0)
        ok = e_t <= config.tolerance and e_s <= config.tolerance
        out.append(ProbeResult(d.power, d.rho, m.t, rep.mean_response, e_t, rep.ci_half_width,
                               m.sap, rep.empirical_sap, e_s, "pass" if ok else "fail", divergent))
    return out


def rho_sweep(params: SystemParams, powers_mw=(3, 6, 9, 10), rho_step: float = 0.01):
    """(rho, power_mw, art) triples at fixed powers, rho on a regular grid."""
    n = int(math.floor(1.0 / rho_step + 1e-9))
    rhos = np.round(rho_step * np.arange(n + 1), 12)
    rows = []
    for p in powers_mw:
        art = mean_response_time(params, p * MW, rhos)
        rows.extend((float(r), float(p), float(t)) for r, t in zip(rhos, art))
    return rows


def emit_rho_sweep_csv(triples, path=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("rho", "power_mw", "art_slots"))
    for r, p, t in triples:
        w.writerow((_fmt(r), _fmt(p), _fmt(t)))
    text = buf.getvalue()
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text
