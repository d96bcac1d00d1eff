"""MART / MARE solvers, the two baselines and brute-force grid oracles.

Objectives are the vectorized surfaces from :mod:`relaymec.perf`
(``mean_response_time`` for MART, ``response_energy`` for MARE). They are
called as ``objective(params, power, rho)`` and may return ``inf``.

The rho-search tolerance ``delta`` is dimensionless. Searches over power use
the step ``delta * power_unit`` with ``power_unit`` defaulting to one
milliwatt, so ``delta = 1e-4`` resolves power to 0.1 microwatt.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .channel import RayleighChannel
from .errors import DomainError, InfeasibleError, UnsupportedModelError
from .perf import (
    Decision,
    PerfMetrics,
    SystemParams,
    art_components,
    check_constraints,
    feasible_rho_set,
    mean_response_time,
    power_lower_bound,
    response_energy,
)

__all__ = [
    "GOLDEN",
    "Scheme",
    "SolverConfig",
    "Solution",
    "golden_min",
    "k_partition_search",
    "k_partition_search_batch",
    "solve_mart",
    "solve_mare_general",
    "solve_mare_rayleigh",
    "exhaustive_oracle",
    "baseline",
    "OBJECTIVES",
]

GOLDEN = (3.0 - math.sqrt(5.0)) / 2.0

OBJECTIVES = {"ART": mean_response_time, "ARE": response_energy}


class Scheme(str, enum.Enum):
    MART = "MART"
    MARE = "MARE"
    MARE_RAYLEIGH = "MARE_RAYLEIGH"
    ALLRS = "ALLRS"
    ALLHS = "ALLHS"
    ORACLE = "ORACLE"


@dataclass(frozen=True)
class SolverConfig:
    delta: float = 1e-4
    k_partitions: int = 1
    power_unit: float = 1e-3

    def __post_init__(self):
        if not self.delta > 0:
            raise DomainError("delta must be positive")
        if int(self.k_partitions) != self.k_partitions or self.k_partitions < 1:
            raise DomainError("k_partitions must be a positive integer")
        if not self.power_unit > 0:
            raise DomainError("power_unit must be positive")

    @property
    def golden(self) -> float:
        return GOLDEN

    @property
    def power_step(self) -> float:
        return self.delta * self.power_unit


@dataclass(frozen=True)
class Solution:
    p_star: float
    rho_star: float
    objective: float
    scheme: Scheme
    feasible: bool
    evaluations: int = 0
    metrics: PerfMetrics | None = None
    reason: str = ""

    @classmethod
    def infeasible(cls, scheme, reason, evaluations=0) -> "Solution":
        return cls(math.nan, math.nan, math.inf, Scheme(scheme), False, evaluations, None, reason)


def _finish(params, scheme, power, rho, objective_value, evaluations) -> Solution:
    if not math.isfinite(objective_value):
        return Solution.infeasible(scheme, "objective unbounded", evaluations)
    d = Decision(float(power), float(rho))
    violations = check_constraints(params, d)
    return Solution(
        d.power,
        d.rho,
        float(objective_value),
        Scheme(scheme),
        not violations,
        evaluations,
        art_components(params, d),
        ",".join(violations),
    )


def _golden_lockstep(f, lo, hi, delta):
    """Golden-section brackets for many independent 1-D problems at once.

    ``f(x, idx)`` evaluates problem ``idx[i]`` at ``x[i]``. Each bracket is
    narrowed until its width is at most ``delta``.
    """
    r1 = np.array(lo, dtype=float, copy=True)
    r4 = np.array(hi, dtype=float, copy=True)
    evals = 0
    active = (r4 - r1) > delta
    while active.any():
        idx = np.flatnonzero(active)
        w = r4[idx] - r1[idx]
        r2 = r1[idx] + GOLDEN * w
        r3 = r4[idx] - GOLDEN * w
        f2 = np.asarray(f(r2, idx), dtype=float)
        f3 = np.asarray(f(r3, idx), dtype=float)
        evals += 2 * len(idx)
        left = f2 < f3
        r4[idx[left]] = r3[left]
        r1[idx[~left]] = r2[~left]
        active[idx] = (r4[idx] - r1[idx]) > delta
    return r1, r4, evals


def golden_min(objective: Callable[[float], float], lo: float, hi: float, delta: float):
    """Minimize a unimodal scalar function on ``[lo, hi]``.

    Returns ``(x, objective(x))`` where ``x`` is the midpoint of the final
    bracket of width at most ``delta``.
    """
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo!r}, {hi!r}]")
    if not delta > 0:
        raise DomainError("delta must be positive")

    def f(x, _idx):
        return [objective(float(v)) for v in x]

    r1, r4, _ = _golden_lockstep(f, [lo], [hi], delta)
    x = 0.5 * (r1[0] + r4[0])
    return float(x), float(objective(x))


def k_partition_search_batch(objective, params: SystemParams, powers, config: SolverConfig):
    """Best rho at each power, following the K-partition golden search.

    Returns ``(rho_star, value, evaluations)``. Powers with no feasible rho get
    ``rho_star = nan`` and ``value = inf``.
    """
    powers = np.atleast_1d(np.asarray(powers, dtype=float))
    a, delta, K = params.a, config.delta, int(config.k_partitions)
    q_sr, q_rs, q_rh, q_hr = params.link_probabilities(powers)
    m = np.minimum(np.minimum(q_rh, params.qc_h), q_hr)
    lo = np.maximum(0.0, 1.0 - m / a)
    hi = np.full_like(powers, min(1.0, params.qc_r / a))
    ok = (
        (powers >= 0)
        & (powers <= params.p_max)
        & (a < q_sr)
        & (a < q_rs)
        & ((params.qc_r + m) / a > 1.0)
    )
    # open endpoints are pulled inside by delta
    lo_c = np.where(m <= a, lo + delta, lo)
    hi_c = hi - delta if params.qc_r <= a else hi
    narrow = lo_c > hi_c
    if narrow.any():
        mid = 0.5 * (lo + hi)
        lo_c = np.where(narrow, mid, lo_c)
        hi_c = np.where(narrow, mid, hi_c)

    idx_ok = np.flatnonzero(ok)
    rho_star = np.full_like(powers, np.nan)
    best = np.full_like(powers, np.inf)
    if idx_ok.size == 0:
        return rho_star, best, 0
    p_ok, l_ok, u_ok = powers[idx_ok], lo_c[idx_ok], hi_c[idx_ok]

    def f(r, sel):
        return objective(params, p_ok[sel], r)

    all_idx = np.arange(idx_ok.size)
    r_best = l_ok.copy()
    v_best = np.asarray(f(r_best, all_idx), dtype=float)
    evals = idx_ok.size
    width = (u_ok - l_ok) / K
    for k in range(1, K + 1):
        r1, r4, n = _golden_lockstep(f, l_ok + width * (k - 1), l_ok + width * k, delta)
        evals += n
        mid = 0.5 * (r1 + r4)
        v_mid = np.asarray(f(mid, all_idx), dtype=float)
        evals += idx_ok.size
        better = v_mid < v_best
        r_best[better] = mid[better]
        v_best[better] = v_mid[better]
    rho_star[idx_ok] = r_best
    best[idx_ok] = v_best
    return rho_star, best, evals


def k_partition_search(objective, params: SystemParams, power: float, config: SolverConfig) -> float:
    """Best task-assignment probability at a fixed power."""
    if not feasible_rho_set(params, power).feasible:
        raise InfeasibleError(f"no feasible rho at power {power!r} W")
    rho, _, _ = k_partition_search_batch(objective, params, [power], config)
    return float(rho[0])


def _infeasible_reason(params: SystemParams, power: float) -> str:
    s = feasible_rho_set(params, power)
    if s.reason == "rho-interval empty":
        return "qc_r + min(q_rh, qc_h, q_hr) <= a"
    return f"{s.reason} violated at p_max"


def solve_mart(params: SystemParams, config: SolverConfig | None = None) -> Solution:
    """Minimum-ART operating point: full power, then 1-D convex search over rho."""
    config = config or SolverConfig()
    p = params.p_max
    if not feasible_rho_set(params, p).feasible:
        return Solution.infeasible(Scheme.MART, _infeasible_reason(params, p))
    cfg = SolverConfig(config.delta, 1, config.power_unit)
    rho, val, n = k_partition_search_batch(mean_response_time, params, [p], cfg)
    return _finish(params, Scheme.MART, p, rho[0], val[0], n)


def _power_grid(params: SystemParams, step: float):
    """``P_lo + i*step`` for i >= 1 up to ``p_max``, closed with ``p_max`` itself."""
    p_lo = power_lower_bound(params)
    if not p_lo < params.p_max:
        return np.empty(0)
    n = int(math.floor((params.p_max - p_lo) / step))
    grid = p_lo + step * np.arange(1, n + 1)
    grid = grid[grid <= params.p_max]
    if grid.size == 0 or grid[-1] < params.p_max:
        grid = np.append(grid, params.p_max)
    return grid


def solve_mare_general(
    params: SystemParams, config: SolverConfig | None = None, chunk: int = 20000
) -> Solution:
    """Minimum-ARE point by scanning power in steps and searching rho at each."""
    config = config or SolverConfig()
    grid = _power_grid(params, config.power_step)
    if grid.size == 0:
        return Solution.infeasible(Scheme.MARE, "power lower bound >= p_max")
    rhos = np.empty_like(grid)
    vals = np.empty_like(grid)
    evals = 0
    for s in range(0, grid.size, chunk):
        r, v, n = k_partition_search_batch(response_energy, params, grid[s : s + chunk], config)
        rhos[s : s + chunk], vals[s : s + chunk] = r, v
        evals += n
    i = int(np.argmin(vals))  # first minimum, i.e. smallest power on ties
    if not math.isfinite(vals[i]):
        return Solution.infeasible(Scheme.MARE, "no feasible power in grid", evals)
    return _finish(params, Scheme.MARE, grid[i], rhos[i], vals[i], evals)


def solve_mare_rayleigh(params: SystemParams, config: SolverConfig | None = None) -> Solution:
    """Minimum-ARE point for Rayleigh links: golden search over power, rho search inside."""
    config = config or SolverConfig()
    if not isinstance(params.channel, RayleighChannel):
        raise UnsupportedModelError("the power golden search requires a Rayleigh channel")
    step = config.power_step
    p1 = power_lower_bound(params) + step
    p4 = params.p_max
    if not p1 <= p4:
        return Solution.infeasible(Scheme.MARE_RAYLEIGH, "power lower bound >= p_max")
    evals = 0
    while p4 - p1 > step:
        w = p4 - p1
        p2 = p1 + GOLDEN * w
        p3 = p4 - GOLDEN * w
        _, v, n = k_partition_search_batch(response_energy, params, [p2, p3], config)
        evals += n
        if v[0] < v[1]:
            p4 = p3
        else:
            p1 = p2
    p_star = 0.5 * (p1 + p4)
    rho, v, n = k_partition_search_batch(response_energy, params, [p_star], config)
    return _finish(params, Scheme.MARE_RAYLEIGH, p_star, rho[0], v[0], evals + n)


def exhaustive_oracle(
    objective: str,
    params: SystemParams,
    step: float,
    p_step: float | None = None,
    chunk_cells: int = 2_000_000,
) -> Solution:
    """Grid argmin of ART or ARE over power in (P_lo, p_max] and rho in [0, 1].

    ``step`` spaces the rho grid. Powers run downward from ``p_max`` in steps of
    ``p_step`` watts (default ``step`` milliwatts).
    """
    if objective not in OBJECTIVES:
        raise DomainError(f"objective must be one of {sorted(OBJECTIVES)}")
    if not step > 0:
        raise DomainError("step must be positive")
    p_step = step * 1e-3 if p_step is None else p_step
    fn = OBJECTIVES[objective]
    p_lo = power_lower_bound(params)
    if not p_lo < params.p_max:
        return Solution.infeasible(Scheme.ORACLE, "power lower bound >= p_max")
    n_p = int(math.ceil((params.p_max - p_lo) / p_step))
    powers = params.p_max - p_step * np.arange(n_p + 1)
    powers = powers[powers > p_lo]
    n_r = int(math.floor(1.0 / step + 1e-9))
    rhos = step * np.arange(n_r + 1)
    rows = max(1, chunk_cells // rhos.size)
    best, best_p, best_r = math.inf, math.nan, math.nan
    for s in range(0, powers.size, rows):
        block = fn(params, powers[s : s + rows, None], rhos[None, :])
        k = int(np.argmin(block))
        if block.flat[k] < best:
            i, j = divmod(k, rhos.size)
            best, best_p, best_r = float(block.flat[k]), powers[s + i], rhos[j]
    evals = powers.size * rhos.size
    if not math.isfinite(best):
        return Solution.infeasible(Scheme.ORACLE, "no feasible grid point", evals)
    return _finish(params, Scheme.ORACLE, best_p, best_r, best, evals)


def baseline(scheme, params: SystemParams) -> Solution:
    """All tasks computed at the relay (ALLRS) or the higher station (ALLHS), at full power."""
    scheme = Scheme(scheme)
    if scheme not in (Scheme.ALLRS, Scheme.ALLHS):
        raise DomainError(f"{scheme.value} is not a baseline")
    d = Decision(params.p_max, 1.0 if scheme is Scheme.ALLRS else 0.0)
    metrics = art_components(params, d)
    violations = check_constraints(params, d)
    return Solution(d.power, d.rho, metrics.t, scheme, not violations, 1, metrics, ",".join(violations))
