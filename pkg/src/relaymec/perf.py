"""Analytic performance model of the source / relay / higher-station network.

A task generated at the source (SS) crosses the SS->RS link, is kept at the
relay (RS) with probability ``rho`` or forwarded to the higher station (HS),
and its result returns to the source via the RS->SS link. Every buffer is a
Geo/Geo/1 queue, so the average response time (ART) is a sum of
:func:`~relaymec.queueing.waiting_time` terms. The slot average power (SAP)
counts transmissions only, and the average response energy (ARE) is
``SAP * ART``.

The vectorized functions (:func:`mean_response_time`, :func:`response_energy`,
...) broadcast over ``power`` and ``rho`` arrays and return ``inf`` wherever
some queue is unstable, which makes them total objective surfaces for the
solvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import Link
from .errors import DomainError, InfeasibleError, UnachievableError
from .queueing import _w

__all__ = [
    "SystemParams",
    "Decision",
    "PerfMetrics",
    "FeasibleRhoSet",
    "GrowthCase",
    "art_components",
    "sap",
    "are",
    "mean_response_time",
    "slot_average_power",
    "response_energy",
    "check_constraints",
    "feasible_rho_set",
    "power_lower_bound",
    "rho_set_growth_case",
]

# relative slack for the H1/H2 boundary tests, where both sides of the
# comparison are often the same number computed along two routes
_CASE_RTOL = 1e-9


@dataclass(frozen=True)
class SystemParams:
    """Arrival probability, compute availabilities, channel and power cap (W)."""

    a: float
    qc_r: float
    qc_h: float
    channel: object
    p_max: float

    def __post_init__(self):
        if not 0 < self.a <= 1:
            raise DomainError(f"a must lie in (0, 1], got {self.a!r}")
        for name in ("qc_r", "qc_h"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise DomainError(f"{name} must lie in (0, 1], got {v!r}")
        if not (self.p_max > 0 and math.isfinite(self.p_max)):
            raise DomainError(f"p_max must be positive, got {self.p_max!r}")

    def link_probabilities(self, power):
        """``(q_sr, q_rs, q_rh, q_hr)`` at ``power``; zero where ``power <= 0``."""
        p = np.asarray(power, dtype=float)
        pos = p > 0
        safe = np.where(pos, p, 1.0)
        return tuple(
            np.where(pos, self.channel.service_probability(link, safe), 0.0)
            for link in (Link.SR, Link.RS, Link.RH, Link.HR)
        )

    def replace(self, **changes) -> "SystemParams":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class Decision:
    power: float
    rho: float


@dataclass(frozen=True)
class PerfMetrics:
    t_r: float
    t_h: float
    t: float
    sap: float
    are: float


def _art_from_probs(a, qc_r, qc_h, probs, rho):
    q_sr, q_rs, q_rh, q_hr = probs
    rho = np.asarray(rho, dtype=float)
    w_sr = _w(a, q_sr)
    w_rs = _w(a, q_rs)
    x_h = (1.0 - rho) * a
    t_r = w_sr + _w(rho * a, qc_r) + w_rs
    t_h = w_sr + _w(x_h, q_rh) + _w(x_h, qc_h) + _w(x_h, q_hr) + w_rs
    with np.errstate(invalid="ignore"):
        mix = rho * t_r + (1.0 - rho) * t_h
    # the endpoints must not produce 0 * inf
    t = np.where(rho == 1.0, t_r, np.where(rho == 0.0, t_h, mix))
    t = np.where((rho < 0) | (rho > 1), np.inf, t)
    return t_r, t_h, t


def _art_arrays(params: SystemParams, power, rho):
    probs = params.link_probabilities(power)
    return _art_from_probs(params.a, params.qc_r, params.qc_h, probs, rho)


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def mean_response_time(params: SystemParams, power, rho):
    """System ART ``rho*T_r + (1-rho)*T_h`` in slots (vectorized)."""
    return _out(_art_arrays(params, power, rho)[2])


def slot_average_power(params: SystemParams, power, rho):
    """Mean transmit power per slot summed over the four links, ``2(2-rho)aP`` (W)."""
    return _out(2.0 * (2.0 - np.asarray(rho, dtype=float)) * params.a * np.asarray(power, dtype=float))


def response_energy(params: SystemParams, power, rho):
    """ARE = SAP * ART in watt-slots (vectorized); ``inf`` where unstable."""
    t = _art_arrays(params, power, rho)[2]
    return _out(slot_average_power(params, power, rho) * t)


def art_components(params: SystemParams, decision: Decision) -> PerfMetrics:
    """ART of RS-computed tasks, HS-computed tasks and the whole system, plus SAP/ARE."""
    t_r, t_h, t = _art_arrays(params, decision.power, decision.rho)
    s = slot_average_power(params, decision.power, decision.rho)
    return PerfMetrics(float(t_r), float(t_h), float(t), float(s), float(s * t))


def sap(params: SystemParams, decision: Decision) -> float:
    return float(slot_average_power(params, decision.power, decision.rho))


def are(params: SystemParams, decision: Decision) -> float:
    return float(response_energy(params, decision.power, decision.rho))


def check_constraints(params: SystemParams, decision: Decision) -> list[str]:
    """Names of the violated stability/box constraints C1..C8 (empty if feasible)."""
    a, rho, p = params.a, decision.rho, decision.power
    q_sr, q_rs, q_rh, q_hr = (float(q) for q in params.link_probabilities(p))
    x_h = (1.0 - rho) * a
    checks = [
        ("C1", a < q_sr),
        ("C2", a < q_rs),
        ("C3", x_h < q_rh),
        ("C4", x_h < q_hr),
        ("C5", rho * a < params.qc_r),
        ("C6", x_h < params.qc_h),
        ("C7", 0.0 <= p <= params.p_max),
        ("C8", 0.0 <= rho <= 1.0),
    ]
    return [name for name, ok in checks if not ok]


@dataclass(frozen=True)
class FeasibleRhoSet:
    """Feasible task-assignment probabilities at a fixed power.

    The set is the open interval ``(lo, hi)`` together with the closed
    endpoints listed in ``boundary_points`` (a subset of ``{0, 1}``).
    """

    feasible: bool
    lo: float
    hi: float
    boundary_points: frozenset = field(default_factory=frozenset)
    reason: str = ""

    def __contains__(self, rho) -> bool:
        if not self.feasible:
            return False
        return (self.lo < rho < self.hi) or (rho in self.boundary_points)

    def contains(self, rho):
        """Vectorized membership test."""
        rho = np.asarray(rho, dtype=float)
        if not self.feasible:
            return np.zeros(rho.shape, dtype=bool)
        inside = (rho > self.lo) & (rho < self.hi)
        for b in self.boundary_points:
            inside |= rho == b
        return inside

    @property
    def size(self) -> float:
        """Lebesgue measure of the set."""
        return max(0.0, self.hi - self.lo) if self.feasible else 0.0


def _rho_bounds(a, qc_r, qc_h, q_rh, q_hr):
    m = min(q_rh, qc_h, q_hr)
    return m, max(0.0, 1.0 - m / a), min(1.0, qc_r / a)


def feasible_rho_set(params: SystemParams, power: float) -> FeasibleRhoSet:
    """Set of rho satisfying C3-C6 and C8 at ``power``.

    Returns an infeasible set when ``power`` itself breaks C1, C2 or C7.
    """
    a = params.a
    if not 0.0 <= power <= params.p_max:
        return FeasibleRhoSet(False, math.nan, math.nan, frozenset(), "C7")
    q_sr, q_rs, q_rh, q_hr = (float(q) for q in params.link_probabilities(power))
    if not a < q_sr:
        return FeasibleRhoSet(False, math.nan, math.nan, frozenset(), "C1")
    if not a < q_rs:
        return FeasibleRhoSet(False, math.nan, math.nan, frozenset(), "C2")
    m, lo, hi = _rho_bounds(a, params.qc_r, params.qc_h, q_rh, q_hr)
    if not (params.qc_r + m) / a > 1.0:
        return FeasibleRhoSet(False, lo, hi, frozenset(), "rho-interval empty")
    boundary = set()
    # rho = 1 needs only a < qc_r; rho = 0 needs a below all of q_rh, qc_h, q_hr
    if params.qc_r > a:
        boundary.add(1.0)
    if m > a:
        boundary.add(0.0)
    return FeasibleRhoSet(lo < hi or bool(boundary), lo, hi, frozenset(boundary))


def _inverse(params: SystemParams, link: Link, q: float) -> float:
    return params.channel.inverse_service_probability(link, q)


def _outer_inverse(params: SystemParams, link: Link, q: float) -> float:
    # inverse nudged so that q^t(p) <= q holds in floating point, which keeps
    # the returned bound itself infeasible
    p = _inverse(params, link, q)
    for _ in range(64):
        if params.channel.service_probability(link, p) <= q:
            break
        p = math.nextafter(p, -math.inf)
    return p


def power_lower_bound(params: SystemParams) -> float:
    """Power (W) that every feasible operating point must strictly exceed.

    Returns ``inf`` when some required service probability is unachievable.
    """
    a, qc_r = params.a, params.qc_r
    try:
        p1 = max(_outer_inverse(params, Link.SR, a), _outer_inverse(params, Link.RS, a))
        p2 = 0.0
        if a - qc_r > 0:
            p2 = max(_outer_inverse(params, Link.RH, a - qc_r),
                     _outer_inverse(params, Link.HR, a - qc_r))
    except UnachievableError:
        return math.inf
    return max(p1, p2)


GROWTH_CASES = ("H1", "H2", "H3")


@dataclass(frozen=True)
class GrowthCase:
    """How the feasible rho set grows as power rises from the lower bound to ``p_max``.

    ``H1``: constant; ``H2``: growing throughout; ``H3``: growing up to
    ``p_tilde`` and constant afterwards.
    """

    case: str
    p_tilde: float | None = None

    def __post_init__(self):
        if self.case not in GROWTH_CASES:
            raise DomainError(f"unknown growth case {self.case!r}")
        if (self.case == "H3") != (self.p_tilde is not None):
            raise DomainError("p_tilde is present exactly for case H3")


def rho_set_growth_case(params: SystemParams) -> GrowthCase:
    p_lo = power_lower_bound(params)
    if not p_lo < params.p_max or not feasible_rho_set(params, params.p_max).feasible:
        raise InfeasibleError("no feasible power in (lower bound, p_max]")
    target = min(params.qc_h, params.a)

    def q_rhr(p):
        _, _, q_rh, q_hr = params.link_probabilities(p)
        return min(float(q_rh), float(q_hr))

    if q_rhr(p_lo) >= target * (1 - _CASE_RTOL):
        return GrowthCase("H1")
    if q_rhr(params.p_max) <= target * (1 + _CASE_RTOL):
        return GrowthCase("H2")
    p_tilde = max(_inverse(params, Link.RH, target), _inverse(params, Link.HR, target))
    return GrowthCase("H3", p_tilde)
