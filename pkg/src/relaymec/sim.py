"""Slot-level Monte Carlo simulator of the six-buffer relay network.

Slot convention (late arrival, delayed access):

1. draw availability of the four links (SR, RS, RH, HR) and the two compute
   servers (R, H), then the routing draw and the arrival draw, in that order,
   from a single stream;
2. every buffer that was nonempty at the start of the slot and whose link or
   server is available releases its head-of-line item;
3. released items join the next buffer at the end of the slot and can be
   served from the following slot on. A task leaving the SS->RS buffer is kept
   at the relay when the routing draw is below ``rho``. When a relay-computed
   result and a HS result both reach the RS->SS buffer in the same slot the
   relay result is queued first;
4. a new task, if any, joins the SS->RS buffer at the end of the slot;
5. items leaving the RS->SS buffer complete in the current slot.

Under this convention a single Geo/Geo/1 queue has mean sojourn
``(1 - x) / (y - x)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy import stats

from .errors import DomainError, SimulationError
from .perf import Decision, SystemParams

__all__ = [
    "Stage",
    "SimConfig",
    "SimReport",
    "SimState",
    "TaskRecord",
    "run_simulation",
    "run_single_queue",
    "advance_slot",
    "empirical_sap",
    "new_state",
    "DRAWS_PER_SLOT",
]

DRAWS_PER_SLOT = 8
MEMORY_GUARD = 10_000_000
_CHUNK = 1 << 18
_MAX_IDS = np.iinfo(np.int64).max // 8

# draw columns
_U_SR, _U_RS, _U_RH, _U_HR, _U_SRV_R, _U_SRV_H, _U_ROUTE, _U_ARRIVAL = range(8)

# status codes returned by the kernel
_OK, _FULL, _GUARD = 0, 1, 2

# engine modes
NETWORK, SINGLE_QUEUE = 0, 1


class Stage(enum.IntEnum):
    TX_SR = 0
    COMP_R = 1
    TX_RH = 2
    COMP_H = 3
    TX_HR = 4
    TX_RS = 5


class Path(enum.IntEnum):
    RS = 0
    HS = 1


RS_PATH = (Stage.TX_SR, Stage.COMP_R, Stage.TX_RS)
HS_PATH = (Stage.TX_SR, Stage.TX_RH, Stage.COMP_H, Stage.TX_HR, Stage.TX_RS)

# draw column consulted by each stage
_STAGE_DRAW = np.array([_U_SR, _U_SRV_R, _U_RH, _U_SRV_H, _U_HR, _U_RS], dtype=np.int64)
# link transmission counters: SR, RS, RH, HR
_TX_SR, _TX_RS, _TX_RH, _TX_HR = range(4)


@dataclass(frozen=True)
class SimConfig:
    n_slots: int = 10_000_000
    seed: int = 0
    warmup_fraction: float = 0.1

    def __post_init__(self):
        if int(self.n_slots) != self.n_slots or self.n_slots < 1:
            raise DomainError("n_slots must be a positive integer")
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise DomainError("warmup_fraction must lie in [0, 1)")

    @property
    def warmup_slots(self) -> int:
        return int(self.n_slots * self.warmup_fraction)


@dataclass(frozen=True)
class TaskRecord:
    id: int
    gen_slot: int
    path: Path | None
    stage_entry_slots: dict
    done_slot: int | None


@dataclass
class SimState:
    """Mutable engine state. All arrays are owned by the state object.

    ``entry[i, s]`` is the slot at whose end task ``i`` joined stage ``s``
    (``-1`` if never). ``counters`` holds generated / completed task counts.
    """

    slot: int
    qbuf: np.ndarray
    head: np.ndarray
    tail: np.ndarray
    gen: np.ndarray
    path: np.ndarray
    entry: np.ndarray
    done: np.ndarray
    counters: np.ndarray
    tx: np.ndarray
    mode: int = NETWORK
    measure_from: int = 0

    @property
    def capacity(self) -> int:
        return self.gen.size

    def queue_lengths(self) -> np.ndarray:
        return self.tail - self.head

    def queue(self, stage) -> list:
        s = int(stage)
        return self.qbuf[s, self.head[s] : self.tail[s]].tolist()

    @property
    def generated(self) -> int:
        return int(self.counters[0])

    @property
    def completed(self) -> int:
        return int(self.counters[1])


def new_state(capacity: int, mode: int = NETWORK, measure_from: int = 0) -> SimState:
    capacity = max(int(capacity), 1)
    return SimState(
        slot=0,
        qbuf=np.zeros((6, capacity), dtype=np.int64),
        head=np.zeros(6, dtype=np.int64),
        tail=np.zeros(6, dtype=np.int64),
        gen=np.full(capacity, -1, dtype=np.int64),
        path=np.full(capacity, -1, dtype=np.int8),
        entry=np.full((capacity, 6), -1, dtype=np.int64),
        done=np.full(capacity, -1, dtype=np.int64),
        counters=np.zeros(2, dtype=np.int64),
        tx=np.zeros(4, dtype=np.int64),
        mode=mode,
        measure_from=measure_from,
    )


@numba.njit(cache=True, inline="always")
def _push(s, i, t, qbuf, tail, entry):
    qbuf[s, tail[s]] = i
    tail[s] += 1
    entry[i, s] = t


@numba.njit(cache=True)
def _run_chunk(t0, draws, prob, rho, a, mode, measure_from,
               qbuf, head, tail, gen, path, entry, done, counters, tx):
    """Advance one slot per row of ``draws``; returns (slots done, status)."""
    dep = np.empty(6, dtype=np.int64)
    for k in range(draws.shape[0]):
        t = t0 + k
        # departures decided on the start-of-slot contents
        for s in range(6):
            dep[s] = -1
            if tail[s] > head[s] and draws[k, _STAGE_DRAW[s]] < prob[s]:
                dep[s] = qbuf[s, head[s]]
                head[s] += 1
        count = t >= measure_from

        i = dep[0]
        if i >= 0:
            if count:
                tx[_TX_SR] += 1
            if mode == SINGLE_QUEUE:
                path[i] = 0
                done[i] = t
                counters[1] += 1
            elif draws[k, _U_ROUTE] < rho:
                path[i] = 0
                _push(1, i, t, qbuf, tail, entry)
            else:
                path[i] = 1
                _push(2, i, t, qbuf, tail, entry)
        i = dep[1]
        if i >= 0:
            _push(5, i, t, qbuf, tail, entry)
        i = dep[2]
        if i >= 0:
            if count:
                tx[_TX_RH] += 1
            _push(3, i, t, qbuf, tail, entry)
        i = dep[3]
        if i >= 0:
            _push(4, i, t, qbuf, tail, entry)
        i = dep[4]
        if i >= 0:
            if count:
                tx[_TX_HR] += 1
            _push(5, i, t, qbuf, tail, entry)
        i = dep[5]
        if i >= 0:
            if count:
                tx[_TX_RS] += 1
            done[i] = t
            counters[1] += 1

        if draws[k, _U_ARRIVAL] < a:
            i = counters[0]
            if i >= gen.size:
                return k, _FULL
            counters[0] += 1
            gen[i] = t
            _push(0, i, t, qbuf, tail, entry)
        for s in range(6):
            if tail[s] - head[s] > MEMORY_GUARD:
                return k + 1, _GUARD
    return draws.shape[0], _OK


def _kernel_args(state: SimState):
    return (state.qbuf, state.head, state.tail, state.gen, state.path,
            state.entry, state.done, state.counters, state.tx)


def advance_slot(state: SimState, draws, stage_probs, rho: float, a: float) -> SimState:
    """Apply one slot to ``state`` in place and return it.

    ``draws`` holds the eight uniforms of the slot in the fixed order (links
    SR, RS, RH, HR; servers R, H; routing; arrival). ``stage_probs`` gives the
    service probability of each :class:`Stage`, in stage order.
    """
    u = np.asarray(draws, dtype=float)
    if u.shape != (DRAWS_PER_SLOT,):
        raise DomainError(f"expected {DRAWS_PER_SLOT} draws per slot")
    prob = np.asarray(stage_probs, dtype=float)
    done_k, status = _run_chunk(state.slot, u.reshape(1, DRAWS_PER_SLOT), prob, float(rho), float(a),
                                state.mode, state.measure_from, *_kernel_args(state))
    state.slot += done_k
    _raise_status(status)
    return state


def _raise_status(status):
    if status == _FULL:
        raise SimulationError("task capacity exhausted")
    if status == _GUARD:
        raise SimulationError(f"a queue exceeded {MEMORY_GUARD} items; the run is unstable")


@dataclass
class SimReport:
    """Statistics over tasks generated after warm-up and completed by run end."""

    completed: int
    generated: int
    excluded: int
    in_flight_at_end: int
    mean_response: float
    mean_response_rs: float
    mean_response_hs: float
    per_stage_sojourn: dict
    ci_half_width: float
    link_transmissions: dict
    measured_slots: int
    power: float
    rs_fraction: float
    empirical_sap: float = field(init=False)
    records: list | None = None
    final_queue_lengths: tuple = ()

    def __post_init__(self):
        self.empirical_sap = empirical_sap(self)


def empirical_sap(report: SimReport) -> float:
    """Power times the mean number of link transmissions per measured slot (W)."""
    if report.measured_slots <= 0:
        return 0.0
    return report.power * sum(report.link_transmissions.values()) / report.measured_slots


def _capacity(n_slots: int, a: float) -> int:
    mean = n_slots * a
    cap = int(mean + 8.0 * math.sqrt(mean * (1 - a) + 1.0) + 64)
    return min(cap, n_slots)


def _batch_half_width(x: np.ndarray, n_batches: int = 100) -> float:
    if x.size < 2 * n_batches:
        return math.inf
    b = x.size // n_batches
    means = x[: b * n_batches].reshape(n_batches, b).mean(axis=1)
    return float(stats.t.ppf(0.975, n_batches - 1) * means.std(ddof=1) / math.sqrt(n_batches))


def _drive(state: SimState, config: SimConfig, prob, rho, a):
    rng = np.random.Generator(np.random.PCG64(config.seed))
    args = _kernel_args(state)
    t = 0
    while t < config.n_slots:
        n = min(_CHUNK, config.n_slots - t)
        draws = rng.random((n, DRAWS_PER_SLOT))
        done_k, status = _run_chunk(t, draws, prob, float(rho), float(a), state.mode,
                                    state.measure_from, *args)
        t += done_k
        _raise_status(status)
    state.slot = t


def _report(state: SimState, config: SimConfig, power: float, keep_records: bool) -> SimReport:
    n = state.generated
    gen, done, path, entry = state.gen[:n], state.done[:n], state.path[:n], state.entry[:n]
    warm = gen < config.warmup_slots
    finished = done >= 0
    sel = ~warm & finished
    resp = (done[sel] - gen[sel]).astype(float)
    p_sel = path[sel]

    def mean(x):
        return float(x.mean()) if x.size else math.nan

    sojourn = {}
    e = entry[sel]
    for s in Stage:
        if state.mode == SINGLE_QUEUE and s == Stage.TX_SR:
            nxt = done[sel]
        else:
            nxt = _next_entry(e, p_sel, done[sel], s)
        visited = e[:, s] >= 0
        sojourn[s] = mean((nxt[visited] - e[visited, s]).astype(float))

    records = None
    if keep_records:
        records = [
            TaskRecord(
                int(i),
                int(gen[i]),
                None if path[i] < 0 else Path(int(path[i])),
                {Stage(s): int(entry[i, s]) for s in range(6) if entry[i, s] >= 0},
                None if done[i] < 0 else int(done[i]),
            )
            for i in range(n)
        ]
    in_flight = int(np.count_nonzero(~warm & ~finished))
    return SimReport(
        completed=int(resp.size),
        generated=n,
        excluded=int(np.count_nonzero(warm)),
        in_flight_at_end=in_flight,
        mean_response=mean(resp),
        mean_response_rs=mean(resp[p_sel == Path.RS]),
        mean_response_hs=mean(resp[p_sel == Path.HS]),
        per_stage_sojourn=sojourn,
        ci_half_width=_batch_half_width(resp),
        link_transmissions={
            "sr": int(state.tx[_TX_SR]),
            "rs": int(state.tx[_TX_RS]),
            "rh": int(state.tx[_TX_RH]),
            "hr": int(state.tx[_TX_HR]),
        },
        measured_slots=config.n_slots - state.measure_from,
        power=float(power),
        rs_fraction=mean((p_sel == Path.RS).astype(float)),
        records=records,
        final_queue_lengths=tuple(int(v) for v in state.queue_lengths()),
    )


def _next_entry(entry, path, done, s):
    """Slot at which each task left stage ``s`` (entry slot of its successor)."""
    if s == Stage.TX_SR:
        return np.where(path == Path.RS, entry[:, Stage.COMP_R], entry[:, Stage.TX_RH])
    if s == Stage.TX_RS:
        return done
    nxt = {Stage.COMP_R: Stage.TX_RS, Stage.TX_RH: Stage.COMP_H,
           Stage.COMP_H: Stage.TX_HR, Stage.TX_HR: Stage.TX_RS}[s]
    return entry[:, nxt]


def stage_probabilities(params: SystemParams, power: float) -> np.ndarray:
    q_sr, q_rs, q_rh, q_hr = (float(q) for q in params.link_probabilities(power))
    return np.array([q_sr, params.qc_r, q_rh, params.qc_h, q_hr, q_rs])


def run_simulation(
    params: SystemParams,
    decision: Decision,
    config: SimConfig,
    keep_records: bool = False,
) -> SimReport:
    """Simulate the network at a fixed operating point.

    Unstable operating points are allowed; their queues simply grow.
    Identical arguments give identical reports.
    """
    if not (0 <= decision.rho <= 1 and 0 < decision.power <= params.p_max):
        raise DomainError("decision must satisfy 0 < power <= p_max and 0 <= rho <= 1")
    if config.n_slots * params.a > _MAX_IDS:
        raise DomainError("n_slots * a overflows the task-id space")
    state = new_state(_capacity(config.n_slots, params.a), NETWORK, config.warmup_slots)
    _drive(state, config, stage_probabilities(params, decision.power), decision.rho, params.a)
    return _report(state, config, decision.power, keep_records)


def run_single_queue(x: float, y: float, config: SimConfig, keep_records: bool = False) -> SimReport:
    """Calibration mode: only the SS->RS buffer, tasks complete on departure.

    Returned ``link_transmissions['sr']`` counts departures in the measured slots.
    """
    if not (0 <= x <= 1 and 0 < y <= 1):
        raise DomainError("need 0 <= x <= 1 and 0 < y <= 1")
    state = new_state(_capacity(config.n_slots, x), SINGLE_QUEUE, config.warmup_slots)
    prob = np.array([y, 0.0, 0.0, 0.0, 0.0, 0.0])
    _drive(state, config, prob, 1.0, x)
    return _report(state, config, 1.0, keep_records)
