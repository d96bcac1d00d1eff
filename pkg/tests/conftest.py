import math

import numpy as np
import pytest

from relaymec import RayleighChannel, SystemParams, feasible_rho_set, power_lower_bound

MW = 1e-3
ACCEPTANCE_LINES = []


def random_feasible_params(rng, n, a_range=(0.001, 0.08), qc_range=(0.002, 0.2),
                           gamma_range=(0.002, 0.015), p_max=10 * MW):
    """Draw ``n`` Rayleigh configs whose power range (lower bound, p_max] is feasible."""
    out = []
    while len(out) < n:
        a = rng.uniform(*a_range)
        qc_r, qc_h = rng.uniform(*qc_range, size=2)
        g = rng.uniform(*gamma_range, size=4)
        p = SystemParams(a, qc_r, qc_h, RayleighChannel(*g), p_max)
        lo = power_lower_bound(p)
        if not lo < 0.9 * p_max:
            continue
        s = feasible_rho_set(p, p_max)
        if s.feasible and s.size > 0.02:
            out.append(p)
    return out


def constraint_oracle(a, qc_r, qc_h, gammas, power, rho):
    """Feasibility of (P, rho) from the raw inequalities, vectorized over rho."""
    q = [math.exp(-g / power) for g in gammas]
    q_sr, q_rs, q_rh, q_hr = q
    rho = np.asarray(rho, dtype=float)
    x_h = (1 - rho) * a
    return ((a < q_sr) & (a < q_rs) & (x_h < q_rh) & (x_h < q_hr)
            & (rho * a < qc_r) & (x_h < qc_h) & (rho >= 0) & (rho <= 1))


def gammas_of(params):
    ch = params.channel
    return (ch.gamma_sr, ch.gamma_rs, ch.gamma_rh, ch.gamma_hr)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
