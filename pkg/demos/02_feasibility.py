"""Which task splits keep every buffer stable, and from what power on.

Run with ``python3 demos/02_feasibility.py``.
"""

import numpy as np

from relaymec import (
    RayleighChannel,
    SystemParams,
    feasible_rho_set,
    power_lower_bound,
    rho_set_growth_case,
)

MW = 1e-3
p = SystemParams(a=0.05, qc_r=0.03, qc_h=0.04, channel=RayleighChannel.uniform(0.01), p_max=10 * MW)

print(f"lowest usable power: above {power_lower_bound(p) / MW:.3f} mW")
for p_mw in (3, 3.5, 4, 6, 10):
    s = feasible_rho_set(p, p_mw * MW)
    if s.feasible:
        ends = sorted(s.boundary_points)
        print(f"P = {p_mw:4} mW  rho in ({s.lo:.3f}, {s.hi:.3f}) plus {ends}")
    else:
        print(f"P = {p_mw:4} mW  infeasible ({s.reason})")

print("growth of the feasible set:", rho_set_growth_case(p))

# a configuration where the set stops growing at an intermediate power
q = SystemParams(0.3, 0.2, 0.99, RayleighChannel(0.005, 0.005, 0.01, 0.01), 10 * MW)
gc = rho_set_growth_case(q)
print("second config:", gc.case, f"flat from {gc.p_tilde / MW:.3f} mW")
for p_mw in np.linspace(5, 10, 6):
    print(f"  P = {p_mw:4.1f} mW  size {feasible_rho_set(q, p_mw * MW).size:.4f}")
