"""Fastest versus most frugal operating point, and what the grid oracle says.

Run with ``python3 demos/03_optimize.py``.
"""

from relaymec import (
    RayleighChannel,
    SystemParams,
    baseline,
    exhaustive_oracle,
    solve_mare_general,
    solve_mare_rayleigh,
    solve_mart,
)

MW = 1e-3
ch = RayleighChannel.uniform(0.01)

for qc in (0.002, 0.02, 0.5):
    p = SystemParams(0.001, qc, qc, ch, 10 * MW)
    print(f"\nqc_r = qc_h = {qc}")
    for name, sol in (
        ("MART", solve_mart(p)),
        ("MARE (grid)", solve_mare_general(p)),
        ("MARE (golden)", solve_mare_rayleigh(p)),
        ("MARE oracle", exhaustive_oracle("ARE", p, 1e-3)),
        ("ALLRS", baseline("ALLRS", p)),
        ("ALLHS", baseline("ALLHS", p)),
    ):
        m = sol.metrics
        print(f"  {name:14s} P={sol.p_star / MW:7.4f} mW rho={sol.rho_star:.4f} "
              f"ART={m.t:9.3f} ARE={m.are / MW:.5f} mW*slot")
