"""Analytic response time and power against the slot-level simulator.

Run with ``python3 demos/04_simulation_check.py`` (about ten seconds).
"""

from relaymec import Decision, RayleighChannel, SimConfig, SystemParams, art_components, run_simulation

MW = 1e-3
p = SystemParams(0.001, 0.05, 0.05, RayleighChannel.uniform(0.01), 10 * MW)
cfg = SimConfig(n_slots=10_000_000, seed=1)

print(" P(mW)   rho   ART model   ART sim     CI    SAP err")
for p_mw in (2, 6, 10):
    for rho in (0.0, 0.5, 1.0):
        d = Decision(p_mw * MW, rho)
        m = art_components(p, d)
        rep = run_simulation(p, d, cfg)
        print(f"{p_mw:6} {rho:5.2f} {m.t:10.3f} {rep.mean_response:9.3f} {rep.ci_half_width:6.3f} "
              f"{rep.empirical_sap / m.sap - 1:+8.2%}")
