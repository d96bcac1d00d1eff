"""Sweep the arrival probability and write the comparison table as CSV.

Run with ``python3 demos/05_arrival_sweep.py [out.csv]``.
"""

import math
import sys

from relaymec.harness import config_from_dict, emit_csv, run_sweep

doc = {
    "a": 0.001, "qc_r": 0.05, "qc_h": 0.05, "p_max_mw": 10,
    "channel": {"type": "rayleigh", "gamma": 0.01},
    "schemes": ["MART", "MARE_RAYLEIGH", "ALLRS", "ALLHS"],
    "sweep": {"variable": "a", "from": 0.001, "to": 0.096, "step": 0.005},
}
rows = run_sweep(config_from_dict(doc))

print("    a      " + "".join(f"{s:>16s}" for s in doc["schemes"]) + "   (ART slots)")
for i in range(0, len(rows), 4):
    group = rows[i : i + 4]
    cells = "".join(f"{r.art_slots:16.2f}" if math.isfinite(r.art_slots) else f"{'inf':>16s}"
                    for r in group)
    print(f"  {group[0].sweep_value:.3f}  {cells}")

if len(sys.argv) > 1:
    emit_csv(rows, sys.argv[1])
    print("wrote", sys.argv[1])
