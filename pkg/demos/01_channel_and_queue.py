"""Links and buffers: the two building blocks of the model.

Run with ``python3 demos/01_channel_and_queue.py``.
"""

import numpy as np

from relaymec import Link, RayleighChannel, SimConfig, run_single_queue, waiting_time
from relaymec.channel import gamma_from_physical, inverse_service_probability

# SNR threshold 10, unit mean gain, noise 1 mW
gamma = gamma_from_physical(10, 1.0, 1e-3)
ch = RayleighChannel.uniform(gamma)
print(f"Gamma = {gamma} W")

# a link carries a packet in a slot when the faded SNR clears the threshold
for p_mw in (1, 2, 5, 10, 20):
    q = ch.service_probability(Link.SR, p_mw * 1e-3)
    print(f"P = {p_mw:2d} mW  q = {q:.4f}")

# how much power buys a given service probability
for q in (0.001, 0.01, 0.1, np.exp(-1)):
    print(f"q = {q:.4f} needs {inverse_service_probability(ch, Link.SR, q) * 1e3:.4f} mW")

# each buffer is a discrete-time Geo/Geo/1 queue
x = 0.01
for y in (0.011, 0.015, 0.05, 0.2, 1.0):
    print(f"x = {x}, y = {y:5}: mean sojourn {waiting_time(x, y):8.2f} slots")

# and the slot simulator reproduces the formula
rep = run_single_queue(0.01, 0.05, SimConfig(n_slots=5_000_000, seed=1))
print(f"simulated {rep.mean_response:.2f} +/- {rep.ci_half_width:.2f}, formula {waiting_time(0.01, 0.05):.2f}")
