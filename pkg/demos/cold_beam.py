"""Relaxation of a drifting cold beam toward the field-shifted Maxwellian.

The data is homogeneous in x, so g is exactly rank one and r = 1 is used.
Prints the distance to rho M(E) at a few times for two values of eps.
Runs in a few seconds.
"""

import numpy as np

from kdlr import parse_config, run_experiment

for eps in (0.05, 0.01):
    cfg = parse_config(
        f"solver = lowrank\nic = cold_beam_2d\nepsilon = {eps}\nr = 1\n"
        "t_final = 0.1\nnx = 16\nnv = 48\ndt = 8e-4\nrecord_timing = false\n"
    )
    h = run_experiment(cfg, write=False).history
    t, dist = np.array(h.t), np.array(h.maxw_dist)
    picks = np.searchsorted(t, [0.0, 0.02, 0.05, 0.1 - 1e-9])
    print(f"eps={eps}: " + "  ".join(f"t={t[i]:.2f} {dist[i]:.2e}" for i in picks))
