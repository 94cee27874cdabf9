"""Singular values of the coupling matrix across regimes.

Near equilibrium g = f/M is almost constant in v, so one singular value
dominates; at eps = 1 the counterstreaming beams need many more.
"""

import numpy as np

from kdlr import parse_config, run_experiment

for eps in (1e-6, 1e-2, 1.0):
    cfg = parse_config(
        f"solver = lowrank\nic = counterstreaming\nepsilon = {eps}\nr = 8\n"
        "t_final = 0.02\nnx = 64\nnv = 64\ndt = 5e-4\nrecord_timing = false\n"
    )
    res = run_experiment(cfg, write=False)
    s = np.asarray(res.history.sigma[-1])
    print(f"eps={eps:g}: " + " ".join(f"{x:.1e}" for x in s / s[0]))
