"""Low-rank solution in the stiff regime next to the fluid reference.

At eps = 1e-8 the low-rank density should sit on top of the drift-diffusion
solution, and the gap should roughly halve when the time step is halved.
"""

import numpy as np

from kdlr import parse_config, run_experiment

BASE = """
ic = local_equilibrium
epsilon = 1e-8
t_final = 0.05
nx = 64
nv = 64
record_timing = false
"""

gaps = []
for dt in (1.25e-3, 6.25e-4):
    lr = run_experiment(parse_config(BASE + f"solver = lowrank\nr = 5\ndt = {dt}\n"), write=False)
    fl = run_experiment(parse_config(BASE + f"solver = fluid\ndt = {dt}\n"), write=False)
    gap = np.sum(np.abs(lr.runner.field.rho - fl.runner.state.rho)) * lr.grid.dx_vol
    sigma = lr.history.sigma[-1]
    print(f"dt={dt:.3e}  L1 gap {gap:.3e}  sigma2/sigma1 {sigma[1] / sigma[0]:.2e}")
    gaps.append(gap)
print(f"gap ratio {gaps[0] / gaps[1]:.2f} (first order in time gives ~2)")
