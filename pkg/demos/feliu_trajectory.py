"""Integrate the Feliu network and measure how close it stays to the slow manifold.

    python3 demos/feliu_trajectory.py
"""

import numpy as np

from slowmani import expand_slow_manifold, problems
from slowmani.numeric import Binding, eval_numeric, integrate_rk4, vector_field

spec = problems.load("feliu")
params = dict(k1=1.0, k2=0.4, km2=0.7, kappa=(1.0 / 0.5) ** (1.0 / 3.0))
eps = 0.01
slow = expand_slow_manifold(spec, 2)

ts, xs = integrate_rk4(vector_field(spec, Binding(params, eps)), [0.5, 0.5, 0.5], 0.01,
                       5000, record_every=500)
for t, x in zip(ts, xs):
    # F0 vanishes on the critical manifold x3 = kappa (x1 x2)^(2/3)
    f0 = x[2] - params["kappa"] * (x[0] * x[1]) ** (2.0 / 3.0)
    print(f"t={t:6.1f}  x=({x[0]:.5f}, {x[1]:.5f}, {x[2]:.5f})  F0-defect {f0:+.2e}")

xi = dict(params, xi1=1.0, xi2=1.0)
print("phi_(2)(1, 1) at eps=0.01:", np.ravel(eval_numeric(slow.phi, Binding(xi, eps))))
