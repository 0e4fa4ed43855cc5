"""Slow manifold and fast fibres of the planar parabola system.

    python3 demos/parabola.py
"""

from slowmani import expand_fibre_bundle, expand_slow_manifold, problems
from slowmani.numeric import Binding, residual_order_fit, validation_grid

spec = problems.load("parabola")
slow = expand_slow_manifold(spec, 3)
print("reduced field")
for i in range(1, 4):
    print(f"  r{i} =", slow.r[i][0, 0])

print("graph correction of x2")
for i in range(1, 4):
    print(f"  phi{i}[2] =", slow.phi[i][1, 0])

fib = expand_fibre_bundle(spec, slow, 1)
print("fibre rate n0 + eps n1 =", fib.n_dyn[0][0, 0], "+ eps *", fib.n_dyn[1][0, 0])

# the defect of the truncated conjugacy equation shrinks like eps^(m+1)
eps = [10 ** -1.5, 1e-2, 10 ** -2.5, 1e-3]
for m in (1, 2, 3):
    e = expand_slow_manifold(spec, m)
    rep = residual_order_fit(spec, e, validation_grid(spec, e, Binding()), eps)
    print(f"m={m}: fitted slope {rep.fitted_slope:.3f} (target {m + 1})")
