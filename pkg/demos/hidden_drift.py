"""A drift that no single term of the vector field carries.

The d2f system has F1 = (0, -x2, 1): on the line x2 = 0 it pushes nothing
along x1. The curvature term x3^2 in F0 still produces an eps^2 flow
there, found both by the two-level cascade and by the projector formula.

    python3 demos/hidden_drift.py
"""

from slowmani import problems, run_cascade

for name in ("d2f", "iffl", "valorani"):
    res = run_cascade(problems.load(name))
    tp = res.two_path
    print(name)
    print("  timescale exponents", res.j_sequence, "dimensions", res.dim_sequence)
    print("  level-2 field       ", res.levels[2].reduced_field[0][0, 0])
    print("  projector formula   ", tp.formula[0, 0], "| agree:", tp.agree)
