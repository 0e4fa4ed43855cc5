import math

import numpy as np
import pytest

from slowmani import problems
from slowmani.algebra import RatMat, Ring
from slowmani.cascade import run_cascade
from slowmani.errors import DivergedTrajectory, EvaluationError
from slowmani.gspt import compute_n0, expand_slow_manifold
from slowmani.numeric import (Binding, compile_functions, eigenvalues, eval_numeric,
                              hyperbolicity_probe, integrate_rk4, residual_order_fit,
                              sample_grid, validation_grid, vector_field)

from conftest import rf

PAR = problems.load("parabola")
EPS = [10 ** -1.5, 1e-2, 10 ** -2.5, 1e-3]
ONES = dict(a1=1.0, a2=1.0, a3=1.0, a4=1.0)
BINDINGS = {
    "iffl": ONES,
    "feliu": dict(k1=1.0, k2=0.4, km2=0.7, kappa=(1.0 / 0.5) ** (1.0 / 3.0)),
    "valorani": dict(dbar=1.0),
}


# evaluation

def test_eval_examples():
    xi = PAR.ring.gen("xi")
    assert eval_numeric(2 / (1 + 3 * xi ** 2), Binding({"xi": 1.0})) == 0.5
    assert eval_numeric(compute_n0(PAR).n0_dyn, Binding({"xi": 0.0}))[0, 0] == -1.0


def test_eval_iffl_infra_slow_zero():
    red = run_cascade(problems.load("iffl")).levels[2].reduced_field
    assert eval_numeric(red[0], Binding(dict(ONES, eta=1.0)))[0, 0] == 0.0


def test_eval_series_sums_powers():
    e = expand_slow_manifold(PAR, 2)
    got = eval_numeric(e.r, Binding({"xi": 0.5}, 0.1))[0, 0]
    d = 1 + 3 * 0.25
    want = 0.1 * 2 / d + 0.01 * 6 * 0.5 * (9 * 0.0625 - 3 * 0.25 + 2) / d ** 4
    assert got == pytest.approx(want, rel=1e-14)


def test_eval_errors():
    xi = PAR.ring.gen("xi")
    with pytest.raises(EvaluationError):
        eval_numeric(1 / xi, Binding({}))
    with pytest.raises(EvaluationError):
        eval_numeric(1 / xi, Binding({"xi": 0.0}))
    with pytest.raises(EvaluationError):
        compile_functions([xi], [], Binding({}), PAR.ring)


def test_compiled_matches_exact():
    R = Ring(["x", "y", "k"])
    f = rf(R, "(3*x^4*y - k*x*y^2 + 7)/(1 + x^2 + k*y^6)")
    fn = compile_functions([f], ["x", "y"], Binding({"k": 0.5}), R)
    exact = f.subs({"x": R.const(3) / 2, "y": R.const(-2) / 7, "k": R.const(1) / 2})
    assert fn(1.5, -2 / 7)[0] == pytest.approx(float(exact.to_fraction()), rel=1e-14)


# integration

def _decay(dt, t_end=1.0):
    _, xs = integrate_rk4(lambda x: [-x[0]], [1.0], dt, round(t_end / dt))
    return abs(xs[-1, 0] - math.exp(-t_end))


def test_rk4_decay():
    assert _decay(0.01) < 1e-8


def test_rk4_fourth_order():
    ratio = _decay(0.1) / _decay(0.05)
    assert 12 <= ratio <= 20


def test_rk4_record_every_and_times():
    ts, xs = integrate_rk4(lambda x: [1.0], [0.0], 0.5, 10, record_every=5)
    assert list(ts) == [0.0, 2.5, 5.0]
    assert xs[-1, 0] == pytest.approx(5.0)


def test_rk4_arguments():
    with pytest.raises(ValueError):
        integrate_rk4(lambda x: x, [1.0], 0.0, 10)
    with pytest.raises(ValueError):
        integrate_rk4(lambda x: x, [1.0], 0.1, 0)


def test_rk4_divergence():
    with pytest.raises(DivergedTrajectory) as err:
        integrate_rk4(lambda x: [x[0] ** 2], [1.0], 0.5, 100)
    assert err.value.step > 0


def test_iffl_equilibrium():
    spec = problems.load("iffl")
    field = vector_field(spec, Binding(ONES, 0.01))
    _, xs = integrate_rk4(field, [2.0, 2.0, 2.0], 1.0, 100000, record_every=100000)
    assert np.max(np.abs(xs[-1] - [1.0, 0.01, 0.01])) < 1e-3


def test_valorani_equilibrium():
    # delta = dbar eps^2 = 1e-4 at eps = 1e-2
    spec = problems.load("valorani")
    field = vector_field(spec, Binding({"dbar": 1.0}, 1e-2))
    _, xs = integrate_rk4(field, [0.5, 1.5, 1.0], 0.4, 400000, record_every=400000)
    assert np.max(np.abs(xs[-1] - 1.0)) < 1e-2


# residual order

@pytest.mark.parametrize("name", problems.NAMES)
@pytest.mark.parametrize("m", [1, 2])
def test_residual_slope(name, m):
    spec = problems.load(name)
    b = Binding(BINDINGS.get(name, {}), 0.01)
    e = expand_slow_manifold(spec, m)
    rep = residual_order_fit(spec, e, validation_grid(spec, e, b), EPS, b)
    assert rep.passed
    if not rep.exact:
        assert rep.fitted_slope >= m + 1 - 0.25


def test_residual_exact_iffl():
    spec = problems.load("iffl")
    b = Binding(ONES)
    e = expand_slow_manifold(spec, 2)
    rep = residual_order_fit(spec, e, validation_grid(spec, e, b), EPS, b)
    assert rep.exact and math.isnan(rep.fitted_slope) and rep.passed
    assert max(rep.sup_residuals) <= 1e-12


def test_residual_frozen_parabola():
    e = expand_slow_manifold(PAR, 1)
    rep = residual_order_fit(PAR, e, validation_grid(PAR, e, Binding()), EPS)
    assert rep.fitted_slope == pytest.approx(2.0, abs=1e-6)
    assert rep.sup_residuals[1] == pytest.approx(6.0e-4, rel=1e-3)


def test_residual_fit_preconditions():
    e = expand_slow_manifold(PAR, 1)
    grid = sample_grid(PAR.box)
    with pytest.raises(ValueError):
        residual_order_fit(PAR, e, grid, [1e-2, 1e-3])
    with pytest.raises(ValueError):
        residual_order_fit(PAR, e, grid, [1e-2, 5e-3, 1e-3])


def test_grid_drops_poles():
    assert len(sample_grid([(-1, 1)])) == 11
    assert len(sample_grid([(0, 1), (0, 1)])) == 121
    pts = sample_grid([(-1, 1)], exclude=lambda p: abs(p[0]) < 1e-6)
    assert len(pts) == 10 and (0.0,) not in pts


# hyperbolicity

def test_eigenvalues_closed_form():
    assert list(eigenvalues([[-4.0]])) == [-4.0]
    ev = sorted(eigenvalues([[0.0, 1.0], [-1.0, 0.0]]), key=lambda z: z.imag)
    assert ev == [-1j, 1j]
    ev = np.sort(np.real(eigenvalues(np.diag([-1.0, -2.0, -3.0]))))
    assert list(ev) == [-3.0, -2.0, -1.0]


def test_parabola_hyperbolic():
    rep = hyperbolicity_probe(compute_n0(PAR), [(-1.0,), (0.0,), (1.0,)])
    assert rep.eigenvalue_real_parts == [[-4.0], [-1.0], [-4.0]]
    assert rep.passed and rep.attracting and rep.min_abs_real_part == 1.0


def test_iffl_level_one_hyperbolic():
    frame = run_cascade(problems.load("iffl")).levels[1].frame
    rep = hyperbolicity_probe(frame, [(1.0,)], Binding(ONES))
    assert rep.eigenvalue_real_parts == [[-1.0]] and rep.passed


class _Rotation:
    def __init__(self):
        R = Ring(["s"])
        self.n0_dyn = RatMat.from_rows(R, [[0, 1], [-1, 0]])
        self.chart_vars = ("s",)


def test_rotation_not_hyperbolic():
    rep = hyperbolicity_probe(_Rotation(), [(0.0,)])
    assert rep.min_abs_real_part == 0.0 and not rep.passed


# attraction towards the computed slow manifold

def _attraction_defect(order):
    """Largest distance to the curve phi_(order)(., 0.01) after t = 10."""
    eps = 0.01
    e = expand_slow_manifold(PAR, order)
    b = Binding({}, eps)
    parts = compile_functions([c[1, 0] for c in e.phi.coeffs], ["xi"], b, PAR.ring)

    def graph(v):
        return (sum(eps ** i * np.asarray(c, dtype=float) for i, c in enumerate(parts(v))),)

    field = vector_field(PAR, b)
    worst = 0.0
    for xi0 in np.linspace(-1.0, 1.0, 41):
        for off in (-0.1, 0.05, 0.1):
            x0 = [xi0, graph(xi0)[0] + off]
            _, xs = integrate_rk4(field, x0, 0.01, 1000, record_every=1000)
            x1, x2 = xs[-1]
            s = np.linspace(x1 - 1e-3, x1 + 1e-3, 2001)
            d = np.min(np.hypot(s - x1, graph(s)[0] - x2))
            worst = max(worst, d)
    return worst


def test_attraction_to_second_order_manifold():
    # eps^3 |phi_3| reaches about 2.8e-5 near xi = 0.15, so the true slow manifold
    # itself sits further than 5e-6 from phi_(2) there
    assert _attraction_defect(2) < 5e-6


def test_attraction_to_fourth_order_manifold():
    assert _attraction_defect(4) < 5e-6
