"""Floating-point checks of the symbolic results.

Rational functions are compiled to Python source (nested Horner form) so the
same callable works on floats and numpy arrays.
"""

import cmath
import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .algebra import EpsSeries, RatFunc, RatMat
from .errors import DivergedTrajectory, EvaluationError, NumericalFailure
from .gspt import tangent_series

DEN_UNDERFLOW = 1e-300
GRID_DEN_TOL = 1e-6


@dataclass
class Binding:
    """Numeric values for parameters (and possibly other symbols) plus ``eps``."""

    values: dict = field(default_factory=dict)
    epsilon: float = 0.0

    def with_epsilon(self, eps):
        return Binding(dict(self.values), eps)


# code generation

def _horner(terms, nvars, names, start=0):
    """Source for sum(c * prod x_i^e_i) as nested Horner in each variable."""
    if not terms:
        return "0"
    if start == nvars:
        ((_, c),) = terms.items()
        return repr(float(c))
    # split by the power of variable ``start``
    groups = {}
    for exps, c in terms.items():
        groups.setdefault(exps[start], {})[exps] = c
    for e in groups:
        groups[e] = {tuple(0 if i == start else v for i, v in enumerate(ex)): c
                     for ex, c in groups[e].items()}
    name = names[start]
    top = max(groups)
    if top == 0:
        return _horner(groups[0], nvars, names, start + 1)
    # p = a_0 + x (a_1 + x (a_2 + ...)); skip runs of zero coefficients with powers
    expr = None
    prev = top
    for e in range(top, -1, -1):
        if e not in groups:
            continue
        coeff = _horner(_merge(groups[e]), nvars, names, start + 1)
        if expr is None:
            expr = coeff
        else:
            gap = prev - e
            xpow = name if gap == 1 else f"{name}**{gap}"
            expr = f"({coeff}) + {xpow}*({expr})" if coeff != "0" else f"{xpow}*({expr})"
        prev = e
    if prev:
        xpow = name if prev == 1 else f"{name}**{prev}"
        expr = f"{xpow}*({expr})"
    return expr


def _merge(terms):
    out = {}
    for ex, c in terms.items():
        out[ex] = out.get(ex, 0) + c
    return {k: v for k, v in out.items() if v}


def poly_source(raw, names):
    terms = {tuple(e): int(c) for e, c in raw.terms()}
    return _horner(terms, len(names), names)


def ratfunc_source(f, names):
    """Python expression for ``f`` with ring variable ``i`` spelled ``names[i]``."""
    num = poly_source(f._num, names)
    if f._den.is_one():
        return f"({num})"
    return f"({num})/({poly_source(f._den, names)})"


def compile_functions(funcs, args, binding, ring):
    """Compile RatFuncs into one callable ``fn(*args) -> tuple``.

    Ring symbols that are not arguments are replaced by their bound values;
    a missing value raises :class:`EvaluationError`.
    """
    args = list(args)
    used = set()
    for f in funcs:
        used |= f.free_symbols
    missing = sorted(s for s in used if s not in args and s not in binding.values)
    if missing:
        raise EvaluationError(f"unbound symbol(s): {', '.join(missing)}")
    names = []
    for n in ring.names:
        if n in args:
            names.append(f"_a{args.index(n)}")
        elif n in binding.values:
            names.append(f"({float(binding.values[n])!r})")
        else:
            names.append("_unused")
    body = ", ".join(ratfunc_source(f, names) for f in funcs)
    params = ", ".join(f"_a{i}" for i in range(len(args)))
    src = f"def _f({params}):\n    return ({body}{',' if len(funcs) == 1 else ''})\n"
    scope = {}
    exec(compile(src, "<slowmani>", "exec"), scope)
    return scope["_f"]


def denominator_functions(funcs, args, binding, ring):
    dens = []
    for f in funcs:
        if not f._den.is_constant():
            dens.append(RatFunc._raw(ring, f._den, ring.ctx.from_dict({}) + 1))
    return compile_functions(dens, args, binding, ring) if dens else None


def eval_numeric(obj, binding):
    """Evaluate a RatFunc (float), RatMat or EpsSeries (numpy array) at ``binding``."""
    if isinstance(obj, EpsSeries):
        total = None
        for i, c in enumerate(obj.coeffs):
            term = eval_numeric(c, binding) * binding.epsilon ** i
            total = term if total is None else total + term
        return total
    if isinstance(obj, RatMat):
        return np.array([eval_numeric(e, binding) for e in obj.entries],
                        dtype=float).reshape(obj.rows, obj.cols)
    if isinstance(obj, RatFunc):
        missing = sorted(s for s in obj.free_symbols if s not in binding.values)
        if missing:
            raise EvaluationError(f"unbound symbol(s): {', '.join(missing)}")
        vals = [float(binding.values.get(n, 0.0)) for n in obj.ring.names]
        den = _eval_raw(obj._den, vals)
        if abs(den) <= DEN_UNDERFLOW:
            raise EvaluationError(f"denominator {den!r} underflows")
        return _eval_raw(obj._num, vals) / den
    raise TypeError(f"cannot evaluate {type(obj).__name__}")


def _eval_raw(raw, vals):
    total = 0.0
    for exps, c in raw.terms():
        term = float(int(c))
        for v, e in zip(vals, exps):
            if e:
                term *= v ** int(e)
        total += term
    return total


# integration

def integrate_rk4(field, x0, dt, steps, record_every=1):
    """Classical fixed-step RK4 for the autonomous system ``x' = field(x)``.

    ``field`` maps a sequence of floats to a sequence of floats. Returns
    ``(times, states)`` as numpy arrays, recording every ``record_every``
    steps plus the final state.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if steps < 1:
        raise ValueError("steps must be at least 1")
    x = [float(v) for v in x0]
    n = len(x)
    h2, h6 = dt / 2.0, dt / 6.0
    rng = range(n)
    times, states = [0.0], [list(x)]
    for step in range(1, steps + 1):
        try:
            k1 = field(x)
            k2 = field([x[i] + h2 * k1[i] for i in rng])
            k3 = field([x[i] + h2 * k2[i] for i in rng])
            k4 = field([x[i] + dt * k3[i] for i in rng])
            x = [x[i] + h6 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]) for i in rng]
        except OverflowError:
            raise DivergedTrajectory(f"overflow at step {step}", step) from None
        if not all(math.isfinite(v) for v in x):
            raise DivergedTrajectory(f"non-finite state at step {step}", step)
        if step % record_every == 0 or step == steps:
            times.append(step * dt)
            states.append(x)
    return np.array(times), np.array(states)


def vector_field(spec, binding):
    """Callable ``x -> F(x, eps)`` for the full system at the bound ``eps``."""
    eps = float(binding.epsilon)
    parts = [(eps ** i, compile_functions(list(f), spec.state_vars, binding, spec.ring))
             for i, f in enumerate(spec.f_terms) if any(f)]
    n = spec.n

    def field(x):
        out = [0.0] * n
        for w, fn in parts:
            vals = fn(*x)
            for j in range(n):
                out[j] += w * vals[j]
        return out

    return field


# residual order

@dataclass
class ResidualReport:
    epsilons: list
    sup_residuals: list
    fitted_slope: float
    order: int
    exact: bool = False  # residual at machine zero for every eps
    tolerance: float = 0.25

    @property
    def target(self):
        return self.order + 1

    @property
    def passed(self):
        if self.exact:
            return True
        return bool(np.isfinite(self.fitted_slope) and
                    self.fitted_slope >= self.target - self.tolerance)


MACHINE_ZERO = 1e-12


def sample_grid(box, per_axis=11, exclude=None):
    """Uniform tensor grid over ``box``; drops points where ``exclude(p)`` is true."""
    axes = [np.linspace(float(lo), float(hi), per_axis) for lo, hi in box]
    pts = [tuple(p) for p in product(*axes)]
    if exclude is not None:
        pts = [p for p in pts if not exclude(p)]
    return pts


def _near_pole(dens, tol=GRID_DEN_TOL):
    if dens is None:
        return lambda p: False
    return lambda p: any(abs(v) < tol for v in dens(*p))


def validation_grid(spec, slow, binding, box=None, per_axis=11):
    """Default grid over the declared box, avoiding denominator zeros of the expansion."""
    box = box if box is not None else spec.box
    if box is None:
        raise EvaluationError("no sampling box: declare 'box' in the problem or pass a grid")
    funcs = [e for c in slow.phi.coeffs + slow.r.coeffs for e in c.entries]
    dens = denominator_functions(funcs, spec.chart_vars, binding, spec.ring)
    return sample_grid(box, per_axis, _near_pole(dens))


def conjugacy_defect_function(spec, slow, binding):
    """Callable ``(xi, eps) -> F(phi_(m), eps) - Dphi_(m) r_(m)`` (numpy vector)."""
    ring = spec.ring
    chart = spec.chart_vars
    m = slow.order
    phis = [list(c.entries) for c in slow.phi.coeffs]
    dphis = [list(c.entries) for c in tangent_series(slow.phi, chart).coeffs]
    rs = [list(c.entries) for c in slow.r.coeffs]
    phi_f = [compile_functions(p, chart, binding, ring) for p in phis]
    dphi_f = [compile_functions(p, chart, binding, ring) for p in dphis]
    r_f = [compile_functions(p, chart, binding, ring) for p in rs]
    F_f = [compile_functions(list(f), spec.state_vars, binding, ring) for f in spec.f_terms]
    n, k = spec.n, spec.k

    def defect(xi, eps):
        x = np.zeros(n)
        D = np.zeros((n, k))
        r = np.zeros(k)
        for i in range(m + 1):
            w = eps ** i
            x += w * np.asarray(phi_f[i](*xi), dtype=float)
            D += w * np.asarray(dphi_f[i](*xi), dtype=float).reshape(n, k)
            r += w * np.asarray(r_f[i](*xi), dtype=float)
        F = np.zeros(n)
        for i, f in enumerate(F_f):
            F += eps ** i * np.asarray(f(*x), dtype=float)
        return F - D @ r

    return defect


def residual_order_fit(spec, slow, grid, epsilons, binding=None):
    """Sup-norm conjugacy defect over ``grid`` for each eps and its log-log slope."""
    binding = binding or Binding()
    epsilons = [float(e) for e in epsilons]
    if len(epsilons) < 3:
        raise ValueError("need at least three epsilon values")
    if math.log10(max(epsilons) / min(epsilons)) < 1.5 - 1e-9:
        raise ValueError("epsilon values must span at least 1.5 decades")
    defect = conjugacy_defect_function(spec, slow, binding)
    sups = []
    for eps in epsilons:
        worst = 0.0
        for p in grid:
            try:
                d = defect(p, eps)
            except ZeroDivisionError:
                raise EvaluationError(f"division by zero at grid point {p}") from None
            if not np.all(np.isfinite(d)):
                raise EvaluationError(f"non-finite defect at grid point {p}")
            worst = max(worst, float(np.max(np.abs(d))))
        sups.append(worst)
    exact = all(s <= MACHINE_ZERO for s in sups)
    if exact or any(s <= 0.0 for s in sups):
        slope = float("nan")
    else:
        slope = float(np.polyfit(np.log(epsilons), np.log(sups), 1)[0])
    return ResidualReport(epsilons, sups, slope, slow.order, exact)


# normal hyperbolicity

@dataclass
class HyperbolicityReport:
    sample_points: list
    eigenvalue_real_parts: list
    min_abs_real_part: float
    tolerance: float = 1e-8

    @property
    def passed(self):
        return self.min_abs_real_part > self.tolerance

    @property
    def attracting(self):
        return all(max(re) < 0 for re in self.eigenvalue_real_parts)


def eigenvalues(A):
    """Eigenvalues of a small real matrix; closed form up to 2x2."""
    A = np.asarray(A, dtype=float)
    if A.shape == (1, 1):
        return np.array([complex(A[0, 0])])
    if A.shape == (2, 2):
        tr = A[0, 0] + A[1, 1]
        det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
        disc = cmath.sqrt(tr * tr / 4.0 - det)
        return np.array([tr / 2.0 + disc, tr / 2.0 - disc])
    try:
        return np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigenvalue iteration failed: {exc}") from None


def hyperbolicity_probe(frame, sample_points, binding=None, tol=1e-8):
    """Real parts of the eigenvalues of ``n0`` at each sample point."""
    binding = binding or Binding()
    ring = frame.n0_dyn.ring
    d = frame.n0_dyn.rows
    fn = compile_functions(list(frame.n0_dyn.entries), frame.chart_vars, binding, ring)
    reals = []
    for p in sample_points:
        try:
            A = np.asarray(fn(*p), dtype=float).reshape(d, d)
        except ZeroDivisionError:
            raise EvaluationError(f"division by zero at sample point {p}") from None
        reals.append([float(v) for v in np.real(eigenvalues(A))])
    min_abs = min((abs(v) for re in reals for v in re), default=float("nan"))
    return HyperbolicityReport(list(sample_points), reals, min_abs, tol)
