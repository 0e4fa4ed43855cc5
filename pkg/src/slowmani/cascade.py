"""Nested slow, infra-slow, ... manifolds.

The reduced field ``r(xi, eps)`` of one level, divided by its leading power
of ``eps``, is again a singular perturbation problem on the chart. Given a
user-supplied embedding and fibre frame for its critical manifold, the same
single-level machinery applies one level down.
"""

from dataclasses import dataclass, field
from enum import Enum

from .algebra import EpsSeries, RatMat
from .errors import DegenerateLevel, MathError, NotCriticalSubmanifold
from .frontend import Ansatz, ProblemSpec
from .gspt import (compute_n0, conjugacy_residual_series, expand_slow_manifold)


@dataclass(frozen=True, eq=False)
class CascadeLevel:
    level_index: int
    dim: int
    leading_order: int  # None when the reduced field vanishes to the computed order
    reduced_field: EpsSeries
    embedding_to_parent: object = None  # SlowExpansion of the parent level
    frame: object = None  # Frame of this level's critical manifold, if one was supplied
    problem: object = None


@dataclass(frozen=True, eq=False)
class CascadeResult:
    levels: tuple
    conjugacy_checks: tuple  # (level index, order checked, passed)
    two_path: object = None  # TwoPathCheck or None

    @property
    def j_sequence(self):
        return tuple(l.leading_order for l in self.levels if l.leading_order is not None)

    @property
    def dim_sequence(self):
        return tuple(l.dim for l in self.levels)


@dataclass(frozen=True, eq=False)
class TwoPathCheck:
    formula: RatMat  # projector composition applied to G2
    recursion: RatMat  # eps^2 coefficient from the level-1 expansion
    agree: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "agree", self.formula == self.recursion)


def shift_and_reframe(r_series, level, parent, order=None):
    """Divide a reduced field by its leading power of eps and pose it as a new problem.

    ``parent`` is the problem whose chart carries ``r_series``; ``level`` is the
    :class:`~slowmani.frontend.LevelSpec` with the next embedding and frame.
    Returns ``(shift, ProblemSpec)``.
    """
    j = r_series.valuation()
    if j is None:
        raise DegenerateLevel("reduced field vanishes identically to the computed order")
    if j == 0:
        raise DegenerateLevel("reduced field has a non-zero eps^0 term; nothing to shift")
    shifted = r_series.coeffs[j:]
    if order is not None:
        shifted = shifted[:order + 1]
    f_terms = tuple(tuple(c.vector()) for c in shifted)
    lead = f_terms[0]
    at = dict(zip(parent.chart_vars, level.phi0.vector()))
    for i, f in enumerate(lead):
        v = f.subs(at)
        if v:
            raise NotCriticalSubmanifold(
                f"level {level.index}: leading reduced field does not vanish on phi0"
                f"{level.index} (component {i + 1} is {v})")
    spec = ProblemSpec(
        name=f"{parent.name}/level{level.index}",
        ring=parent.ring,
        state_vars=parent.chart_vars,
        params=parent.params,
        f_terms=f_terms,
        chart_vars=level.chart_vars,
        phi0=level.phi0,
        n0_frame=level.n0_frame,
        ansatz=level.ansatz or Ansatz.ZERO,
        graph_slow_indices=level.graph_slow_indices,
        box=level.box,
    )
    return j, spec


def aux_projector(frame):
    """``(Dphi0^T Dphi0)^{-1} Dphi0^T P0`` of a level's frame."""
    return frame.aux


def infra_slow_leading(frame0, frame1, G2):
    """Leading infra-slow field ``P1~(eta) P0~(xi) G2(xi)`` at ``xi = phi0^(1)(eta)``."""
    at = dict(zip(frame0.chart_vars, frame1.phi0.vector()))
    return frame1.aux @ (frame0.aux @ G2).subs(at)


def default_orders(order, depth):
    """``(m, m - 1, ...)``, never below 1."""
    return tuple(max(order - i, 1) for i in range(depth))


def run_cascade(spec, orders=None, depth=None):
    """Expand level after level along the embeddings declared in ``spec.levels``.

    ``depth`` counts reduced fields (levels below the full system) and
    ``orders[i]`` is the expansion order of the problem on level ``i``.
    The cascade stops early if a reduced field vanishes identically.
    """
    if depth is None:
        depth = len(orders) if orders is not None else len(spec.levels) + 1
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if depth > len(spec.levels) + 1:
        raise DegenerateLevel(
            f"depth {depth} needs {depth - 1} level sections, the problem declares "
            f"{len(spec.levels)}")
    orders = tuple(orders) if orders is not None else default_orders(2, depth)
    if len(orders) < depth:
        orders = orders + default_orders(orders[-1] - 1, depth - len(orders))

    problem = spec
    f_series = EpsSeries(RatMat.column(spec.ring, f) for f in spec.f_terms)
    levels = [CascadeLevel(0, spec.n, 0, f_series, None, _level(0, compute_n0, spec), spec)]
    checks = []
    g2 = None
    j_total = 0
    for L in range(1, depth + 1):
        m = orders[L - 1]
        slow = _level(L - 1, expand_slow_manifold, problem, m, check=False)
        res = _level(L - 1, conjugacy_residual_series, problem, slow.phi, slow.r, m)
        checks.append((L - 1, m, res.is_zero()))
        if L == 1 and m >= 2:
            g2 = slow.g[2]
        j = slow.r.valuation()
        if j is None:
            # vanishing reduced field: the manifold consists of equilibria
            levels.append(CascadeLevel(L, problem.k, None, slow.r, slow))
            break
        j_total += j
        avail = m - j
        reduced = slow.r.shift(-j).truncate(avail)
        child = cframe = None
        if L - 1 < len(spec.levels):
            _, child = _level(L, shift_and_reframe, slow.r, spec.levels[L - 1], problem, avail)
            cframe = _level(L, compute_n0, child)
        levels.append(CascadeLevel(L, problem.k, j_total, reduced, slow, cframe, child))
        if L < depth:
            if orders[L] > avail:
                raise DegenerateLevel(
                    f"level {L}: order {orders[L]} exceeds the {avail} available after "
                    f"dividing by eps^{j}")
            problem = child

    two_path = None
    if len(levels) >= 3 and levels[1].leading_order == 1 and g2 is not None:
        formula = infra_slow_leading(levels[0].frame, levels[1].frame, g2)
        # eps^2 coefficient of r^(2) in the original scaling is eps^1 of the level-1 field
        lvl2 = levels[2].embedding_to_parent
        two_path = TwoPathCheck(formula, lvl2.r[1] if lvl2.order >= 1 else None)
    return CascadeResult(tuple(levels), tuple(checks), two_path)


def _level(i, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except MathError as exc:
        msg = str(exc)
        if not msg.startswith("level "):
            exc.args = (f"level {i}: {msg}",) + exc.args[1:]
        raise


class Classification(Enum):
    EQUILIBRIUM_CURVE = "EquilibriumCurve"
    TRIVIAL_S1 = "TrivialS1"
    NOT_APPLICABLE = "NotApplicable"


def _constant_direction(vec, state_vars):
    """Split ``vec = c f`` with ``c`` free of the state variables, or return None."""
    pivot = next((v for v in vec if v), None)
    if pivot is None:
        return None
    ratios = [v / pivot for v in vec]
    if any(set(c.free_symbols) & set(state_vars) for c in ratios):
        return None
    return ratios


def check_no_infra_slow(spec):
    """Classify ``F = N0 f0 + eps N1 f1`` with constant column vectors ``N0, N1``."""
    terms = [t for t in spec.f_terms]
    if len(terms) > 2 and any(any(t) for t in terms[2:]):
        return Classification.NOT_APPLICABLE
    n0 = _constant_direction(terms[0], spec.state_vars)
    if n0 is None:
        return Classification.NOT_APPLICABLE
    if len(terms) < 2 or not any(terms[1]):
        return Classification.TRIVIAL_S1
    n1 = _constant_direction(terms[1], spec.state_vars)
    if n1 is None:
        return Classification.NOT_APPLICABLE
    parallel = all((n0[a] * n1[b] - n0[b] * n1[a]).is_zero()
                   for a in range(len(n0)) for b in range(a + 1, len(n0)))
    return Classification.TRIVIAL_S1 if parallel else Classification.EQUILIBRIUM_CURVE
