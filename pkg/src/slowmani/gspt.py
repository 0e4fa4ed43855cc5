"""Parametrisation method on a single level.

For ``x' = F0(x) + eps F1(x) + ...`` with a critical manifold embedded by
``phi0`` and a fast fibre frame ``N0``, we solve the conjugacy equation
``Dphi . r = F(phi, eps)`` order by order for the slow manifold ``phi`` and
reduced field ``r``, then the variational equation
``DF(phi, eps) N = N n + (d_xi N) r`` for the fast fibre bundle.

The order-i inhomogeneities are read off as the order-i coefficients of the
residuals of the partial sums, rather than from hand-expanded Taylor terms.
"""

from dataclasses import dataclass, field
from functools import cached_property

from .algebra import Composer, EpsSeries, RatMat, left_pseudo_inverse, mat_inverse
from .algebra.series import series_scale
from .errors import (FrameNotInvariant, InternalInconsistency, NotCriticalManifold,
                     ShapeMismatch)
from .frontend import Ansatz


def projector_pi(N):
    """Orthogonal projector ``1 - N (N^T N)^{-1} N^T`` onto the complement of im N."""
    return RatMat.identity(N.ring, N.rows) - N @ left_pseudo_inverse(N)


def projector_oblique(M, N):
    """Projector onto im M along im N: ``M (M^T pi(N) M)^{-1} M^T pi(N)``."""
    if M.rows != N.rows:
        raise ShapeMismatch(f"M has {M.rows} rows, N has {N.rows}")
    pi = projector_pi(N)
    Mt_pi = M.T @ pi
    return M @ mat_inverse(Mt_pi @ M) @ Mt_pi


def jacobian_at(funcs, state_vars, values):
    """Jacobian of ``funcs`` with respect to ``state_vars`` evaluated at ``values``."""
    J = RatMat.jacobian(funcs, state_vars)
    return J.subs(dict(zip(state_vars, values)))


@dataclass(frozen=True, eq=False)
class Frame:
    chart_vars: tuple
    phi0: RatMat
    dphi0: RatMat
    n0_frame: RatMat
    p0: RatMat
    n0_dyn: RatMat
    left_inv_dphi0: RatMat
    left_inv_n0: RatMat
    df0: RatMat = field(repr=False)

    @cached_property
    def aux(self):
        """Auxiliary projection ``(Dphi0^T Dphi0)^{-1} Dphi0^T P0``."""
        return self.left_inv_dphi0 @ self.p0

    @cached_property
    def n0_inv(self):
        return mat_inverse(self.n0_dyn)

    @cached_property
    def complement(self):
        return RatMat.identity(self.p0.ring, self.p0.rows) - self.p0

    @property
    def n(self):
        return self.dphi0.rows

    @property
    def k(self):
        return self.dphi0.cols


def build_frame(state_vars, f0, chart_vars, phi0, n0_frame):
    """Frame of an embedded critical manifold, checking every defining identity."""
    phi_vals = phi0.vector()
    at_phi0 = dict(zip(state_vars, phi_vals))
    residual = [f.subs(at_phi0) for f in f0]
    bad = [i for i, v in enumerate(residual) if v]
    if bad:
        raise NotCriticalManifold(
            f"F0(phi0) does not vanish: component {bad[0] + 1} is {residual[bad[0]]}")
    dphi0 = RatMat.jacobian(phi_vals, chart_vars)
    df0 = jacobian_at(f0, state_vars, phi_vals)
    if not (df0 @ dphi0).is_zero():
        raise NotCriticalManifold("DF0(phi0) Dphi0 does not vanish")
    left_inv_n0 = left_pseudo_inverse(n0_frame)
    df0_n0 = df0 @ n0_frame
    n0_dyn = left_inv_n0 @ df0_n0
    if n0_frame @ n0_dyn != df0_n0:
        raise FrameNotInvariant("N0 n0 != DF0(phi0) N0: the fibre frame is not invariant")
    p0 = projector_oblique(dphi0, n0_frame)
    return Frame(tuple(chart_vars), phi0, dphi0, n0_frame, p0, n0_dyn,
                 left_pseudo_inverse(dphi0), left_inv_n0, df0)


def compute_n0(spec):
    """Frame (with ``n0``) of a problem's leading-order critical manifold."""
    if "_frame" not in spec.__dict__:
        frame = build_frame(spec.state_vars, spec.f_terms[0], spec.chart_vars,
                            spec.phi0, spec.n0_frame)
        object.__setattr__(spec, "_frame", frame)
    return spec.__dict__["_frame"]


def _jacobians(spec):
    if "_jac" not in spec.__dict__:
        object.__setattr__(spec, "_jac", tuple(
            RatMat.jacobian(f, spec.state_vars) for f in spec.f_terms))
    return spec.__dict__["_jac"]


def field_series(spec, phi, order, jacobian=False):
    """``F(phi(xi, eps), eps)`` (and optionally ``DF(phi, eps)``) to ``eps^order``."""
    ring = spec.ring
    comp = Composer(spec.state_vars, phi, order)
    n = spec.n
    F = EpsSeries.zeros(ring, n, 1, order)
    DF = EpsSeries.zeros(ring, n, n, order) if jacobian else None
    jac = _jacobians(spec) if jacobian else ()
    for i, f in enumerate(spec.f_terms):
        if i > order:
            break
        if any(f):
            part = comp.compose_mat(RatMat.column(ring, f)).pad(order)
            F = F + part.shift(i)
        if jacobian and not jac[i].is_zero():
            DF = DF + comp.compose_mat(jac[i]).pad(order).shift(i)
    return (F, DF) if jacobian else F


def tangent_series(series, chart_vars):
    """``D_xi`` of a column series, as a series of Jacobian matrices."""
    return series.map(lambda c: RatMat.jacobian(c.vector(), chart_vars))


def conjugacy_residual_series(spec, phi, r, order):
    """Series of ``Dphi . r - F(phi, eps)`` through ``eps^order``."""
    phi = phi.pad(order)
    r = r.pad(order)
    if phi.shape != (spec.n, 1) or r.shape != (spec.k, 1):
        raise ShapeMismatch(f"phi {phi.shape} / r {r.shape} do not match n={spec.n}, k={spec.k}")
    F = field_series(spec, phi, order)
    return tangent_series(phi, spec.chart_vars) @ r - F


def _directional(N, r, chart_vars):
    """``(d_xi N) . r = sum_j (d N / d xi_j) r_j`` as a series."""
    acc = None
    for j, v in enumerate(chart_vars):
        rj = r.map(lambda c, j=j: RatMat(c.ring, 1, 1, [c[j, 0]]))
        term = series_scale(N.diff(v), rj)
        acc = term if acc is None else acc + term
    return acc


def variational_residual_series(spec, slow, n_frame, n_dyn, order):
    """Series of ``N n + (d_xi N) r - DF(phi, eps) N`` through ``eps^order``."""
    phi = slow.phi.pad(order)
    r = slow.r.pad(order)
    N = n_frame.pad(order)
    nd = n_dyn.pad(order)
    _, DF = field_series(spec, phi, order, jacobian=True)
    return N @ nd + _directional(N, r, spec.chart_vars) - DF @ N


@dataclass(frozen=True, eq=False)
class OrderSolution:
    r: RatMat
    y: RatMat
    x: RatMat
    phi: RatMat


def solve_conjugacy_order(frame, G, ansatz=Ansatz.ZERO, slow_indices=None):
    """Solve ``Dphi0 r_i - DF0(phi0) phi_i = G_i`` for one order.

    Under the graph ansatz the tangential part ``X_i`` is chosen so that
    ``phi_i`` vanishes on the coordinates ``slow_indices`` (0-based).
    """
    ansatz = Ansatz(ansatz)
    ring = frame.p0.ring
    r = frame.aux @ G
    y = -(frame.n0_inv @ (frame.left_inv_n0 @ (frame.complement @ G)))
    ny = frame.n0_frame @ y
    if ansatz is Ansatz.GRAPH:
        idx = list(slow_indices)
        block = frame.dphi0.submatrix(idx, list(range(frame.k)))
        x = -(mat_inverse(block) @ ny.submatrix(idx, [0]))
        phi = frame.dphi0 @ x + ny
    else:
        x = RatMat.zeros(ring, frame.k, 1)
        phi = ny
    return OrderSolution(r, y, x, phi)


@dataclass(frozen=True, eq=False)
class SlowExpansion:
    order: int
    phi: EpsSeries
    r: EpsSeries
    y: EpsSeries
    x: EpsSeries
    g: tuple  # g[i] is G_i; g[0] is None
    frame: Frame
    ansatz: Ansatz


def expand_slow_manifold(spec, order, ansatz=None, slow_indices=None, check=True):
    """Slow manifold ``phi`` and reduced field ``r`` through ``eps^order``."""
    if order < 0:
        raise ValueError("order must be non-negative")
    ansatz = Ansatz(ansatz) if ansatz is not None else spec.ansatz
    if ansatz is Ansatz.GRAPH and slow_indices is None:
        slow_indices = spec.graph_slow_indices
    frame = compute_n0(spec)
    ring = spec.ring
    n, k = spec.n, spec.k
    zn, zk, zy = RatMat.zeros(ring, n, 1), RatMat.zeros(ring, k, 1), RatMat.zeros(ring, n - k, 1)
    phis, rs, ys, xs, gs = [spec.phi0], [zk], [zy], [zk], [None]
    for i in range(1, order + 1):
        # phi_i and r_i are still zero in the partial sums
        phi = EpsSeries(phis + [zn])
        r = EpsSeries(rs + [zk])
        G = -conjugacy_residual_series(spec, phi, r, i)[i]
        sol = solve_conjugacy_order(frame, G, ansatz, slow_indices)
        phis.append(sol.phi)
        rs.append(sol.r)
        ys.append(sol.y)
        xs.append(sol.x)
        gs.append(G)
    out = SlowExpansion(order, EpsSeries(phis), EpsSeries(rs), EpsSeries(ys), EpsSeries(xs),
                        tuple(gs), frame, ansatz)
    if check:
        res = conjugacy_residual_series(spec, out.phi, out.r, order)
        bad = res.valuation()
        if bad is not None:
            raise InternalInconsistency(f"conjugacy residual has a non-zero eps^{bad} coefficient")
    return out


@dataclass(frozen=True, eq=False)
class FibreExpansion:
    order: int
    n_frame: EpsSeries
    n_dyn: EpsSeries
    l: EpsSeries
    m_choice: EpsSeries
    h: tuple  # h[i] is H_i; h[0] is None


def solve_variational_order(frame, H, M=None):
    """``(L_i, n_i, N_i)`` from the order-i inhomogeneity ``H_i``; ``M_i`` defaults to 0."""
    ring = frame.p0.ring
    d = frame.n0_frame.cols
    if M is None:
        M = RatMat.zeros(ring, d, d)
    L = frame.aux @ H @ frame.n0_inv
    comm = M @ frame.n0_dyn - frame.n0_dyn @ M
    nd = frame.left_inv_n0 @ (frame.complement @ H - frame.n0_frame @ comm)
    N = frame.n0_frame @ M + frame.dphi0 @ L
    return L, nd, N


def expand_fibre_bundle(spec, slow, order, m_choices=None, check=True):
    """Fast fibre frame ``N`` and its dynamics ``n`` through ``eps^order``."""
    if order > slow.order:
        raise ValueError(f"fibre order {order} exceeds slow expansion order {slow.order}")
    frame = slow.frame
    ring = spec.ring
    n, d = spec.n, spec.n - spec.k
    zN, zn, zL = RatMat.zeros(ring, n, d), RatMat.zeros(ring, d, d), RatMat.zeros(ring, spec.k, d)
    Ns, nds, Ls, Ms, Hs = [spec.n0_frame], [frame.n0_dyn], [zL], [zn], [None]
    for i in range(1, order + 1):
        trunc = _truncated(slow, i)
        res = variational_residual_series(
            spec, trunc, EpsSeries(Ns + [zN]), EpsSeries(nds + [zn]), i)
        H = -res[i]
        M = m_choices[i - 1] if m_choices else None
        L, nd, N = solve_variational_order(frame, H, M)
        Ns.append(N)
        nds.append(nd)
        Ls.append(L)
        Ms.append(M if M is not None else zn)
        Hs.append(H)
    out = FibreExpansion(order, EpsSeries(Ns), EpsSeries(nds), EpsSeries(Ls), EpsSeries(Ms),
                         tuple(Hs))
    if check and order > 0:
        res = variational_residual_series(spec, _truncated(slow, order), out.n_frame,
                                          out.n_dyn, order)
        bad = res.valuation()
        if bad is not None:
            raise InternalInconsistency(f"variational residual has a non-zero eps^{bad} coefficient")
    return out


def _truncated(slow, order):
    return SlowExpansion(order, slow.phi.truncate(order), slow.r.truncate(order),
                         slow.y.truncate(order), slow.x.truncate(order), slow.g[:order + 1],
                         slow.frame, slow.ansatz)
