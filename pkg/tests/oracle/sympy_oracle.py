"""Independent sympy re-derivation of the order-by-order expansions.

Used offline to produce the frozen DERIVED values in the test-suite and,
for the small problems, run live as a second route. It shares no code with
``slowmani``: residual coefficients come from eps-derivatives of the full
expression and every linear solve goes through sympy.
"""

import sympy as sp


def _coeff(expr, eps, i):
    return sp.diff(expr, eps, i).subs(eps, 0) / sp.factorial(i)


def _simp(M):
    return M.applyfunc(sp.cancel)


class Oracle:
    def __init__(self, state, f_terms, chart, phi0, N0, graph=None):
        self.eps = sp.Symbol("eps")
        self.x = list(state)
        self.xi = list(chart)
        self.F = sp.zeros(len(state), 1)
        for i, f in enumerate(f_terms):
            self.F += self.eps ** i * sp.Matrix(f)
        self.phi0 = sp.Matrix(phi0)
        self.N0 = sp.Matrix(N0)
        self.graph = graph
        sub = dict(zip(self.x, self.phi0))
        self.D = self.phi0.jacobian(self.xi)
        DF0 = sp.Matrix(f_terms[0]).jacobian(self.x).subs(sub)
        N = self.N0
        pi = sp.eye(len(self.x)) - N * (N.T * N).inv() * N.T
        self.P = _simp(self.D * (self.D.T * pi * self.D).inv() * self.D.T * pi)
        self.n0 = _simp((N.T * N).inv() * N.T * DF0 * N)
        self.aux = _simp((self.D.T * self.D).inv() * self.D.T * self.P)
        self.nleft = _simp((N.T * N).inv() * N.T)

    def slow(self, order):
        eps = self.eps
        n, k = len(self.x), len(self.xi)
        phis, rs, ys, xs, gs = [self.phi0], [sp.zeros(k, 1)], [None], [None], [None]
        for i in range(1, order + 1):
            phi = sum((eps ** j * p for j, p in enumerate(phis)), sp.zeros(n, 1))
            r = sum((eps ** j * q for j, q in enumerate(rs)), sp.zeros(k, 1))
            R = phi.jacobian(self.xi) * r - self.F.subs(dict(zip(self.x, phi)), simultaneous=True)
            G = _simp(-R.applyfunc(lambda e: _coeff(e, eps, i)))
            ri = _simp(self.aux * G)
            Y = _simp(-self.n0.inv() * self.nleft * (sp.eye(n) - self.P) * G)
            if self.graph is None:
                X = sp.zeros(k, 1)
            else:
                # coordinates on the graph indices of phi_i must vanish
                X = sp.Matrix(sp.symbols(f"_X0:{k}"))
                eqs = [(self.D * X + self.N0 * Y)[s] for s in self.graph]
                sol = sp.solve(eqs, list(X), dict=True)[0]
                X = _simp(X.subs(sol))
            phis.append(_simp(self.D * X + self.N0 * Y))
            rs.append(ri)
            ys.append(Y)
            xs.append(X)
            gs.append(G)
        self.phis, self.rs, self.ys, self.xs, self.gs = phis, rs, ys, xs, gs
        return self

    def fibres(self, order):
        eps = self.eps
        n = len(self.x)
        d = self.N0.shape[1]
        phi = sum((eps ** j * p for j, p in enumerate(self.phis[:order + 1])), sp.zeros(n, 1))
        r = sum((eps ** j * q for j, q in enumerate(self.rs[:order + 1])),
                sp.zeros(len(self.xi), 1))
        DF = self.F.jacobian(self.x).subs(dict(zip(self.x, phi)), simultaneous=True)
        Ns, nds, Ls, Hs = [self.N0], [self.n0], [None], [None]
        for i in range(1, order + 1):
            N = sum((eps ** j * m for j, m in enumerate(Ns)), sp.zeros(n, d))
            nd = sum((eps ** j * m for j, m in enumerate(nds)), sp.zeros(d, d))
            dN = sp.zeros(n, d)
            for j, v in enumerate(self.xi):
                dN += N.diff(v) * r[j]
            V = N * nd + dN - DF * N
            H = _simp(-V.applyfunc(lambda e: _coeff(e, eps, i)))
            L = _simp(self.aux * H * self.n0.inv())
            ni = _simp(self.nleft * (sp.eye(n) - self.P) * H)
            Ns.append(_simp(self.D * L))
            nds.append(ni)
            Ls.append(L)
            Hs.append(H)
        self.Ns, self.nds, self.Ls, self.Hs = Ns, nds, Ls, Hs
        return self


def parabola(graph=(0,)):
    x1, x2, xi = sp.symbols("x1 x2 xi")
    g = 1 - x2 - x1 ** 2
    return Oracle([x1, x2], [[2 * x1 * g, x2 * g], [2, -x1]], [xi], [xi, 1 - xi ** 2],
                  [[2 * xi], [1 - xi ** 2]], graph)


def valorani():
    x1, x2, x3, a, b, dbar = sp.symbols("x1 x2 x3 xi1 xi2 dbar")
    f0, f1, f2 = x1 - x2 ** 2, x1 * x2 - x3, dbar * (x2 * x3 - x1)
    return Oracle([x1, x2, x3], [[-f0, 2 * f0, 0], [-f1, -f1, f1], [f2, -f2, -f2]], [a, b],
                  [a ** 2, a, b], [[-1], [2], [0]])


def feliu():
    x1, x2, x3, a, b = sp.symbols("x1 x2 x3 xi1 xi2")
    k1, k2, km2, ka = sp.symbols("k1 k2 km2 kappa")
    f0 = k1 * x1 ** 2 * x2 ** 2 - k1 * x3 ** 3 / ka ** 3
    f1 = k2 * x1 * x3 - km2 * x2 ** 2
    return Oracle([x1, x2, x3], [[-2 * f0, -2 * f0, 3 * f0], [-f1, 2 * f1, -f1]], [a, b],
                  [a ** 3, b ** 3, ka * a ** 2 * b ** 2], [[-2], [-2], [3]])


def dsl(expr):
    """Render a sympy expression in the problem-file syntax."""
    return str(sp.factor(expr)).replace("**", "^")


if __name__ == "__main__":
    o = parabola().slow(2).fibres(1)
    print("parabola graph")
    for i in (1, 2):
        print(f"  r{i} =", dsl(o.rs[i][0]), "| phi{i} =", [dsl(e) for e in o.phis[i]],
              "| X =", dsl(o.xs[i][0]), "| Y =", dsl(o.ys[i][0]))
    print("  H1 =", [dsl(e) for e in o.Hs[1]], "L1 =", dsl(o.Ls[1][0]), "n1 =", dsl(o.nds[1][0]))
    print("  P0 =", [dsl(e) for e in o.P], "n0 =", dsl(o.n0[0]))
    z = parabola(None).slow(2).fibres(1)
    print("parabola zero")
    print("  r2 =", dsl(z.rs[2][0]), "phi1 =", [dsl(e) for e in z.phis[1]],
          "phi2 =", [dsl(e) for e in z.phis[2]])
    print("  H1 =", [dsl(e) for e in z.Hs[1]], "L1 =", dsl(z.Ls[1][0]), "n1 =", dsl(z.nds[1][0]))
    v = valorani().slow(2).fibres(1)
    print("valorani")
    print("  r2 =", [dsl(e) for e in v.rs[2]])
    print("  phi2 =", [dsl(e) for e in v.phis[2]])
    print("  n1 =", dsl(v.nds[1][0]))
    f = feliu().slow(1).fibres(1)
    print("feliu")
    print("  L1 =", [dsl(e) for e in f.Ls[1]])
    print("  n1 =", dsl(f.nds[1][0]))
