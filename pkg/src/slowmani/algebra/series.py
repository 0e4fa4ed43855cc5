"""Truncated power series in the small parameter ``eps``.

Coefficients are :class:`RatMat` values of a common shape; vectors are
stored as single columns and scalars as 1x1 matrices.
"""

from ..errors import DivisionByZero, SeriesDivisionByZero, ShapeMismatch
from .matrix import RatMat


class EpsSeries:
    """``c_0 + eps c_1 + ... + eps^m c_m`` with the remainder discarded."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        coeffs = tuple(coeffs)
        if not coeffs:
            raise ShapeMismatch("a series needs at least one coefficient")
        shape = coeffs[0].shape
        if any(c.shape != shape for c in coeffs):
            raise ShapeMismatch("series coefficients differ in shape")
        self.coeffs = coeffs

    @classmethod
    def zeros(cls, ring, rows, cols, order):
        return cls([RatMat.zeros(ring, rows, cols)] * (order + 1))

    @classmethod
    def constant(cls, mat, order):
        z = RatMat.zeros(mat.ring, mat.rows, mat.cols)
        return cls([mat] + [z] * order)

    @classmethod
    def scalar(cls, ring, values):
        return cls([RatMat(ring, 1, 1, [v]) for v in values])

    @property
    def order(self):
        return len(self.coeffs) - 1

    @property
    def shape(self):
        return self.coeffs[0].shape

    @property
    def ring(self):
        return self.coeffs[0].ring

    def __getitem__(self, i):
        return self.coeffs[i]

    def __len__(self):
        return len(self.coeffs)

    def truncate(self, order):
        if order > self.order:
            raise ValueError(f"cannot extend a series of order {self.order} to {order}")
        return EpsSeries(self.coeffs[:order + 1])

    def pad(self, order):
        """Extend with zero coefficients up to ``order``."""
        if order <= self.order:
            return self.truncate(order)
        z = RatMat.zeros(self.ring, *self.shape)
        return EpsSeries(self.coeffs + (z,) * (order - self.order))

    def shift(self, j):
        """Multiply by ``eps^j`` (j > 0) or divide by ``eps^-j`` (j < 0), keeping the order."""
        z = RatMat.zeros(self.ring, *self.shape)
        if j >= 0:
            return EpsSeries(((z,) * j + self.coeffs)[:len(self.coeffs)])
        j = -j
        if any(not c.is_zero() for c in self.coeffs[:j]):
            raise ValueError("series is not divisible by eps^%d" % j)
        return EpsSeries(self.coeffs[j:] + (z,) * j)

    def valuation(self):
        """Index of the first non-zero coefficient, or None for the zero series."""
        for i, c in enumerate(self.coeffs):
            if not c.is_zero():
                return i
        return None

    def is_zero(self):
        return self.valuation() is None

    def map(self, fn):
        return EpsSeries(fn(c) for c in self.coeffs)

    def diff(self, var):
        return self.map(lambda c: c.diff(var))

    def subs(self, mapping):
        return self.map(lambda c: c.subs(mapping))

    def total(self):
        """Sum of all coefficients; useful for partial sums evaluated at a point."""
        acc = self.coeffs[0]
        for c in self.coeffs[1:]:
            acc = acc + c
        return acc

    def __add__(self, other):
        return series_arith(self, other, "add")

    def __sub__(self, other):
        return series_arith(self, other, "sub")

    def __matmul__(self, other):
        return series_arith(self, other, "mul")

    def __neg__(self):
        return self.map(lambda c: -c)

    def __eq__(self, other):
        return isinstance(other, EpsSeries) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return "EpsSeries(" + ", ".join(str(c) for c in self.coeffs) + ")"


def series_arith(a, b, op):
    """Add, subtract or multiply (matrix product) two series, truncating to the lower order."""
    m = min(a.order, b.order)
    if op in ("add", "sub"):
        if a.shape != b.shape:
            raise ShapeMismatch(f"{op}: series shapes {a.shape} and {b.shape} differ")
        if op == "add":
            return EpsSeries(a[i] + b[i] for i in range(m + 1))
        return EpsSeries(a[i] - b[i] for i in range(m + 1))
    if op != "mul":
        raise ValueError(f"unknown series operation {op!r}")
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"mul: series shapes {a.shape} and {b.shape} are incompatible")
    ring = a.ring
    out = []
    for i in range(m + 1):
        acc = RatMat.zeros(ring, a.shape[0], b.shape[1])
        for j in range(i + 1):
            if a[j].is_zero() or b[i - j].is_zero():
                continue
            acc = acc + a[j] @ b[i - j]
        out.append(acc)
    return EpsSeries(out)


# scalar series as plain lists of RatFunc

def _smul(a, b, m):
    z = a[0].ring.zero
    out = []
    for i in range(m + 1):
        acc = z
        for j in range(i + 1):
            if a[j] and b[i - j]:
                acc = acc + a[j] * b[i - j]
        out.append(acc)
    return out


def _sdiv(num, den, m):
    d0 = den[0]
    if d0.is_zero():
        raise SeriesDivisionByZero("leading coefficient of the denominator series vanishes")
    inv0 = d0.inverse()
    q = []
    for i in range(m + 1):
        acc = num[i]
        for k in range(1, i + 1):
            if den[k] and q[i - k]:
                acc = acc - den[k] * q[i - k]
        q.append(acc * inv0)
    return q


class Composer:
    """Expand many functions of ``x`` along one series ``x = phi(eps)``.

    Two routes are available. ``"taylor"`` (default) sums
    ``d^a f(phi_0) / a! * (phi - phi_0)^a`` over multi-indices ``|a| <= m``,
    reducing every derivative at ``phi_0`` on its own; intermediate degrees
    stay close to those of the result. ``"quotient"`` substitutes the series
    into numerator and denominator separately and divides the two truncated
    series. Powers of the substituted series are cached in both routes.
    """

    def __init__(self, variables, phi, order, method="taylor"):
        if phi.shape[1] != 1 or phi.shape[0] != len(variables):
            raise ShapeMismatch(
                f"phi has shape {phi.shape}, expected ({len(variables)}, 1)"
            )
        if method not in ("taylor", "quotient"):
            raise ValueError(f"unknown composition method {method!r}")
        if phi.order < order:
            phi = phi.pad(order)
        self.ring = phi.ring
        self.order = order
        self.method = method
        self.variables = tuple(variables)
        self.index = {self.ring.index(v): k for k, v in enumerate(variables)}
        self.base = {k: [phi[i][k, 0] for i in range(order + 1)] for k in range(len(variables))}
        z = self.ring.zero
        self.delta = {k: [z] + b[1:] for k, b in self.base.items()}
        self.phi0 = {v: phi[0][k, 0] for k, v in enumerate(variables)}
        self._powers = {}
        self._monos = {}

    def _power(self, k, e, table):
        key = (k, e, table)
        got = self._powers.get(key)
        if got is None:
            src = self.base if table == "base" else self.delta
            if e == 1:
                got = src[k]
            else:
                got = _smul(self._power(k, e - 1, table), src[k], self.order)
            self._powers[key] = got
        return got

    def _poly(self, raw):
        ring = self.ring
        ctx = ring.ctx
        m = self.order
        z = ring.zero
        out = [z] * (m + 1)
        # group terms by the exponents of the substituted variables
        groups = {}
        for exps, c in raw.terms():
            sub = tuple((i, exps[i]) for i in self.index if exps[i])
            rest = [0 if i in self.index else e for i, e in enumerate(exps)]
            groups.setdefault(sub, []).append((tuple(rest), int(c)))
        for sub, rest_terms in groups.items():
            coef = type(z)._raw(ring, ctx.from_dict(dict(rest_terms)), ctx.from_dict({}) + 1)
            series = None
            for i, e in sub:
                p = self._power(self.index[i], e, "base")
                series = p if series is None else _smul(series, p, m)
            if series is None:
                out[0] = out[0] + coef
                continue
            out = [o + coef * s if s else o for o, s in zip(out, series)]
        return out

    def _multi_indices(self):
        n, m = len(self.variables), self.order
        out = [()]
        for _ in range(n):
            out = [a + (e,) for a in out for e in range(m + 1)]
        return [a for a in out if 0 < sum(a) <= m]

    def _delta_monomial(self, alpha):
        """Series of ``prod_k (phi_k - phi_0k)^alpha_k``, starting at eps^|alpha|."""
        got = self._monos.get(alpha)
        if got is None:
            got = None
            for k, e in enumerate(alpha):
                if e:
                    p = self._power(k, e, "delta")
                    got = p if got is None else _smul(got, p, self.order)
            self._monos[alpha] = got
        return got

    def _taylor(self, f):
        from math import factorial
        m = self.order
        ring = self.ring
        try:
            out = [f.subs(self.phi0)] + [ring.zero] * m
        except DivisionByZero:
            raise SeriesDivisionByZero(
                "denominator vanishes identically at the leading substitution") from None
        if m == 0:
            return out
        alphas = sorted(self._multi_indices(), key=lambda a: (sum(a), a))
        derivs = {(0,) * len(self.variables): f}
        for alpha in alphas:
            # differentiate the parent multi-index once more
            k = max(i for i, e in enumerate(alpha) if e)
            parent = alpha[:k] + (alpha[k] - 1,) + alpha[k + 1:]
            d = derivs[parent].diff(self.variables[k])
            derivs[alpha] = d
            if d.is_zero():
                continue
            mono = self._delta_monomial(alpha)
            if not any(mono):
                continue
            denom = 1
            for e in alpha:
                denom *= factorial(e)
            c = d.subs(self.phi0) / denom
            if not c:
                continue
            out = [o + c * s if s else o for o, s in zip(out, mono)]
        return out

    def compose(self, f):
        """Scalar series of ``f(phi(eps))`` as a list of RatFunc."""
        if f.is_zero():
            return [self.ring.zero] * (self.order + 1)
        if not (f.free_symbols & set(self.variables)):
            return [f] + [self.ring.zero] * self.order
        if self.method == "taylor":
            return self._taylor(f)
        num = self._poly(f._num)
        if f._den.is_constant():
            d = f.ring.const(int(f._den.leading_coefficient()))
            return [c / d for c in num]
        den = self._poly(f._den)
        return _sdiv(num, den, self.order)

    def compose_mat(self, A):
        """Series of a RatMat composed entrywise."""
        cols = [self.compose(a) for a in A.entries]
        return EpsSeries(
            RatMat(self.ring, A.rows, A.cols, [c[i] for c in cols]) for i in range(self.order + 1)
        )


def series_compose(f, variables, phi, order, method="taylor"):
    """Scalar (1x1) series of ``f(phi(xi, eps))`` truncated at ``eps^order``."""
    comp = Composer(variables, phi, order, method)
    return EpsSeries.scalar(f.ring, comp.compose(f))


def series_scale(a, s):
    """Product of a matrix series with a scalar (1x1) series."""
    if s.shape != (1, 1):
        raise ShapeMismatch(f"scale: expected a scalar series, got shape {s.shape}")
    m = min(a.order, s.order)
    out = []
    for i in range(m + 1):
        acc = RatMat.zeros(a.ring, *a.shape)
        for j in range(i + 1):
            c = s[i - j][0, 0]
            if c and not a[j].is_zero():
                acc = acc + a[j].scale(c)
        out.append(acc)
    return EpsSeries(out)
