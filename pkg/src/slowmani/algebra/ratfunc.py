"""Exact multivariate polynomials and rational functions over the rationals.

Polynomial storage and gcd are delegated to FLINT (``python-flint``); this
module owns the canonical form and its text rendering.

Canonical form of a rational function ``num / den``:

* ``num`` and ``den`` have integer coefficients and no common factor,
  including integer content;
* the leading coefficient of ``den`` in graded-lex order is positive;
* zero is ``0 / 1``.

Terms print in increasing graded-lex order, e.g. ``2 / (1 + 3*xi^2)``.
"""

import os
from fractions import Fraction
from functools import cached_property
from numbers import Integral, Rational

import flint

from ..errors import DegreeOverflow, DivisionByZero, UnknownSymbol

_DEFAULT_MAX_DEGREE = 64


def max_degree():
    """Runaway guard on polynomial degree, read from ``SLOWMANI_MAX_DEGREE``."""
    raw = os.environ.get("SLOWMANI_MAX_DEGREE")
    if not raw:
        return _DEFAULT_MAX_DEGREE
    return int(raw)


class Ring:
    """Polynomial ring Z[v1, ..., vn] with graded-lex order in declared order.

    Rings compare equal by their variable names, so independently built
    rings over the same names are interchangeable.
    """

    __slots__ = ("names", "ctx", "_index")

    def __init__(self, names):
        names = tuple(names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        if not names:
            # FLINT needs at least one generator; a hidden one never appears
            names = ("_1",)
        self.names = names
        self.ctx = flint.fmpz_mpoly_ctx.get(names, "deglex")
        self._index = {name: i for i, name in enumerate(names)}

    def __eq__(self, other):
        return isinstance(other, Ring) and other.names == self.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"Ring({list(self.names)})"

    def __contains__(self, name):
        return name in self._index

    def index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise UnknownSymbol(f"unknown symbol {name!r}") from None

    def gen(self, name):
        return RatFunc._raw(self, self.ctx.gen(self.index(name)), self.ctx.from_dict({}) + 1)

    def gens(self):
        return tuple(self.gen(n) for n in self.names)

    def const(self, value):
        value = Fraction(value)
        ctx = self.ctx
        return ratfunc_normalize(
            MultiPoly(self, ctx.from_dict({}) + value.numerator),
            MultiPoly(self, ctx.from_dict({}) + value.denominator),
        )

    @property
    def zero(self):
        return self.const(0)

    @property
    def one(self):
        return self.const(1)

    def poly(self, terms):
        """Build a :class:`MultiPoly` from ``{exponent tuple: int}``."""
        return MultiPoly(self, self.ctx.from_dict(dict(terms)))


def _monomial_text(names, exps):
    parts = []
    for name, e in zip(names, exps):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


class MultiPoly:
    """Polynomial with integer coefficients in a fixed :class:`Ring`.

    Polynomials with genuinely rational coefficients are represented as a
    :class:`RatFunc` with a constant denominator.
    """

    __slots__ = ("ring", "raw")

    def __init__(self, ring, raw):
        self.ring = ring
        self.raw = raw

    @property
    def variables(self):
        return self.ring.names

    @property
    def terms(self):
        """``{exponent tuple: int}``; zero coefficients are never stored."""
        return {tuple(e): int(c) for e, c in self.raw.terms()}

    def is_zero(self):
        return self.raw.is_zero()

    def total_degree(self):
        return -1 if self.raw.is_zero() else int(self.raw.total_degree())

    def __eq__(self, other):
        return isinstance(other, MultiPoly) and self.ring == other.ring and self.raw == other.raw

    def __hash__(self):
        return hash((self.ring, str(self.raw)))

    def __add__(self, other):
        return MultiPoly(self.ring, self.raw + other.raw)

    def __sub__(self, other):
        return MultiPoly(self.ring, self.raw - other.raw)

    def __mul__(self, other):
        return MultiPoly(self.ring, self.raw * other.raw)

    def __neg__(self):
        return MultiPoly(self.ring, -self.raw)

    def __str__(self):
        return poly_text(self.ring, self.raw)

    def __repr__(self):
        return f"MultiPoly({self})"


def poly_text(ring, raw):
    """Canonical text of a polynomial: increasing graded-lex order."""
    if raw.is_zero():
        return "0"
    pieces = []
    for exps, c in reversed(list(raw.terms())):
        c = int(c)
        mono = _monomial_text(ring.names, exps)
        mag = abs(c)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        if not pieces:
            pieces.append(("-" if c < 0 else "") + body)
        else:
            pieces.append((" - " if c < 0 else " + ") + body)
    return "".join(pieces)


def _check_degree(num, den):
    cap = max_degree()
    if num.total_degree() > cap or den.total_degree() > cap:
        raise DegreeOverflow(
            f"polynomial degree exceeds SLOWMANI_MAX_DEGREE={cap}"
        )


def _fix_content_and_sign(num, den):
    c = den.content()
    if not num.is_zero():
        c = c.gcd(num.content())
    if c != 1:
        num = num / c
        den = den / c
    if den.leading_coefficient() < 0:
        num, den = -num, -den
    return num, den


def _canonical(ring, num, den):
    if den.is_zero():
        raise DivisionByZero("zero denominator")
    if num.is_zero():
        return RatFunc._raw(ring, num, ring.ctx.from_dict({}) + 1)
    if not den.is_constant():
        g = num.gcd(den)
        if not g.is_one():
            num = num / g
            den = den / g
    num, den = _fix_content_and_sign(num, den)
    _check_degree(num, den)
    return RatFunc._raw(ring, num, den)


def ratfunc_normalize(num, den):
    """Reduce ``num / den`` (two :class:`MultiPoly`) to canonical form."""
    if num.ring != den.ring:
        raise ValueError("numerator and denominator live in different rings")
    return _canonical(num.ring, num.raw, den.raw)


class RatFunc:
    """Immutable rational function in canonical form.

    Supports ``+ - * / **`` with other rational functions of the same ring
    and with Python integers or fractions.
    """

    __slots__ = ("ring", "_num", "_den", "__dict__")

    @classmethod
    def _raw(cls, ring, num, den):
        self = object.__new__(cls)
        self.ring = ring
        self._num = num
        self._den = den
        return self

    @property
    def num(self):
        return MultiPoly(self.ring, self._num)

    @property
    def den(self):
        return MultiPoly(self.ring, self._den)

    def _coerce(self, other):
        if isinstance(other, RatFunc):
            if other.ring != self.ring:
                raise ValueError(f"ring mismatch: {self.ring} vs {other.ring}")
            return other
        if isinstance(other, (Integral, Rational)):
            return self.ring.const(other)
        return NotImplemented

    def is_zero(self):
        return self._num.is_zero()

    def is_constant(self):
        return self._num.is_constant() and self._den.is_constant()

    def is_polynomial(self):
        return self._den.is_constant()

    def to_fraction(self):
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        n = int(self._num.leading_coefficient()) if not self._num.is_zero() else 0
        return Fraction(n, int(self._den.leading_coefficient()))

    @cached_property
    def free_symbols(self):
        used = set()
        for raw in (self._num, self._den):
            for exps in raw.monoms():
                used.update(i for i, e in enumerate(exps) if e)
        return frozenset(self.ring.names[i] for i in used)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._num == other._num and self._den == other._den

    def __hash__(self):
        return hash((self.ring, str(self._num), str(self._den)))

    def __bool__(self):
        return not self.is_zero()

    def __neg__(self):
        return RatFunc._raw(self.ring, -self._num, self._den)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        a, b, c, d = self._num, self._den, other._num, other._den
        if b == d:
            return _canonical(self.ring, a + c, b)
        g = b.gcd(d)
        bg, dg = b / g, d / g
        return _canonical(self.ring, a * dg + c * bg, b * dg)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return self.ring.zero
        a, b, c, d = self._num, self._den, other._num, other._den
        g1 = a.gcd(d)
        g2 = c.gcd(b)
        if not g1.is_one():
            a, d = a / g1, d / g1
        if not g2.is_one():
            c, b = c / g2, b / g2
        num, den = _fix_content_and_sign(a * c, b * d)
        _check_degree(num, den)
        return RatFunc._raw(self.ring, num, den)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise DivisionByZero("inverse of zero")
        num, den = self._den, self._num
        if den.leading_coefficient() < 0:
            num, den = -num, -den
        return RatFunc._raw(self.ring, num, den)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, exponent):
        if not isinstance(exponent, Integral):
            return NotImplemented
        if exponent < 0:
            return self.inverse() ** (-exponent)
        num, den = self._num ** exponent, self._den ** exponent
        _check_degree(num, den)
        return RatFunc._raw(self.ring, num, den)

    def diff(self, var):
        return ratfunc_diff(self, var)

    def subs(self, mapping):
        """Substitute ``{name: RatFunc}`` simultaneously."""
        return ratfunc_subs(self, mapping)

    def __str__(self):
        num = poly_text(self.ring, self._num)
        if self._den.is_one():
            return num
        if len(self._num) > 1:
            num = f"({num})"
        den = poly_text(self.ring, self._den)
        if len(self._den) > 1 or not _is_atomic(self._den):
            den = f"({den})"
        return f"{num} / {den}"

    def __repr__(self):
        return f"RatFunc({self})"


def _is_atomic(raw):
    """A single positive term that re-parses without parentheses."""
    ((exps, c),) = raw.terms()
    if raw.is_constant():
        return True
    return c == 1 and sum(1 for e in exps if e) == 1


def ratfunc_diff(f, var):
    """Partial derivative by the quotient rule, in canonical form."""
    i = f.ring.index(var)
    num, den = f._num, f._den
    dnum = num.derivative(i)
    if den.is_constant():
        return _canonical(f.ring, dnum, den)
    dden = den.derivative(i)
    if dden.is_zero():
        return _canonical(f.ring, dnum, den)
    # (n/d)' = (n' d - n d') / d^2; divide out gcd(d, d') first to keep it small
    g = den.gcd(dden)
    dg = den / g
    return _canonical(f.ring, dnum * dg - num * (dden / g), den * dg)


def ratfunc_subs(f, mapping):
    """Simultaneous substitution of rational functions for variables."""
    ring = f.ring
    if not mapping:
        return f
    idx = {ring.index(name): value for name, value in mapping.items()}
    for value in idx.values():
        if value.ring != ring:
            raise ValueError("substituted values must share the ring")
    if all(v._den.is_one() for v in idx.values()):
        args = list(ring.ctx.gens())
        for i, v in idx.items():
            args[i] = v._num
        return _canonical(ring, f._num.compose(*args), f._den.compose(*args))
    return _subs_general(f, idx)


def _subs_general(f, idx):
    ring = f.ring
    ctx = ring.ctx
    gens = list(ctx.gens())
    args = list(gens)
    for i, v in idx.items():
        args[i] = v._num
    q = {i: v._den for i, v in idx.items()}

    def homogenised(raw):
        # raw(p/q) * prod q_i^{deg_i raw}
        degs = raw.degrees()
        total = ctx.from_dict({})
        powers = {}
        for exps, c in raw.terms():
            term = ctx.from_dict({}) + int(c)
            mono = [0] * len(exps)
            for i, e in enumerate(exps):
                if i in q:
                    d = degs[i]
                    key = (i, e, d - e)
                    if key not in powers:
                        powers[key] = args[i] ** e * q[i] ** (d - e)
                    term = term * powers[key]
                else:
                    mono[i] = e
            total = total + term * ctx.from_dict({tuple(mono): 1})
        return total, degs

    n_h, n_deg = homogenised(f._num)
    d_h, d_deg = homogenised(f._den)
    one = ctx.from_dict({}) + 1
    num_scale, den_scale = one, one
    for i in q:
        shift = d_deg[i] - n_deg[i]
        if shift > 0:
            num_scale = num_scale * q[i] ** shift
        elif shift < 0:
            den_scale = den_scale * q[i] ** (-shift)
    return _canonical(ring, n_h * num_scale, d_h * den_scale)
