"""Dense matrices of rational functions."""

from ..errors import ShapeMismatch, SingularMatrix
from .ratfunc import RatFunc


class RatMat:
    """Immutable ``rows x cols`` matrix with :class:`RatFunc` entries (row-major)."""

    __slots__ = ("ring", "rows", "cols", "entries")

    def __init__(self, ring, rows, cols, entries):
        entries = tuple(entries)
        if len(entries) != rows * cols:
            raise ShapeMismatch(
                f"{rows}x{cols} matrix needs {rows * cols} entries, got {len(entries)}"
            )
        self.ring = ring
        self.rows = rows
        self.cols = cols
        self.entries = entries

    # construction

    @classmethod
    def from_rows(cls, ring, rows):
        rows = [list(r) for r in rows]
        if not rows:
            raise ShapeMismatch("matrix needs at least one row")
        ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise ShapeMismatch("ragged matrix rows")
        return cls(ring, len(rows), ncols, [_lift(ring, v) for r in rows for v in r])

    @classmethod
    def column(cls, ring, values):
        values = [_lift(ring, v) for v in values]
        return cls(ring, len(values), 1, values)

    @classmethod
    def zeros(cls, ring, rows, cols):
        z = ring.zero
        return cls(ring, rows, cols, [z] * (rows * cols))

    @classmethod
    def identity(cls, ring, n):
        z, o = ring.zero, ring.one
        return cls(ring, n, n, [o if i == j else z for i in range(n) for j in range(n)])

    @classmethod
    def jacobian(cls, funcs, variables):
        """``[d f_i / d v_j]`` for a sequence of RatFunc."""
        funcs = list(funcs)
        ring = funcs[0].ring
        return cls(ring, len(funcs), len(variables), [f.diff(v) for f in funcs for v in variables])

    # access

    @property
    def shape(self):
        return (self.rows, self.cols)

    def __getitem__(self, key):
        i, j = key
        return self.entries[i * self.cols + j]

    def row(self, i):
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def col(self, j):
        return self.entries[j::self.cols]

    def tolist(self):
        return [list(self.row(i)) for i in range(self.rows)]

    def vector(self):
        """Entries of a column or row vector as a tuple."""
        if self.cols != 1 and self.rows != 1:
            raise ShapeMismatch(f"{self.rows}x{self.cols} matrix is not a vector")
        return self.entries

    def submatrix(self, row_idx, col_idx):
        return RatMat(self.ring, len(row_idx), len(col_idx),
                      [self[i, j] for i in row_idx for j in col_idx])

    def hstack(self, other):
        if self.rows != other.rows:
            raise ShapeMismatch("hstack needs equal row counts")
        ent = []
        for i in range(self.rows):
            ent.extend(self.row(i))
            ent.extend(other.row(i))
        return RatMat(self.ring, self.rows, self.cols + other.cols, ent)

    # arithmetic

    def _same_shape(self, other, op):
        if self.shape != other.shape:
            raise ShapeMismatch(f"{op}: shapes {self.shape} and {other.shape} differ")

    def __add__(self, other):
        self._same_shape(other, "add")
        return RatMat(self.ring, self.rows, self.cols,
                      [a + b for a, b in zip(self.entries, other.entries)])

    def __sub__(self, other):
        self._same_shape(other, "sub")
        return RatMat(self.ring, self.rows, self.cols,
                      [a - b for a, b in zip(self.entries, other.entries)])

    def __neg__(self):
        return RatMat(self.ring, self.rows, self.cols, [-a for a in self.entries])

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ShapeMismatch(f"matmul: {self.shape} @ {other.shape}")
        z = self.ring.zero
        out = []
        ocols = [other.col(j) for j in range(other.cols)]
        for i in range(self.rows):
            r = self.row(i)
            for c in ocols:
                acc = z
                for a, b in zip(r, c):
                    if a and b:
                        acc = acc + a * b
                out.append(acc)
        return RatMat(self.ring, self.rows, other.cols, out)

    def scale(self, s):
        """Multiply every entry by a scalar RatFunc or number."""
        return RatMat(self.ring, self.rows, self.cols, [s * a for a in self.entries])

    def __mul__(self, s):
        if isinstance(s, RatMat):
            return NotImplemented
        return self.scale(s)

    __rmul__ = __mul__

    @property
    def T(self):
        return RatMat(self.ring, self.cols, self.rows,
                      [self[i, j] for j in range(self.cols) for i in range(self.rows)])

    def map(self, fn):
        return RatMat(self.ring, self.rows, self.cols, [fn(a) for a in self.entries])

    def diff(self, var):
        return self.map(lambda a: a.diff(var))

    def subs(self, mapping):
        return self.map(lambda a: a.subs(mapping))

    def is_zero(self):
        return all(a.is_zero() for a in self.entries)

    def __eq__(self, other):
        return (isinstance(other, RatMat) and self.shape == other.shape
                and self.entries == other.entries)

    def __hash__(self):
        return hash((self.shape, self.entries))

    def __repr__(self):
        return f"RatMat({self.tolist()})"

    def __str__(self):
        return "[" + ", ".join("[" + ", ".join(map(str, r)) + "]" for r in self.tolist()) + "]"


def _lift(ring, v):
    if isinstance(v, RatFunc):
        return v
    return ring.const(v)


def det(A):
    if A.rows != A.cols:
        raise ShapeMismatch(f"determinant of non-square {A.shape} matrix")
    n = A.rows
    if n == 1:
        return A[0, 0]
    if n == 2:
        return A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    if n == 3:
        return (A[0, 0] * (A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1])
                - A[0, 1] * (A[1, 0] * A[2, 2] - A[1, 2] * A[2, 0])
                + A[0, 2] * (A[1, 0] * A[2, 1] - A[1, 1] * A[2, 0]))
    return _bareiss(A, None)[0]


def _adjugate(A):
    n = A.rows
    if n == 1:
        return RatMat.identity(A.ring, 1)
    if n == 2:
        return RatMat.from_rows(A.ring, [[A[1, 1], -A[0, 1]], [-A[1, 0], A[0, 0]]])
    cof = []
    for i in range(3):
        for j in range(3):
            r = [x for x in range(3) if x != j]
            c = [y for y in range(3) if y != i]
            minor = A[r[0], c[0]] * A[r[1], c[1]] - A[r[0], c[1]] * A[r[1], c[0]]
            cof.append(minor if (i + j) % 2 == 0 else -minor)
    return RatMat(A.ring, 3, 3, cof)


def _bareiss(A, B):
    """Fraction-free elimination of ``[A | B]``.

    Returns ``(det A, X)`` with ``A X = B`` when ``B`` is given.
    """
    n = A.rows
    m = B.cols if B is not None else 0
    M = [list(A.row(i)) + (list(B.row(i)) if B is not None else []) for i in range(n)]
    sign = 1
    prev = A.ring.one
    for k in range(n):
        piv = next((i for i in range(k, n) if M[i][k]), None)
        if piv is None:
            raise SingularMatrix("determinant is identically zero")
        if piv != k:
            M[k], M[piv] = M[piv], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n + m):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) / prev
            M[i][k] = A.ring.zero
        prev = M[k][k]
    d = M[n - 1][n - 1] if sign > 0 else -M[n - 1][n - 1]
    if B is None:
        return d, None
    # back substitution on the triangular system
    X = [[None] * m for _ in range(n)]
    for c in range(m):
        for i in range(n - 1, -1, -1):
            acc = M[i][n + c]
            for j in range(i + 1, n):
                acc = acc - M[i][j] * X[j][c]
            X[i][c] = acc / M[i][i]
    return d, RatMat.from_rows(A.ring, X)


def mat_inverse(A):
    """Exact inverse; adjugate formula up to 3x3, Bareiss elimination above."""
    if A.rows != A.cols:
        raise ShapeMismatch(f"inverse of non-square {A.shape} matrix")
    if A.rows <= 3:
        d = det(A)
        if d.is_zero():
            raise SingularMatrix("determinant is identically zero")
        return _adjugate(A).scale(d.inverse())
    return _bareiss(A, RatMat.identity(A.ring, A.rows))[1]


def left_pseudo_inverse(A):
    """``(A^T A)^{-1} A^T`` for a matrix of full column rank."""
    At = A.T
    try:
        return mat_inverse(At @ A) @ At
    except SingularMatrix:
        raise SingularMatrix(f"{A.rows}x{A.cols} matrix is not of full column rank") from None
