"""Reader for ``.gspt`` problem files.

A problem file is a sequence of line-oriented statements::

    problem parabola
    vars x1 x2
    params a b                  # optional
    F0 = [2*x1*(1 - x2 - x1^2), x2*(1 - x2 - x1^2)]
    F1 = [2, -x1]
    chart xi
    phi0 = [xi, 1 - xi^2]
    N0 = [[2*xi], [1 - xi^2]]   # rows; a flat list is one column
    ansatz graph 1              # or: ansatz zero (default)
    box = [[-1, 1]]             # optional sampling box over the chart

    level 1                     # optional nested levels
    chart1 eta
    phi01 = [eta]
    N01 = [[1]]

Inside ``level i`` the suffix may be dropped (``chart``, ``phi0``, ``N0``,
``box``, ``ansatz``); graph indices there refer to the parent chart. Newlines inside brackets do not end a statement and ``#`` starts
a comment.
"""

import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .algebra import RatMat, Ring
from .errors import (DimensionMismatch, LexError, MissingSection, ParseError,
                     SpecError, UnknownSymbol)

# tokens

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\f]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<int>[0-9]+)
  | (?P<op>[-+*/^=,()\[\]])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # ident, int, op, newline, eof
    text: str
    line: int = field(compare=False)
    column: int = field(compare=False)

    def __repr__(self):
        return f"{self.kind}:{self.text!r}"


def tokenize(source):
    """Split source text into tokens; newlines inside brackets are dropped."""
    tokens = []
    line, line_start, depth = 1, 0, 0
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if m is None:
            raise LexError(f"illegal character {source[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        if kind == "newline":
            if depth == 0:
                tokens.append(Token("newline", "\n", line, col))
            line += 1
            line_start = m.end()
        elif kind in ("ident", "int"):
            tokens.append(Token(kind, text, line, col))
        elif kind == "op":
            if text in "([":
                depth += 1
            elif text in ")]":
                depth = max(depth - 1, 0)
            tokens.append(Token("op", text, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# expression trees

@dataclass(frozen=True)
class Num:
    value: int
    line: int = field(default=None, compare=False)
    column: int = field(default=None, compare=False)


@dataclass(frozen=True)
class Sym:
    name: str
    line: int = field(default=None, compare=False)
    column: int = field(default=None, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: object
    line: int = field(default=None, compare=False)
    column: int = field(default=None, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    line: int = field(default=None, compare=False)
    column: int = field(default=None, compare=False)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(e):
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return 3
    return 5


def render_expr(e):
    """Text that re-parses to the same tree."""
    if isinstance(e, Num):
        return str(e.value)
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Neg):
        inner = render_expr(e.operand)
        return "-" + (inner if _prec(e.operand) >= 3 else f"({inner})")
    p = _PREC[e.op]
    left, right = render_expr(e.left), render_expr(e.right)
    if e.op == "^":
        if _prec(e.left) < 5:
            left = f"({left})"
        return f"{left}^{right}"
    if _prec(e.left) < p:
        left = f"({left})"
    if _prec(e.right) <= p:
        right = f"({right})"
    if p == 1:
        return f"{left} {e.op} {right}"
    return f"{left}{e.op}{right}"


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def advance(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text, kind="op"):
        t = self.tok
        return t.kind == kind and t.text == text

    def expect(self, text):
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.advance()

    def fail(self, message):
        t = self.tok
        found = "end of input" if t.kind == "eof" else (
            "end of line" if t.kind == "newline" else repr(t.text))
        raise ParseError(f"{message}, found {found}", t.line, t.column)

    def expr(self):
        left = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            t = self.advance()
            left = BinOp(t.text, left, self.term(), t.line, t.column)
        return left

    def term(self):
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            t = self.advance()
            left = BinOp(t.text, left, self.unary(), t.line, t.column)
        return left

    def unary(self):
        if self.at("-"):
            t = self.advance()
            return Neg(self.unary(), t.line, t.column)
        if self.at("+"):
            self.advance()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.at("^"):
            t = self.advance()
            return BinOp("^", base, self.exponent(), t.line, t.column)
        return base

    def exponent(self):
        t = self.tok
        if t.kind != "int":
            raise ParseError("exponent must be a non-negative integer literal", t.line, t.column)
        self.advance()
        e = Num(int(t.text), t.line, t.column)
        if self.at("^"):
            c = self.advance()
            return BinOp("^", e, self.exponent(), c.line, c.column)
        return e

    def atom(self):
        t = self.tok
        if t.kind == "int":
            self.advance()
            return Num(int(t.text), t.line, t.column)
        if t.kind == "ident":
            self.advance()
            return Sym(t.text, t.line, t.column)
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        self.fail("expected a number, symbol or '('")

    def nested_list(self):
        """``[e, ...]`` or ``[[e, ...], ...]``; returns nested Python lists."""
        self.expect("[")
        items = []
        if not self.at("]"):
            while True:
                items.append(self.nested_list() if self.at("[") else self.expr())
                if not self.at(","):
                    break
                self.advance()
        self.expect("]")
        return items


def parse_expression(tokens):
    """Parse one expression from a token list (or raw text)."""
    if isinstance(tokens, str):
        tokens = tokenize(tokens)
    tokens = [t for t in tokens if t.kind != "newline"]
    if not tokens or tokens[-1].kind != "eof":
        last = tokens[-1] if tokens else None
        tokens = list(tokens) + [Token("eof", "", getattr(last, "line", 1), getattr(last, "column", 1))]
    p = _Parser(tokens)
    e = p.expr()
    if p.tok.kind != "eof":
        p.fail("unexpected trailing input")
    return e


_MAX_EXPONENT = 10_000


def _exponent_value(e):
    if isinstance(e, Num):
        return e.value
    base = _exponent_value(e.left)
    top = _exponent_value(e.right)
    if base > 1 and top * base.bit_length() > _MAX_EXPONENT.bit_length() + 1:
        raise ParseError("exponent too large", e.line, e.column)
    value = base ** top
    if value > _MAX_EXPONENT:
        raise ParseError("exponent too large", e.line, e.column)
    return value


def evaluate_expr(e, env):
    """Direct evaluation with Python numbers (floats or Fractions)."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Sym):
        return env[e.name]
    if isinstance(e, Neg):
        return -evaluate_expr(e.operand, env)
    if e.op == "^":
        return evaluate_expr(e.left, env) ** _exponent_value(e.right)
    a, b = evaluate_expr(e.left, env), evaluate_expr(e.right, env)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if isinstance(a, int) and isinstance(b, int):
        return Fraction(a, b)
    return a / b


def lower_to_ratfunc(e, ring, allowed=None):
    """Exact value of an expression tree in ``ring``.

    ``allowed`` restricts which ring symbols may appear (default: all).
    """
    if isinstance(e, Num):
        return ring.const(e.value)
    if isinstance(e, Sym):
        if e.name not in ring or (allowed is not None and e.name not in allowed):
            raise UnknownSymbol(f"undeclared symbol {e.name!r}", e.line, e.column)
        return ring.gen(e.name)
    if isinstance(e, Neg):
        return -lower_to_ratfunc(e.operand, ring, allowed)
    left = lower_to_ratfunc(e.left, ring, allowed)
    if e.op == "^":
        return left ** _exponent_value(e.right)
    right = lower_to_ratfunc(e.right, ring, allowed)
    if e.op == "+":
        return left + right
    if e.op == "-":
        return left - right
    if e.op == "*":
        return left * right
    return left / right


# problem files

class Ansatz(Enum):
    ZERO = "zero"
    GRAPH = "graph"


@dataclass(frozen=True)
class LevelSpec:
    """User-supplied embedding and fibre frame of one nested level."""

    index: int
    chart_vars: tuple
    phi0: RatMat
    n0_frame: RatMat
    box: tuple = None
    ansatz: Ansatz = None
    graph_slow_indices: tuple = None


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    ring: Ring
    state_vars: tuple
    params: tuple
    f_terms: tuple  # f_terms[i] is the eps^i vector, a tuple of RatFunc
    chart_vars: tuple
    phi0: RatMat  # n x 1
    n0_frame: RatMat  # n x (n-k)
    ansatz: Ansatz = Ansatz.ZERO
    graph_slow_indices: tuple = None  # 0-based
    box: tuple = None
    levels: tuple = ()

    @property
    def n(self):
        return len(self.state_vars)

    @property
    def k(self):
        return len(self.chart_vars)

    def with_ansatz(self, ansatz, indices=None):
        from dataclasses import replace
        ansatz = Ansatz(ansatz)
        if ansatz is Ansatz.GRAPH:
            indices = tuple(indices if indices is not None else (self.graph_slow_indices or ()))
            _check_graph_indices(indices, self.n, self.k, None)
        else:
            indices = None
        return replace(self, ansatz=ansatz, graph_slow_indices=indices)


def _check_graph_indices(indices, n, k, line):
    if len(indices) != k or len(set(indices)) != k or any(not 0 <= i < n for i in indices):
        raise DimensionMismatch(
            f"graph ansatz needs {k} distinct state indices in 1..{n}, got "
            f"{[i + 1 for i in indices]}", line)


_SUFFIXED = re.compile(r"^(F|chart|phi0|N0|box)(\d+)$")
REQUIRED_SECTIONS = ("problem", "vars", "F0", "chart", "phi0", "N0")


def _split_statements(tokens):
    stmts, cur = [], []
    for t in tokens:
        if t.kind in ("newline", "eof"):
            if cur:
                stmts.append(cur + [Token("eof", "", t.line, t.column)])
                cur = []
        else:
            cur.append(t)
    return stmts


def _names(p):
    names = []
    while p.tok.kind != "eof":
        if p.at(","):
            p.advance()
            continue
        if p.tok.kind != "ident":
            p.fail("expected a symbol name")
        names.append(p.advance())
    return names


def parse_problem_file(source):
    """Parse ``.gspt`` text into a validated :class:`ProblemSpec`."""
    stmts = _split_statements(tokenize(source))
    raw = {}       # section name -> (line, payload)
    levels = {}    # level index -> {section: (line, payload)}
    current = None
    last_line = source.count("\n") + 1

    def store(table, key, line, payload):
        if key in table:
            raise ParseError(f"duplicate section {key!r}", line, 1)
        table[key] = (line, payload)

    for toks in stmts:
        p = _Parser(toks)
        head = p.advance()
        line = head.line
        if head.kind != "ident":
            raise ParseError(f"statement must start with a keyword, found {head.text!r}",
                             line, head.column)
        word = head.text
        if word == "problem":
            if p.tok.kind != "ident":
                p.fail("expected a problem name")
            store(raw, "problem", line, p.advance().text)
        elif word in ("vars", "params"):
            store(raw, word, line, _names(p))
        elif re.fullmatch(r"ansatz\d*", word):
            suffix = int(word[6:]) if word[6:] else None
            if suffix is not None and suffix != current:
                raise ParseError(f"{word!r} outside 'level {suffix}'", line, head.column)
            kind = p.advance()
            if kind.kind != "ident" or kind.text not in ("zero", "graph"):
                raise ParseError("ansatz must be 'zero' or 'graph'", kind.line, kind.column)
            idx = []
            while p.tok.kind != "eof":
                if p.at(","):
                    p.advance()
                    continue
                t = p.advance()
                if t.kind != "int":
                    raise ParseError("graph indices must be integers", t.line, t.column)
                idx.append(int(t.text) - 1)
            store(raw if current is None else levels[current], "ansatz", line, (kind.text, idx))
        elif word == "level":
            t = p.advance()
            if t.kind != "int" or int(t.text) < 1:
                raise ParseError("level index must be a positive integer", t.line, t.column)
            current = int(t.text)
            if current in levels:
                raise ParseError(f"duplicate level {current}", line, 1)
            levels[current] = {}
        else:
            m = _SUFFIXED.match(word)
            base, suffix = (m.group(1), int(m.group(2))) if m else (word, None)
            if base == "F":
                table, key = raw, f"F{suffix}"
            elif base in ("chart", "phi0", "N0", "box"):
                if base == "phi0" and word == "phi0" or base == "N0" and word == "N0":
                    suffix = None
                lvl = suffix if suffix is not None else current
                if suffix is not None and suffix != current:
                    raise ParseError(f"{word!r} outside 'level {suffix}'", line, head.column)
                table = raw if lvl is None else levels[lvl]
                key = base
            else:
                raise ParseError(f"unknown statement {word!r}", line, head.column)
            if base == "chart":
                store(table, key, line, _names(p))
            else:
                p.expect("=")
                data = p.nested_list()
                if p.tok.kind != "eof":
                    p.fail("unexpected trailing input")
                store(table, key, line, data)
        if p.tok.kind != "eof":
            p.fail("unexpected trailing input")

    for sec in REQUIRED_SECTIONS:
        if sec not in raw:
            raise MissingSection(f"missing required section {sec!r}", last_line)
    return _build_spec(raw, levels)


def _flat_vector(data, line, what):
    if any(isinstance(x, list) for x in data):
        raise DimensionMismatch(f"{what} must be a flat list", line)
    return data


def _matrix_rows(data, line, what):
    if all(not isinstance(x, list) for x in data):
        return [[x] for x in data]
    if not all(isinstance(x, list) for x in data):
        raise DimensionMismatch(f"{what} mixes rows and scalars", line)
    if len({len(r) for r in data}) != 1:
        raise DimensionMismatch(f"{what} has rows of different lengths", line)
    return data


def _lower_all(exprs, ring, allowed):
    return [lower_to_ratfunc(e, ring, allowed) for e in exprs]


def _declared(names, kind, taken):
    out = []
    for t in names:
        if t.text in taken:
            raise ParseError(f"symbol {t.text!r} declared twice", t.line, t.column)
        taken.add(t.text)
        out.append(t.text)
    return tuple(out)


def _lower_box(data, line, dim, ring, params):
    if len(data) != dim or not all(isinstance(r, list) and len(r) == 2 for r in data):
        raise DimensionMismatch(f"box needs {dim} [lo, hi] pairs", line)
    out = []
    for lo, hi in data:
        a = lower_to_ratfunc(lo, ring, set())
        b = lower_to_ratfunc(hi, ring, set())
        a, b = a.to_fraction(), b.to_fraction()
        if not a < b:
            raise DimensionMismatch(f"box interval [{a}, {b}] is empty", line)
        out.append((a, b))
    return tuple(out)


def _build_spec(raw, levels):
    taken = set()
    name = raw["problem"][1]
    params = _declared(raw.get("params", (0, []))[1], "param", taken)
    state = _declared(raw["vars"][1], "var", taken)
    chart = _declared(raw["chart"][1], "chart", taken)
    level_charts = {}
    for i in sorted(levels):
        if "chart" not in levels[i]:
            raise MissingSection(f"level {i} is missing 'chart'", None)
        level_charts[i] = _declared(levels[i]["chart"][1], "chart", taken)
    if sorted(levels) != list(range(1, len(levels) + 1)):
        raise ParseError(f"levels must be numbered 1..{len(levels)}", None)
    names = params + state + chart + tuple(v for i in sorted(levels) for v in level_charts[i])
    ring = Ring(names)
    n, k = len(state), len(chart)
    if n < 2:
        raise DimensionMismatch("at least two state variables are needed", raw["vars"][0])
    if not 1 <= k <= n - 1:
        raise DimensionMismatch(f"chart dimension {k} must lie in 1..{n - 1}", raw["chart"][0])

    fkeys = sorted(int(key[1:]) for key in raw if _SUFFIXED.match(key) and key[0] == "F")
    f_terms = []
    state_ok = set(params) | set(state)
    for i in range(max(fkeys) + 1):
        key = f"F{i}"
        if key not in raw:
            f_terms.append(tuple([ring.zero] * n))
            continue
        line, data = raw[key]
        data = _flat_vector(data, line, key)
        if len(data) != n:
            raise DimensionMismatch(f"{key} has {len(data)} entries, expected {n}", line)
        f_terms.append(tuple(_lower_all(data, ring, state_ok)))

    chart_ok = set(params) | set(chart)
    line, data = raw["phi0"]
    data = _flat_vector(data, line, "phi0")
    if len(data) != n:
        raise DimensionMismatch(f"phi0 has {len(data)} entries, expected {n}", line)
    phi0 = RatMat.column(ring, _lower_all(data, ring, chart_ok))

    line, data = raw["N0"]
    rows = _matrix_rows(data, line, "N0")
    if len(rows) != n or len(rows[0]) != n - k:
        raise DimensionMismatch(
            f"N0 is {len(rows)}x{len(rows[0])}, expected {n}x{n - k}", line)
    n0 = RatMat.from_rows(ring, [_lower_all(r, ring, chart_ok) for r in rows])

    ansatz, indices = _lower_ansatz(raw, n, k)

    box = None
    if "box" in raw:
        box = _lower_box(raw["box"][1], raw["box"][0], k, ring, params)

    lvls = []
    parent_dim = k
    for i in sorted(levels):
        sec = levels[i]
        for req in ("phi0", "N0"):
            if req not in sec:
                raise MissingSection(f"level {i} is missing '{req}{i}'", sec["chart"][0])
        ci = level_charts[i]
        ki = len(ci)
        if not 1 <= ki <= parent_dim - 1:
            raise DimensionMismatch(
                f"level {i} chart dimension {ki} must lie in 1..{parent_dim - 1}", sec["chart"][0])
        ok = set(params) | set(ci)
        line, data = sec["phi0"]
        data = _flat_vector(data, line, f"phi0{i}")
        if len(data) != parent_dim:
            raise DimensionMismatch(
                f"phi0{i} has {len(data)} entries, expected {parent_dim}", line)
        lphi = RatMat.column(ring, _lower_all(data, ring, ok))
        line, data = sec["N0"]
        rows = _matrix_rows(data, line, f"N0{i}")
        if len(rows) != parent_dim or len(rows[0]) != parent_dim - ki:
            raise DimensionMismatch(
                f"N0{i} is {len(rows)}x{len(rows[0])}, expected {parent_dim}x{parent_dim - ki}", line)
        ln0 = RatMat.from_rows(ring, [_lower_all(r, ring, ok) for r in rows])
        lbox = None
        if "box" in sec:
            lbox = _lower_box(sec["box"][1], sec["box"][0], ki, ring, params)
        lansatz, lidx = _lower_ansatz(sec, parent_dim, ki)
        lvls.append(LevelSpec(i, ci, lphi, ln0, lbox, lansatz, lidx))
        parent_dim = ki

    return ProblemSpec(name, ring, state, params, tuple(f_terms), chart, phi0, n0,
                       ansatz, indices, box, tuple(lvls))


def _lower_ansatz(table, n, k):
    if "ansatz" not in table:
        return Ansatz.ZERO, None
    line, (kind, idx) = table["ansatz"]
    ansatz = Ansatz(kind)
    if ansatz is Ansatz.GRAPH:
        _check_graph_indices(idx, n, k, line)
        return ansatz, tuple(idx)
    if idx:
        raise ParseError("'ansatz zero' takes no indices", line)
    return ansatz, None


def load_problem(path):
    with open(path, encoding="utf-8") as fh:
        source = fh.read()
    try:
        return parse_problem_file(source)
    except SpecError as exc:
        exc.path = str(path)
        raise
