"""Expression ASTs, the expression parser, and the .web file format.

Expressions are arithmetic over variables x1..xn, declared parameter names,
rational literals and the operators + - * / ^ (integer exponents only).
For n <= 4 the letters x, y, z, t are accepted as aliases for x1..x4.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from gmpy2 import mpq

from .errors import ExprSyntaxError, WebFileError

# --- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: mpq

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Var:
    index: int  # 1-based

    def __str__(self):
        return f"x{self.index}"


@dataclass(frozen=True)
class Param:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int  # non-negative literal


Expr = Num | Var | Param | Neg | BinOp | Pow

_ALIASES = {"x": 1, "y": 2, "z": 3, "t": 4}
_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}


def expr_to_str(e: Expr, parent_prec: int = 0) -> str:
    """Render an AST; parse(expr_to_str(e)) == e up to redundant parens."""
    if isinstance(e, (Num, Var, Param)):
        s = str(e)
        # negative literals need parens inside any operator context
        if isinstance(e, Num) and e.value < 0 and parent_prec > 0:
            return f"({s})"
        return s
    if isinstance(e, Neg):
        # unary minus is only legal at the head of a sum, so parenthesize
        # whenever we are nested inside any operator
        s = "-" + expr_to_str(e.arg, 3)
        return f"({s})" if parent_prec >= 1 else s
    if isinstance(e, Pow):
        # '^' does not chain in the grammar, so a Pow base needs parens
        s = f"{expr_to_str(e.base, 4)}^{e.exponent}"
        return f"({s})" if parent_prec >= 4 else s
    prec = _PRECEDENCE[e.op]
    left = expr_to_str(e.left, prec)
    # operators are left-associative, so a right child at the same
    # precedence always needs parens
    right = expr_to_str(e.right, prec + 1)
    s = f"{left}{e.op}{right}"
    return f"({s})" if parent_prec > prec else s


# --- tokenizer + recursive descent parser ----------------------------------

_TOKEN_RE = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|([-+*/^()]))")


def _tokenize(source: str):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.end() == pos:
            stripped = source[pos:].lstrip()
            if not stripped:
                break
            raise ExprSyntaxError(f"unexpected character {stripped[0]!r}", pos)
        if m.group(1):
            tokens.append(("num", m.group(1), m.start(1)))
        elif m.group(2):
            tokens.append(("name", m.group(2), m.start(2)))
        else:
            tokens.append(("op", m.group(3), m.start(3)))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, tokens, n, params):
        self.tokens = tokens
        self.i = 0
        self.n = n
        self.params = params

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val, pos = self.next()
        if kind != "op" or val != op:
            raise ExprSyntaxError(f"expected {op!r}, found {val or 'end of input'!r}", pos)

    def parse(self):
        e = self.sum()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"trailing input {val!r}", pos)
        return e

    def sum(self):
        kind, val, _ = self.peek()
        if kind == "op" and val in "+-":
            self.next()
            e = self.term()
            if val == "-":
                e = Neg(e)
        else:
            e = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                e = BinOp(val, e, self.term())
            else:
                return e

    def term(self):
        e = self.power()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.next()
                e = BinOp(val, e, self.power())
            else:
                return e

    def power(self):
        e = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.next()
            e = Pow(e, self.exponent())
        return e

    def exponent(self):
        # literal non-negative integer, optionally parenthesized / signed,
        # so that x^(-1) produces a targeted error rather than a syntax error
        kind, val, pos = self.next()
        if kind == "op" and val == "(":
            sign = 1
            kind, val, pos = self.next()
            if kind == "op" and val in "+-":
                if val == "-":
                    sign = -1
                kind, val, pos = self.next()
            if kind != "num":
                raise ExprSyntaxError("exponent not a non-negative integer literal", pos)
            self.expect_op(")")
            if sign < 0:
                raise ExprSyntaxError("exponent not a non-negative integer literal", pos)
            return int(val)
        if kind != "num":
            raise ExprSyntaxError("exponent not a non-negative integer literal", pos)
        return int(val)

    def atom(self):
        kind, val, pos = self.next()
        if kind == "num":
            return Num(mpq(val))
        if kind == "name":
            return self.resolve(val, pos)
        if kind == "op" and val == "(":
            e = self.sum()
            self.expect_op(")")
            return e
        raise ExprSyntaxError(f"expected a value, found {val or 'end of input'!r}", pos)

    def resolve(self, name, pos):
        m = re.fullmatch(r"x(\d+)", name)
        if m:
            idx = int(m.group(1))
            if not 1 <= idx <= self.n:
                raise ExprSyntaxError(f"variable {name} out of range 1..{self.n}", pos)
            return Var(idx)
        if name in self.params:
            return Param(name)
        if name in _ALIASES and self.n <= 4 and _ALIASES[name] <= self.n:
            return Var(_ALIASES[name])
        raise ExprSyntaxError(f"unknown identifier {name!r}", pos)


def parse_expr(source: str, n: int, params=()) -> Expr:
    """Parse an expression over x1..xn and the given parameter names."""
    return _Parser(_tokenize(source), n, frozenset(params)).parse()


# --- web specifications ----------------------------------------------------


@dataclass(frozen=True)
class Binding:
    """Value bound to a parameter: a rational, or a nilpotent of order q."""

    kind: str  # "rational" | "nilpotent"
    value: mpq = mpq(0)
    order: int = 0

    @staticmethod
    def rational(v) -> "Binding":
        return Binding("rational", value=mpq(v))

    @staticmethod
    def nilpotent(q: int) -> "Binding":
        if q < 2:
            raise WebFileError(f"nilpotent order must be >= 2, got {q}")
        return Binding("nilpotent", order=q)


@dataclass(frozen=True)
class WebSpec:
    """A d-web on an n-dimensional domain given by ordered first integrals.

    The order of the integral list matters: the trivialization built
    downstream (and hence the connection matrices) depends on it.
    """

    n: int
    integrals: tuple[Expr, ...]
    params: dict = field(default_factory=dict)  # name -> Binding
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        if self.n < 2:
            raise WebFileError(f"dimension n must be >= 2, got {self.n}")
        if len(self.integrals) <= self.n:
            raise WebFileError(
                f"a web needs d > n integrals, got d={len(self.integrals)}, n={self.n}"
            )

    @property
    def d(self) -> int:
        return len(self.integrals)

    def with_integrals(self, integrals) -> "WebSpec":
        return WebSpec(self.n, tuple(integrals), self.params, self.notes)

    def nilpotent_params(self) -> tuple[tuple[str, int], ...]:
        """Declared nilpotent parameters as (name, order), declaration order."""
        return tuple(
            (name, b.order) for name, b in self.params.items() if b.kind == "nilpotent"
        )


_RAT_RE = re.compile(r"^-?\d+(/\d+)?$")
_NIL_RE = re.compile(r"^nilpotent\(\s*(\d+)\s*\)$")


def parse_binding(text: str) -> Binding:
    text = text.strip()
    if _RAT_RE.match(text):
        return Binding.rational(mpq(text))
    m = _NIL_RE.match(text)
    if m:
        return Binding.nilpotent(int(m.group(1)))
    raise WebFileError(f"cannot parse parameter value {text!r}")


def parse_webfile(source: str) -> WebSpec:
    """Parse the .web text format.

    Lines: ``n = <int>``, ``param <name> = <rational>|nilpotent(<q>)``,
    ``u: <expr>``; '#' starts a comment, blank lines are ignored.
    """
    n = None
    params: dict[str, Binding] = {}
    exprs: list[Expr] = []
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("u:"):
            if n is None:
                raise WebFileError(f"line {lineno}: 'n = ...' must come before integrals")
            try:
                exprs.append(parse_expr(line[2:], n, params))
            except ExprSyntaxError as exc:
                raise WebFileError(f"line {lineno}: {exc}") from exc
            continue
        m = re.fullmatch(r"n\s*=\s*(\d+)", line)
        if m:
            if n is not None:
                raise WebFileError(f"line {lineno}: duplicate 'n ='")
            n = int(m.group(1))
            continue
        m = re.fullmatch(r"param\s+([A-Za-z_][A-Za-z_0-9]*)\s*=\s*(.+)", line)
        if m:
            name = m.group(1)
            if name in params:
                raise WebFileError(f"line {lineno}: duplicate parameter binding {name!r}")
            params[name] = parse_binding(m.group(2))
            continue
        raise WebFileError(f"line {lineno}: cannot parse {line!r}")
    if n is None:
        raise WebFileError("missing 'n = <int>' line")
    return WebSpec(n, tuple(exprs), params)


def webspec_to_str(web: WebSpec) -> str:
    """Render a WebSpec back to .web format."""
    lines = [f"n = {web.n}"]
    for name, b in web.params.items():
        if b.kind == "rational":
            lines.append(f"param {name} = {b.value}")
        else:
            lines.append(f"param {name} = nilpotent({b.order})")
    lines.extend(f"u: {expr_to_str(e)}" for e in web.integrals)
    return "\n".join(lines) + "\n"
