"""Exact truncated multivariate Taylor (jet) arithmetic over the rationals.

A jet stores Taylor-normalized coefficients: the coefficient of the
multi-index L is (1/L!) * the L-th partial derivative of the represented
function at the (implicit) base point.  Coefficients are either plain
rationals (gmpy2.mpq) or NilPoly values when nilpotent deformation
parameters are in play.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from gmpy2 import mpq

from .errors import DivisionByNonUnit, OrderExhausted
from . import expr as ex

_ZERO = mpq(0)
_ONE = mpq(1)


# --- coefficients with nilpotent parameters --------------------------------


class NilPoly:
    """Polynomial in nilpotent parameters, truncated by each parameter's order.

    ``orders`` is the tuple of nilpotency orders q (parameter^q == 0);
    ``coeffs`` maps exponent tuples to nonzero mpq values.
    """

    __slots__ = ("orders", "coeffs")

    def __init__(self, orders, coeffs):
        self.orders = orders
        self.coeffs = coeffs

    @classmethod
    def const(cls, orders, value):
        value = mpq(value)
        return cls(orders, {(0,) * len(orders): value} if value else {})

    @classmethod
    def generator(cls, orders, slot):
        exps = tuple(1 if i == slot else 0 for i in range(len(orders)))
        return cls(orders, {exps: _ONE})

    def _coerce(self, other):
        if isinstance(other, NilPoly):
            return other
        return NilPoly.const(self.orders, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.coeffs)
        for exps, v in other.coeffs.items():
            s = out.get(exps, _ZERO) + v
            if s:
                out[exps] = s
            else:
                out.pop(exps, None)
        return NilPoly(self.orders, out)

    __radd__ = __add__

    def __neg__(self):
        return NilPoly(self.orders, {e: -v for e, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, NilPoly):
            if other == 0:
                return NilPoly(self.orders, {})
            other = mpq(other)
            return NilPoly(self.orders, {e: v * other for e, v in self.coeffs.items()})
        out: dict = {}
        orders = self.orders
        for e1, v1 in self.coeffs.items():
            for e2, v2 in other.coeffs.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                if any(a >= q for a, q in zip(exps, orders)):
                    continue
                s = out.get(exps, _ZERO) + v1 * v2
                if s:
                    out[exps] = s
                else:
                    out.pop(exps, None)
        return NilPoly(self.orders, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, NilPoly):
            return self.coeffs == other.coeffs
        return self.coeffs == self._coerce(other).coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __bool__(self):
        return bool(self.coeffs)

    @property
    def rational_part(self) -> mpq:
        """Value with every nilpotent parameter set to 0."""
        return self.coeffs.get((0,) * len(self.orders), _ZERO)

    @property
    def nilpotent_part(self) -> "NilPoly":
        zero = (0,) * len(self.orders)
        return NilPoly(self.orders, {e: v for e, v in self.coeffs.items() if e != zero})

    def inverse(self) -> "NilPoly":
        c0 = self.rational_part
        if not c0:
            raise DivisionByNonUnit("nilpotent-only coefficient has no inverse")
        # self = c0*(1 + e) with e nilpotent; invert by a finite geometric series
        e = self * (1 / c0) - 1
        budget = sum(q - 1 for q in self.orders)
        acc = NilPoly.const(self.orders, 1)
        term = NilPoly.const(self.orders, 1)
        for _ in range(budget):
            term = term * (-e)
            if not term:
                break
            acc = acc + term
        return acc * (1 / c0)

    def format(self, names) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for exps in sorted(self.coeffs):
            v = self.coeffs[exps]
            mono = "*".join(
                name if p == 1 else f"{name}^{p}"
                for name, p in zip(names, exps)
                if p
            )
            if not mono:
                parts.append(str(v))
            elif v == 1:
                parts.append(mono)
            elif v == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{v}*{mono}")
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out

    def __repr__(self):
        names = tuple(f"g{i}" for i in range(len(self.orders)))
        return f"NilPoly({self.format(names)})"


# --- evaluation context ----------------------------------------------------


@dataclass(frozen=True)
class JetContext:
    """Shared shape data for a family of jets: variable count and the
    declared nilpotent parameters (names and orders, in declaration order)."""

    n_vars: int
    nil_names: tuple[str, ...] = ()
    nil_orders: tuple[int, ...] = ()

    @property
    def has_nilpotents(self) -> bool:
        return bool(self.nil_names)

    def scalar(self, value):
        if self.nil_names:
            return NilPoly.const(self.nil_orders, value)
        return mpq(value)

    def nil_generator(self, name):
        return NilPoly.generator(self.nil_orders, self.nil_names.index(name))

    def scalar_rational_part(self, s) -> mpq:
        return s.rational_part if isinstance(s, NilPoly) else s

    def scalar_inverse(self, s):
        if isinstance(s, NilPoly):
            return s.inverse()
        if not s:
            raise DivisionByNonUnit("zero constant term")
        return 1 / s


# --- jets ------------------------------------------------------------------


class Jet:
    """Truncated Taylor expansion with exact coefficients.

    ``coeffs`` maps multi-index tuples (length n_vars, total degree <= order)
    to nonzero scalars; the base point is implicit.
    """

    __slots__ = ("ctx", "order", "coeffs")

    def __init__(self, ctx: JetContext, order: int, coeffs: dict):
        self.ctx = ctx
        self.order = order
        self.coeffs = coeffs

    # -- constructors

    @classmethod
    def constant(cls, ctx, value, order):
        zero = (0,) * ctx.n_vars
        s = value if isinstance(value, NilPoly) else ctx.scalar(value)
        return cls(ctx, order, {zero: s} if s else {})

    @classmethod
    def variable(cls, ctx, index, value, order):
        """Jet of the coordinate function x_index (1-based) at the point."""
        coeffs = {}
        s = ctx.scalar(value)
        if s:
            coeffs[(0,) * ctx.n_vars] = s
        if order >= 1:
            unit = tuple(1 if i == index - 1 else 0 for i in range(ctx.n_vars))
            coeffs[unit] = ctx.scalar(1)
        return cls(ctx, order, coeffs)

    @classmethod
    def zero(cls, ctx, order):
        return cls(ctx, order, {})

    # -- queries

    def constant_term(self):
        return self.coeffs.get((0,) * self.ctx.n_vars, self.ctx.scalar(0))

    def coefficient(self, L):
        """Taylor-normalized coefficient of the multi-index L."""
        return self.coeffs.get(tuple(L), self.ctx.scalar(0))

    def derivative_value(self, L):
        """The partial derivative at the point: coefficient(L) * L!."""
        fact = 1
        for l in L:
            fact *= math.factorial(l)
        return self.coefficient(L) * mpq(fact)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        return (
            isinstance(other, Jet)
            and self.order == other.order
            and self.coeffs == other.coeffs
        )

    def __repr__(self):
        return f"Jet(order={self.order}, coeffs={self.coeffs!r})"

    # -- ring operations (binary ops truncate to the smaller order)

    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        return Jet(
            self.ctx,
            order,
            {L: v for L, v in self.coeffs.items() if sum(L) <= order},
        )

    def __add__(self, other):
        order = min(self.order, other.order)
        out = {L: v for L, v in self.coeffs.items() if sum(L) <= order}
        for L, v in other.coeffs.items():
            if sum(L) > order:
                continue
            s = out.get(L)
            s = v if s is None else s + v
            if s:
                out[L] = s
            else:
                out.pop(L, None)
        return Jet(self.ctx, order, out)

    def __neg__(self):
        return Jet(self.ctx, self.order, {L: -v for L, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            s = other if isinstance(other, NilPoly) else self.ctx.scalar(other)
            if not s:
                return Jet(self.ctx, self.order, {})
            return Jet(self.ctx, self.order, {L: v * s for L, v in self.coeffs.items()})
        order = min(self.order, other.order)
        out: dict = {}
        for L1, v1 in self.coeffs.items():
            d1 = sum(L1)
            if d1 > order:
                continue
            for L2, v2 in other.coeffs.items():
                if d1 + sum(L2) > order:
                    continue
                L = tuple(a + b for a, b in zip(L1, L2))
                s = out.get(L)
                p = v1 * v2
                s = p if s is None else s + p
                if s:
                    out[L] = s
                else:
                    out.pop(L, None)
        return Jet(self.ctx, order, out)

    __rmul__ = __mul__

    def inverse(self) -> "Jet":
        c0 = self.constant_term()
        inv_c0 = self.ctx.scalar_inverse(c0)  # raises DivisionByNonUnit
        # self = c0*(1 + e); e has nilpotent-plus-positive-degree support, so
        # the geometric series terminates within order + nilpotency budget steps
        e = self * inv_c0 - Jet.constant(self.ctx, 1, self.order)
        budget = self.order + sum(q - 1 for q in self.ctx.nil_orders)
        acc = Jet.constant(self.ctx, 1, self.order)
        term = acc
        for _ in range(budget):
            term = term * (-e)
            if term.is_zero():
                break
            acc = acc + term
        return acc * inv_c0

    def __truediv__(self, other):
        return self * other.inverse()

    def pow_int(self, k: int) -> "Jet":
        if k < 0:
            raise ValueError("pow_int requires a non-negative exponent")
        result = Jet.constant(self.ctx, 1, self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def derive(self, lam: int) -> "Jet":
        """Jet of the partial derivative in direction lam (1-based).

        The result has order one less; raises OrderExhausted at order 0.
        """
        if self.order < 1:
            raise OrderExhausted("cannot differentiate a jet of order 0")
        i = lam - 1
        out = {}
        for L, v in self.coeffs.items():
            if L[i] == 0:
                continue
            M = L[:i] + (L[i] - 1,) + L[i + 1 :]
            out[M] = v * L[i]
        return Jet(self.ctx, self.order - 1, out)


def jet_derive(j: Jet, lam: int) -> Jet:
    return j.derive(lam)


# --- sample points ---------------------------------------------------------


@dataclass(frozen=True)
class SamplePoint:
    coords: tuple  # mpq coordinates
    seed: int
    attempt: int

    @property
    def n(self):
        return len(self.coords)

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.coords) + ")"


def sample_point(n: int, seed: int, attempt: int, height_bound: int = 1000) -> SamplePoint:
    """Deterministic pseudo-random rational point.

    Coordinates have numerator/denominator bounded by height_bound, avoid 0
    and 1 (the corpus has poles there), and are pairwise distinct.
    """
    if height_bound < 2:
        raise ValueError("height_bound must be >= 2")
    rng = random.Random(f"webcurv:{seed}:{attempt}")
    coords: list = []
    while len(coords) < n:
        v = mpq(rng.randint(-height_bound, height_bound), rng.randint(1, height_bound))
        if v == 0 or v == 1 or v in coords:
            continue
        coords.append(v)
    return SamplePoint(tuple(coords), seed, attempt)


def explicit_point(coords) -> SamplePoint:
    return SamplePoint(tuple(mpq(c) for c in coords), seed=-1, attempt=-1)


# --- expression evaluation -------------------------------------------------


def context_for(web_or_n, nil_params=()) -> JetContext:
    """Context for a WebSpec (reading its nilpotent bindings) or a bare n."""
    if isinstance(web_or_n, int):
        names = tuple(name for name, _ in nil_params)
        orders = tuple(q for _, q in nil_params)
        return JetContext(web_or_n, names, orders)
    web = web_or_n
    nil = web.nilpotent_params()
    return JetContext(web.n, tuple(n for n, _ in nil), tuple(q for _, q in nil))


def jet_eval(e, p: SamplePoint, order: int, bindings=None, ctx: JetContext | None = None) -> Jet:
    """Evaluate an expression to a jet at p.

    ``bindings`` maps parameter names to Binding values; nilpotent parameters
    become generators of the NilPoly coefficient ring.  Division by a jet
    whose constant term is not a unit raises DivisionByNonUnit.
    """
    bindings = bindings or {}
    if ctx is None:
        nil = tuple(
            (name, b.order) for name, b in bindings.items() if b.kind == "nilpotent"
        )
        ctx = context_for(len(p.coords), nil)

    def ev(node) -> Jet:
        if isinstance(node, ex.Num):
            return Jet.constant(ctx, node.value, order)
        if isinstance(node, ex.Var):
            return Jet.variable(ctx, node.index, p.coords[node.index - 1], order)
        if isinstance(node, ex.Param):
            b = bindings.get(node.name)
            if b is None:
                raise KeyError(f"unbound parameter {node.name!r}")
            if b.kind == "rational":
                return Jet.constant(ctx, b.value, order)
            return Jet.constant(ctx, ctx.nil_generator(node.name), order)
        if isinstance(node, ex.Neg):
            return -ev(node.arg)
        if isinstance(node, ex.Pow):
            return ev(node.base).pow_int(node.exponent)
        left, right = ev(node.left), ev(node.right)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        return left / right

    return ev(e)
