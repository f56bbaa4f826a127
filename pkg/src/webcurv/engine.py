"""Web-specific combinatorics and linear-system assembly.

Conventions (kept so intermediate matrices can be diffed against runs of
the original computer-algebra pipeline):

* multi-indices of a fixed degree h are ordered by reading the first n-1
  components as base-(h+1) digits of an integer, most significant first;
* the global row index concatenates degrees h = 1..k0 in that order;
* the column index of the big systems is h-major with blocks of width d,
  so column eta (0-based) refers to web index eta % d and derivative
  level eta // d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import WebCurvError
from .expr import WebSpec
from .jets import Jet, JetContext, SamplePoint, context_for, jet_eval
from .linalg import JetMatrix, rational_rank, residue_rank


def c(n: int, h: int) -> int:
    """Dimension of degree-h homogeneous polynomials in n variables."""
    return math.comb(n - 1 + h, h)


def k0_of(n: int, d: int) -> tuple[int, bool]:
    """The unique k0 with c(n,k0) <= d < c(n,k0+1); also whether d == c(n,k0)."""
    if d <= n:
        raise WebCurvError(f"need d > n, got d={d}, n={n}")
    k0 = 1
    while c(n, k0 + 1) <= d:
        k0 += 1
    return k0, d == c(n, k0)


def pi_prime(n: int, d: int) -> int:
    """Sharp rank bound for ordinary d-webs: sum of (d - c(n,k)), k=1..k0."""
    k0, _ = k0_of(n, d)
    return sum(d - c(n, k) for k in range(1, k0 + 1))


def enum_multiindices(n: int, h: int) -> list[tuple[int, ...]]:
    """Degree-h multi-indices in the base-(h+1) digit order.

    Decode v = 0,1,2,... as n-1 base-(h+1) digits (first component most
    significant), keep v when the digits sum to at most h, and complete
    with the last component h - sum.  Exactly c(n,h) indices result.
    """
    out = []
    for v in range((h + 1) ** (n - 1)):
        digits = []
        p = v
        for _ in range(n - 1):
            digits.append(p % (h + 1))
            p //= h + 1
        digits.reverse()
        s = sum(digits)
        if s <= h:
            out.append(tuple(digits) + (h - s,))
    return out


def multiindex_table(n: int, k0: int) -> list[tuple[int, ...]]:
    """All multi-indices of degree 1..k0, degree-major (the LL(tau) list)."""
    table = []
    for h in range(1, k0 + 1):
        table.extend(enum_multiindices(n, h))
    return table


@dataclass(frozen=True)
class WebDims:
    """Dimension bookkeeping for one web."""

    n: int
    d: int
    k0: int
    calibrated: bool
    alpha: int  # (k0-1)*d, length of the jet vectors carrying sections
    ro: int  # pi_prime(n, d), the rank bound / bundle rank
    beta: int  # alpha - ro, row count of the kernel-defining system

    @classmethod
    def of_web(cls, web: WebSpec) -> "WebDims":
        return cls.of(web.n, web.d)

    @classmethod
    def of(cls, n: int, d: int) -> "WebDims":
        k0, calibrated = k0_of(n, d)
        alpha = (k0 - 1) * d
        ro = pi_prime(n, d)
        return cls(n, d, k0, calibrated, alpha, ro, alpha - ro)

    def block_pivot_count(self, h: int) -> int:
        """Size of the pivot index set R(h) in block h: c(n, h+1)."""
        return c(self.n, h + 1)

    def r_positions(self) -> list[int]:
        """0-based pivot positions: first c(n,h+1) slots of each block h."""
        out = []
        for h in range(self.k0 - 1):
            out.extend(range(h * self.d, h * self.d + self.block_pivot_count(h)))
        return out

    def s_positions(self) -> list[int]:
        """0-based free positions: remaining slots of each block h."""
        out = []
        for h in range(self.k0 - 1):
            out.extend(range(h * self.d + self.block_pivot_count(h), (h + 1) * self.d))
        return out


class MTable:
    """Coefficients M(i, h, L) linking derivatives of g_i(u_i)*du_i terms to
    the successive derivatives of the unknown functions g_i.

    Built by the degree recurrence
        M(i, 0, 1_r)     = du_i/dx_r
        M(i, h, L + 1_r) = d/dx_r M(i, h, L) + M(i, h-1, L) * du_i/dx_r
    with M(i, -1, .) = 0 and M(i, h, L) = 0 for h >= |L|.
    """

    def __init__(self, web: WebSpec, point: SamplePoint, order: int, ctx: JetContext | None = None):
        self.web = web
        self.point = point
        self.order = order
        self.ctx = ctx or context_for(web)
        self.k0, _ = k0_of(web.n, web.d)
        if order < self.k0 + 1:
            raise WebCurvError(
                f"jet order {order} too small: the pipeline needs at least k0+1 = {self.k0 + 1}"
            )
        # jets of the integrals and their first derivatives
        self.u_jets = [
            jet_eval(e, point, order, web.params, self.ctx) for e in web.integrals
        ]
        self.du = [[u.derive(r + 1) for r in range(web.n)] for u in self.u_jets]
        self._m: dict[tuple[int, int, tuple[int, ...]], Jet] = {}
        self._build()

    def _build(self):
        n, d = self.web.n, self.web.d
        for i in range(d):
            for r in range(n):
                unit = tuple(1 if s == r else 0 for s in range(n))
                self._m[(i, 0, unit)] = self.du[i][r]
        for degree in range(2, self.k0 + 1):
            for L in enum_multiindices(n, degree):
                r = next(s for s in range(n) if L[s] > 0)
                prev = L[:r] + (L[r] - 1,) + L[r + 1 :]
                for i in range(d):
                    for h in range(degree):
                        term = self.get(i, h, prev).derive(r + 1)
                        term = term + self.get(i, h - 1, prev) * self.du[i][r]
                        if not term.is_zero():
                            self._m[(i, h, L)] = term

    def get(self, i: int, h: int, L: tuple[int, ...]) -> Jet:
        """M(i, h, L); implicit zeros for h < 0 or h >= |L|."""
        jet = self._m.get((i, h, tuple(L)))
        if jet is not None:
            return jet
        return Jet.zero(self.ctx, self.order)

    def first_derivative_matrix(self):
        """n x d matrix of the constant terms of the du_i/dx_r (residue field)."""
        rp = self.ctx.scalar_rational_part
        return [
            [rp(self.du[i][r].constant_term()) for i in range(self.web.d)]
            for r in range(self.web.n)
        ]


def build_mtable(web: WebSpec, point: SamplePoint, order: int, ctx=None) -> MTable:
    return MTable(web, point, order, ctx)


@dataclass
class Systems:
    """The assembled linear systems at one point (calibrated webs)."""

    mm: JetMatrix  # beta x alpha: equations E_L for |L| <= k0-1
    qq: JetMatrix  # d x alpha: equations E_L for |L| = k0, lower-level part
    pp: JetMatrix  # d x d: top-level coefficient matrix (C_i^L at the point)


def assemble_systems(web: WebSpec, mtable: MTable, dims: WebDims) -> Systems:
    """Build MM, QQ, PP from the M-table.

    Entries are truncated to the orders the downstream pipeline needs
    (kernel entries feed two more derivatives, prolongation entries one),
    keeping elimination cheap without losing any required precision.
    """
    if not dims.calibrated:
        raise WebCurvError("MM/QQ/PP assembly requires a calibrated web")
    n, d, k0 = dims.n, dims.d, dims.k0
    mm_order = mtable.order - (k0 - 1)
    pq_order = mtable.order - k0
    rows = multiindex_table(n, k0)

    def entry(L, eta, order):
        h, i = divmod(eta, d)
        return mtable.get(i, h, L).truncate(order)

    mm = JetMatrix.from_entries(
        mtable.ctx, dims.beta, dims.alpha, lambda t, e: entry(rows[t], e, mm_order)
    )
    qq = JetMatrix.from_entries(
        mtable.ctx, d, dims.alpha, lambda t, e: entry(rows[dims.beta + t], e, pq_order)
    )
    pp = JetMatrix.from_entries(
        mtable.ctx,
        d,
        d,
        lambda t, i: mtable.get(i, k0 - 1, rows[dims.beta + t]).truncate(pq_order),
    )
    return Systems(mm, qq, pp)


def p_matrix(mtable: MTable, h: int) -> JetMatrix:
    """The c(n,h) x d matrix of top coefficients C_i^L for |L| = h."""
    n, d = mtable.web.n, mtable.web.d
    rows = enum_multiindices(n, h)
    return JetMatrix.from_entries(
        mtable.ctx, len(rows), d, lambda t, i: mtable.get(i, h - 1, rows[t])
    )


@dataclass(frozen=True)
class OrdinarinessVerdict:
    weak_general_position: bool
    mm_rank: int
    pp_rank: int
    ordinary: bool


def weak_general_position(mtable: MTable) -> bool:
    """First derivatives span: the n x d gradient matrix has rank n."""
    return rational_rank(mtable.first_derivative_matrix()) == mtable.web.n


def ordinariness_check(systems: Systems, dims: WebDims, mtable: MTable) -> OrdinarinessVerdict:
    """Ordinary at the point iff rank(MM) = beta and rank(PP) = d."""
    wgp = weak_general_position(mtable)
    mm_rank = residue_rank(systems.mm)
    pp_rank = residue_rank(systems.pp)
    return OrdinarinessVerdict(
        weak_general_position=wgp,
        mm_rank=mm_rank,
        pp_rank=pp_rank,
        ordinary=wgp and mm_rank == dims.beta and pp_rank == dims.d,
    )
