"""Kernel trivialization, prolongation, covariant derivative and curvature.

Sections of the rank-ro bundle live inside alpha-vectors of jets (alpha =
(k0-1)*d, blocks of width d per derivative level h = 0..k0-2).  The basis
W(j) of ker(MM) frees the S(h)-indexed components of each block and solves
for the R(h)-indexed ones through the square submatrix YYY of MM.
"""

from __future__ import annotations

from dataclasses import dataclass

from .engine import MTable, WebDims
from .jets import Jet
from .linalg import JetMatrix, invert


@dataclass
class Trivialization:
    """Kernel basis data: W columns span ker(MM), the S-rows of W form the
    identity, and a = -YYY^{-1} B holds the dependent coefficients."""

    w: JetMatrix  # alpha x ro
    a: JetMatrix  # beta x ro
    r_positions: list[int]
    s_positions: list[int]


def kernel_basis(mm: JetMatrix, dims: WebDims) -> Trivialization:
    """Columns W(j) of the kernel of MM in the fixed R/S trivialization.

    Raises SingularAtPoint when YYY (the R-column square submatrix of MM)
    is residue-singular; the caller may retry with a permuted integral
    order or another sample point.
    """
    rpos = dims.r_positions()
    spos = dims.s_positions()
    yyy = mm.select_cols(rpos)
    b = mm.select_cols(spos)
    a = -(invert(yyy) @ b)  # beta x ro
    order = a.min_order()
    zero = Jet.zero(mm.ctx, order)
    one = Jet.constant(mm.ctx, 1, order)
    w_rows = [[zero] * dims.ro for _ in range(dims.alpha)]
    for s, pos in enumerate(rpos):
        w_rows[pos] = list(a.data[s])
    for j, pos in enumerate(spos):
        w_rows[pos] = [one if k == j else zero for k in range(dims.ro)]
    return Trivialization(JetMatrix(mm.ctx, w_rows), a, rpos, spos)


def prolongation(qq: JetMatrix, pp: JetMatrix) -> JetMatrix:
    """U = -PP^{-1} QQ: the unique top-level jet in terms of the lower ones."""
    return -(invert(pp) @ qq)


def nabla(vec, direction: int, u_mat: JetMatrix, mtable: MTable, dims: WebDims):
    """Covariant derivative of an alpha-vector in one coordinate direction.

    Blocks h < k0-2:   out[i + h*d] = d_dir v[i + h*d] - v[i + (h+1)*d] * du_i
    last block:        out[i + (k0-2)*d] = d_dir v[...] - (U v)[i] * du_i
    Each output entry loses one jet order.
    """
    d, k0 = dims.d, dims.k0
    du = [mtable.du[i][direction - 1] for i in range(d)]
    uv = u_mat.matvec(vec)
    out = []
    for h in range(k0 - 2):
        for i in range(d):
            out.append(vec[h * d + i].derive(direction) - vec[(h + 1) * d + i] * du[i])
    for i in range(d):
        out.append(vec[(k0 - 2) * d + i].derive(direction) - uv[i] * du[i])
    return out


def connection_form(triv: Trivialization, u_mat: JetMatrix, mtable: MTable, dims: WebDims):
    """Connection matrices A(1..n): nabla of each basis column, read off on
    the S-rows (where the basis is the identity)."""
    forms = []
    for direction in range(1, dims.n + 1):
        cols = [
            nabla(triv.w.column(j), direction, u_mat, mtable, dims)
            for j in range(dims.ro)
        ]
        big = JetMatrix(triv.w.ctx, [[col[r] for col in cols] for r in range(dims.alpha)])
        forms.append(big.select_rows(triv.s_positions))
    return forms


def curvature(forms, dims: WebDims):
    """Curvature matrices K(r,s) for 1 <= r < s <= n.

    K(r,s) = d_s A(r) - d_r A(s) + A(s) A(r) - A(r) A(s); entries land at
    one jet order below the connection entries.
    """
    n = dims.n
    out = {}
    # derivative consumes an order; compute products at the matching order
    prod_order = max(min(f.min_order() for f in forms) - 1, 0)
    truncated = [f.truncate(prod_order) for f in forms]
    for s in range(2, n + 1):
        for r in range(1, s):
            ar, as_ = forms[r - 1], forms[s - 1]
            dsar = JetMatrix(ar.ctx, [[e.derive(s) for e in row] for row in ar.data])
            dras = JetMatrix(ar.ctx, [[e.derive(r) for e in row] for row in as_.data])
            tr, ts = truncated[r - 1], truncated[s - 1]
            out[(r, s)] = dsar - dras + (ts @ tr) - (tr @ ts)
    return out


@dataclass
class CurvatureWitness:
    r: int
    s: int
    row: int  # 1-based
    col: int  # 1-based
    value: str


def curvature_summary(kmats, ctx):
    """Classify the curvature: fully zero, zero at nilpotents-off, witnesses."""
    full_zero = True
    residue_zero = True
    deformation_nonzero = False
    witness = None
    residue_witness = None
    for (r, s), k in sorted(kmats.items()):
        for i, row in enumerate(k.data):
            for j, e in enumerate(row):
                if e.is_zero():
                    continue
                full_zero = False
                if witness is None:
                    witness = CurvatureWitness(r, s, i + 1, j + 1, _format_jet(e, ctx))
                rational_zero = all(
                    not ctx.scalar_rational_part(v) for v in e.coeffs.values()
                )
                if rational_zero:
                    deformation_nonzero = True
                else:
                    residue_zero = False
                    if residue_witness is None:
                        residue_witness = CurvatureWitness(
                            r, s, i + 1, j + 1, _format_jet(e, ctx)
                        )
    return {
        "flat": full_zero,
        "flat_at_zero_deformation": residue_zero,
        "deformation_nonzero": deformation_nonzero,
        "witness": witness,
        "residue_witness": residue_witness,
    }


def _format_jet(e, ctx):
    """Constant term of a jet as text (rational, or rational + nilpotent part)."""
    v = e.constant_term()
    if ctx.has_nilpotents:
        return v.format(ctx.nil_names)
    return str(v)


def invariant_flat_prefix(forms, kmats, dims: WebDims) -> int:
    """Largest m such that span{W(1..m)} is preserved by the connection and
    the curvature restricted to it vanishes; 0 if none."""
    for m in range(dims.ro, 0, -1):
        if _prefix_invariant(forms, m) and _prefix_flat(kmats, m):
            return m
    return 0


def subbundle_check(forms, kmats, indices) -> dict:
    """Invariance and flat-restriction of the subbundle spanned by the listed
    basis vectors (1-based indices)."""
    inside = sorted(set(indices))
    inset = set(i - 1 for i in inside)
    invariant = all(
        a.data[k][j - 1].is_zero()
        for a in forms
        for j in inside
        for k in range(a.rows)
        if k not in inset
    )
    flat_restriction = invariant and all(
        k.data[i - 1][j - 1].is_zero()
        for k in kmats.values()
        for i in inside
        for j in inside
    )
    return {
        "indices": inside,
        "invariant": invariant,
        "flat_restriction": flat_restriction,
        "rank_lower_bound": len(inside) if invariant and flat_restriction else 0,
    }


def _prefix_invariant(forms, m) -> bool:
    return all(
        a.data[k][j].is_zero()
        for a in forms
        for j in range(m)
        for k in range(m, a.rows)
    )


def _prefix_flat(kmats, m) -> bool:
    return all(
        k.data[i][j].is_zero() for k in kmats.values() for i in range(m) for j in range(m)
    )
