"""Dense linear algebra over the jet local ring.

Rank decisions happen over the residue field (constant terms, nilpotent
parts set to 0); inversion is Gauss-Jordan restricted to unit pivots.
"""

from __future__ import annotations

from .errors import SingularAtPoint
from .jets import Jet, JetContext


class JetMatrix:
    """Rectangular matrix of jets sharing one evaluation context."""

    __slots__ = ("ctx", "rows", "cols", "data")

    def __init__(self, ctx: JetContext, data):
        self.ctx = ctx
        self.data = [list(row) for row in data]
        self.rows = len(self.data)
        self.cols = len(self.data[0]) if self.data else 0
        assert all(len(row) == self.cols for row in self.data), "ragged matrix"

    @classmethod
    def identity(cls, ctx, size, order):
        one = Jet.constant(ctx, 1, order)
        zero = Jet.zero(ctx, order)
        return cls(ctx, [[one if i == j else zero for j in range(size)] for i in range(size)])

    @classmethod
    def from_entries(cls, ctx, rows, cols, fn):
        return cls(ctx, [[fn(i, j) for j in range(cols)] for i in range(rows)])

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def copy(self):
        return JetMatrix(self.ctx, self.data)

    def column(self, j):
        return [row[j] for row in self.data]

    def min_order(self) -> int:
        return min(e.order for row in self.data for e in row)

    def truncate(self, order: int) -> "JetMatrix":
        return JetMatrix(self.ctx, [[e.truncate(order) for e in row] for row in self.data])

    def constant_matrix(self):
        """Residue-field matrix: constant terms with nilpotents set to 0."""
        rp = self.ctx.scalar_rational_part
        return [[rp(e.constant_term()) for e in row] for row in self.data]

    # -- ring operations

    def __add__(self, other):
        assert (self.rows, self.cols) == (other.rows, other.cols), "shape mismatch"
        return JetMatrix(
            self.ctx,
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.data, other.data)],
        )

    def __sub__(self, other):
        assert (self.rows, self.cols) == (other.rows, other.cols), "shape mismatch"
        return JetMatrix(
            self.ctx,
            [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.data, other.data)],
        )

    def __neg__(self):
        return JetMatrix(self.ctx, [[-e for e in row] for row in self.data])

    def __matmul__(self, other):
        assert self.cols == other.rows, "shape mismatch in matmul"
        cols_t = [other.column(j) for j in range(other.cols)]
        out = []
        for row in self.data:
            out_row = []
            for col in cols_t:
                acc = row[0] * col[0]
                for a, b in zip(row[1:], col[1:]):
                    acc = acc + a * b
                out_row.append(acc)
            out.append(out_row)
        return JetMatrix(self.ctx, out)

    def matvec(self, vec):
        assert self.cols == len(vec), "shape mismatch in matvec"
        out = []
        for row in self.data:
            acc = row[0] * vec[0]
            for a, b in zip(row[1:], vec[1:]):
                acc = acc + a * b
            out.append(acc)
        return out

    def scale(self, s):
        return JetMatrix(self.ctx, [[e * s for e in row] for row in self.data])

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.data for e in row)

    # -- slicing

    def delete_rows(self, indices) -> "JetMatrix":
        drop = set(indices)
        if not all(0 <= i < self.rows for i in drop):
            raise IndexError("row index out of range")
        return JetMatrix(self.ctx, [row for i, row in enumerate(self.data) if i not in drop])

    def delete_cols(self, indices) -> "JetMatrix":
        drop = set(indices)
        if not all(0 <= j < self.cols for j in drop):
            raise IndexError("column index out of range")
        return JetMatrix(
            self.ctx,
            [[e for j, e in enumerate(row) if j not in drop] for row in self.data],
        )

    def select_cols(self, indices) -> "JetMatrix":
        return JetMatrix(self.ctx, [[row[j] for j in indices] for row in self.data])

    def select_rows(self, indices) -> "JetMatrix":
        return JetMatrix(self.ctx, [self.data[i] for i in indices])


def rational_rank(matrix) -> int:
    """Rank of a matrix of mpq values by fraction Gaussian elimination."""
    m = [list(row) for row in matrix]
    if not m:
        return 0
    rows, cols = len(m), len(m[0])
    rank = 0
    for col in range(cols):
        pivot = next((r for r in range(rank, rows) if m[r][col]), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        inv = 1 / m[rank][col]
        for r in range(rank + 1, rows):
            f = m[r][col] * inv
            if not f:
                continue
            for c in range(col, cols):
                m[r][c] -= m[rank][c] * f
        rank += 1
        if rank == rows:
            break
    return rank


def residue_rank(m: JetMatrix) -> int:
    """Rank over the rationals of the constant-term matrix (nilpotents at 0)."""
    return rational_rank(m.constant_matrix())


def invert(m: JetMatrix) -> JetMatrix:
    """Inverse by Gauss-Jordan with unit pivots (nonzero rational constant term).

    Pivot rule: first unit entry in the current column, top-down; this keeps
    runs deterministic.  Raises SingularAtPoint if the residue matrix is
    singular.
    """
    if m.rows != m.cols:
        raise SingularAtPoint(f"cannot invert a {m.rows}x{m.cols} matrix")
    size = m.rows
    order = m.min_order()
    rp = m.ctx.scalar_rational_part
    work = [[e.truncate(order) for e in row] for row in m.data]
    aug = JetMatrix.identity(m.ctx, size, order).data
    for col in range(size):
        pivot = next(
            (r for r in range(col, size) if rp(work[r][col].constant_term())),
            None,
        )
        if pivot is None:
            raise SingularAtPoint(f"no unit pivot in column {col}")
        work[col], work[pivot] = work[pivot], work[col]
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = work[col][col].inverse()
        work[col] = [e * inv for e in work[col]]
        aug[col] = [e * inv for e in aug[col]]
        for r in range(size):
            if r == col:
                continue
            f = work[r][col]
            if f.is_zero():
                continue
            work[r] = [a - f * b for a, b in zip(work[r], work[col])]
            aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return JetMatrix(m.ctx, aug)
