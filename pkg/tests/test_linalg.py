import random

import pytest
from gmpy2 import mpq

from webcurv.errors import SingularAtPoint
from webcurv.jets import Jet, JetContext
from webcurv.linalg import JetMatrix, invert, rational_rank, residue_rank

CTX = JetContext(2)


def const_matrix(rows, order=2):
    return JetMatrix(CTX, [[Jet.constant(CTX, v, order) for v in row] for row in rows])


def test_residue_rank_identity():
    assert residue_rank(JetMatrix.identity(CTX, 3, 2)) == 3


def test_residue_rank_dependent_rows():
    assert residue_rank(const_matrix([[1, 2], [2, 4]])) == 1


def test_rational_rank_rectangular():
    m = [[mpq(1), mpq(0), mpq(2)], [mpq(0), mpq(1), mpq(3)]]
    assert rational_rank(m) == 2
    assert rational_rank([]) == 0


def test_residue_rank_permutation_invariant():
    rng = random.Random(0)
    rows = [[rng.randint(-3, 3) for _ in range(4)] for _ in range(3)]
    m = const_matrix(rows)
    base = residue_rank(m)
    shuffled = list(range(3))
    rng.shuffle(shuffled)
    assert residue_rank(m.select_rows(shuffled)) == base
    cols = list(range(4))
    rng.shuffle(cols)
    assert residue_rank(m.select_cols(cols)) == base


def test_invert_scalar_jet():
    j = Jet(CTX, 2, {(0, 0): mpq(2), (1, 0): mpq(1)})
    m = JetMatrix(CTX, [[j]])
    inv = invert(m)
    assert (m @ inv).data[0][0] == Jet.constant(CTX, 1, 2)


def test_invert_diagonal():
    m = const_matrix([[2, 0], [0, 3]])
    inv = invert(m)
    assert inv.data[0][0].constant_term() == mpq(1, 2)
    assert inv.data[1][1].constant_term() == mpq(1, 3)


def test_invert_requires_unit_pivots():
    with pytest.raises(SingularAtPoint):
        invert(const_matrix([[1, 2], [2, 4]]))


def test_invert_rectangular_rejected():
    with pytest.raises(SingularAtPoint):
        invert(const_matrix([[1, 2, 3], [4, 5, 6]]))


def test_invert_random_jet_matrices_roundtrip():
    rng = random.Random(3)
    for _ in range(10):
        size = rng.choice([2, 3])
        data = []
        for i in range(size):
            row = []
            for j in range(size):
                coeffs = {}
                c0 = mpq(rng.randint(-4, 4))
                if c0:
                    coeffs[(0, 0)] = c0
                for L in [(1, 0), (0, 1), (1, 1)]:
                    v = mpq(rng.randint(-2, 2))
                    if v:
                        coeffs[L] = v
                row.append(Jet(CTX, 2, coeffs))
            data.append(row)
        m = JetMatrix(CTX, data)
        if residue_rank(m) < size:
            with pytest.raises(SingularAtPoint):
                invert(m)
            continue
        inv = invert(m)
        ident = JetMatrix.identity(CTX, size, 2)
        assert (m @ inv).data == ident.data
        assert (inv @ m).data == ident.data


def test_delete_rows_cols():
    m = const_matrix([[1, 2, 3], [4, 5, 6]])
    outer = m.delete_cols([1])
    assert outer.cols == 2
    assert [e.constant_term() for e in outer.data[0]] == [1, 3]
    assert m.delete_cols([]).data == m.data
    with pytest.raises(IndexError):
        m.delete_rows([5])


def test_delete_rows_cols_commute():
    m = const_matrix([[1, 2, 3], [4, 5, 6], [7, 8, 9]])
    a = m.delete_rows([0]).delete_cols([2])
    b = m.delete_cols([2]).delete_rows([0])
    assert a.data == b.data


def test_matmul_identity_and_associativity():
    rng = random.Random(9)
    mats = [
        const_matrix([[rng.randint(-3, 3) for _ in range(3)] for _ in range(3)])
        for _ in range(3)
    ]
    a, b, c = mats
    ident = JetMatrix.identity(CTX, 3, 2)
    assert (ident @ a).data == a.data
    assert ((a @ b) @ c).data == (a @ (b @ c)).data


def test_solve_via_inverse_matches_columnwise_solve():
    # U = -inv(PP) @ QQ must satisfy PP @ U + QQ == 0 column by column
    pp = const_matrix([[2, 1], [1, 1]])
    qq = const_matrix([[1, 0, 3], [0, 1, -2]])
    u = -(invert(pp) @ qq)
    resid = pp @ u + qq
    assert resid.is_zero()
