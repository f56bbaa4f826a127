import pytest

from webcurv import connection as conn
from webcurv.corpus import example2, pereira_pirio, pirio8
from webcurv.engine import MTable, WebDims, assemble_systems
from webcurv.errors import SingularAtPoint
from webcurv.jets import Jet, sample_point
from webcurv.linalg import JetMatrix

FAST_CORPUS = [
    (pereira_pirio(2), 2),
    (example2(), 3),
]


def pipeline(web, n, seed=0):
    dims = WebDims.of_web(web)
    point = sample_point(n, seed=seed, attempt=0, height_bound=50)
    mt = MTable(web, point, order=dims.k0 + 1)
    systems = assemble_systems(web, mt, dims)
    triv = conn.kernel_basis(systems.mm, dims)
    u_mat = conn.prolongation(systems.qq, systems.pp)
    return dims, mt, systems, triv, u_mat


def jets_agree(a, b):
    k = min(a.order, b.order)
    return a.truncate(k).coeffs == b.truncate(k).coeffs


# -- trivialization ----------------------------------------------------------


def test_bol_trivialization_shapes():
    dims, _, systems, triv, u_mat = pipeline(*FAST_CORPUS[0])
    assert (triv.a.rows, triv.a.cols) == (9, 6)
    assert (triv.w.rows, triv.w.cols) == (15, 6)
    assert (u_mat.rows, u_mat.cols) == (5, 15)
    assert len(triv.r_positions) == 9 and len(triv.s_positions) == 6


@pytest.mark.parametrize("web,n", FAST_CORPUS)
def test_kernel_basis_annihilated_by_mm(web, n):
    dims, _, systems, triv, _ = pipeline(web, n)
    assert (systems.mm @ triv.w).is_zero()


@pytest.mark.parametrize("web,n", FAST_CORPUS)
def test_kernel_basis_identity_on_s_rows(web, n):
    dims, _, _, triv, _ = pipeline(web, n)
    sub = triv.w.select_rows(triv.s_positions)
    for i in range(dims.ro):
        for j in range(dims.ro):
            e = sub.data[i][j]
            assert e.constant_term() == (1 if i == j else 0)
            assert len(e.coeffs) == (1 if i == j else 0)


def test_kernel_basis_singular_yyy_raises():
    # proportional differentials put a rank drop right inside YYY
    from webcurv.expr import WebSpec, parse_expr

    sources = ["x1", "2*x1", "x2", "x1+x2"]
    web = WebSpec(2, tuple(parse_expr(s, 2) for s in sources))
    dims = WebDims.of_web(web)
    point = sample_point(2, seed=0, attempt=0)
    mt = MTable(web, point, order=dims.k0 + 1)
    systems = assemble_systems(web, mt, dims)
    with pytest.raises(SingularAtPoint):
        conn.kernel_basis(systems.mm, dims)


@pytest.mark.parametrize("web,n", FAST_CORPUS)
def test_prolongation_solves_top_system(web, n):
    _, _, systems, _, u_mat = pipeline(web, n)
    assert (systems.pp @ u_mat + systems.qq).is_zero()


# -- covariant derivative ----------------------------------------------------


@pytest.mark.parametrize("web,n", FAST_CORPUS)
def test_nabla_zero_and_linearity(web, n):
    dims, mt, systems, triv, u_mat = pipeline(web, n)
    zero = [Jet.zero(mt.ctx, 2)] * dims.alpha
    assert all(e.is_zero() for e in conn.nabla(zero, 1, u_mat, mt, dims))
    v1, v2 = triv.w.column(0), triv.w.column(1)
    summed = conn.nabla([a + b for a, b in zip(v1, v2)], 1, u_mat, mt, dims)
    split = [
        a + b
        for a, b in zip(
            conn.nabla(v1, 1, u_mat, mt, dims), conn.nabla(v2, 1, u_mat, mt, dims)
        )
    ]
    assert all(jets_agree(a, b) for a, b in zip(summed, split))


@pytest.mark.parametrize("web,n", FAST_CORPUS)
def test_kernel_stability(web, n):
    # nabla maps sections of the kernel bundle back into it: MM * nabla(W_j)
    # vanishes identically for every basis column and direction
    dims, mt, systems, triv, u_mat = pipeline(web, n)
    for j in range(dims.ro):
        for direction in range(1, dims.n + 1):
            image = conn.nabla(triv.w.column(j), direction, u_mat, mt, dims)
            assert all(e.is_zero() for e in systems.mm.matvec(image)), (j, direction)


@pytest.mark.parametrize("web,n", FAST_CORPUS)
def test_basis_expansion_exactness(web, n):
    # nabla(W_j) = sum_k A[k, j] W_k holds in every alpha coordinate, not
    # only on the S rows where A is read off
    dims, mt, systems, triv, u_mat = pipeline(web, n)
    forms = conn.connection_form(triv, u_mat, mt, dims)
    for direction in range(1, dims.n + 1):
        a = forms[direction - 1]
        for j in range(dims.ro):
            image = conn.nabla(triv.w.column(j), direction, u_mat, mt, dims)
            for pos in range(dims.alpha):
                recon = Jet.zero(mt.ctx, image[pos].order)
                for k in range(dims.ro):
                    recon = recon + a.data[k][j] * triv.w.data[pos][k]
                assert jets_agree(image[pos], recon), (direction, j, pos)


# -- curvature ---------------------------------------------------------------


@pytest.mark.parametrize("web,n", FAST_CORPUS)
def test_curvature_matches_commutator_expansion(web, n):
    # second route to K(r,s): apply nabla twice to each basis column in both
    # orders and read the difference off on the S rows
    dims, mt, systems, triv, u_mat = pipeline(web, n)
    forms = conn.connection_form(triv, u_mat, mt, dims)
    kmats = conn.curvature(forms, dims)
    for (r, s), k in kmats.items():
        for j in range(dims.ro):
            v = triv.w.column(j)
            sr = conn.nabla(conn.nabla(v, r, u_mat, mt, dims), s, u_mat, mt, dims)
            rs = conn.nabla(conn.nabla(v, s, u_mat, mt, dims), r, u_mat, mt, dims)
            diff = [a - b for a, b in zip(sr, rs)]
            for row, pos in enumerate(triv.s_positions):
                assert jets_agree(k.data[row][j], diff[pos]), (r, s, j, row)


def test_curvature_antisymmetric_in_the_pair():
    dims, mt, systems, triv, u_mat = pipeline(*FAST_CORPUS[1])
    forms = conn.connection_form(triv, u_mat, mt, dims)
    kmats = conn.curvature(forms, dims)
    # swapping the two connection matrices flips the sign of the formula
    prod_order = max(min(f.min_order() for f in forms) - 1, 0)
    t = [f.truncate(prod_order) for f in forms]
    for (r, s), k in kmats.items():
        ar, as_ = forms[r - 1], forms[s - 1]
        drs = JetMatrix(ar.ctx, [[e.derive(r) for e in row] for row in as_.data])
        dsr = JetMatrix(ar.ctx, [[e.derive(s) for e in row] for row in ar.data])
        swapped = drs - dsr + (t[r - 1] @ t[s - 1]) - (t[s - 1] @ t[r - 1])
        assert (swapped + k).is_zero()


def test_bol_is_flat_at_several_points():
    web, n = FAST_CORPUS[0]
    for seed in range(3):
        dims, mt, systems, triv, u_mat = pipeline(web, n, seed=seed)
        forms = conn.connection_form(triv, u_mat, mt, dims)
        kmats = conn.curvature(forms, dims)
        summary = conn.curvature_summary(kmats, mt.ctx)
        assert summary["flat"]
        assert summary["witness"] is None
        assert conn.invariant_flat_prefix(forms, kmats, dims) == dims.ro


def test_subbundle_check_on_flat_web():
    dims, mt, systems, triv, u_mat = pipeline(*FAST_CORPUS[0])
    forms = conn.connection_form(triv, u_mat, mt, dims)
    kmats = conn.curvature(forms, dims)
    full = conn.subbundle_check(forms, kmats, range(1, dims.ro + 1))
    assert full["invariant"] and full["flat_restriction"]
    assert full["rank_lower_bound"] == dims.ro
    empty = conn.subbundle_check(forms, kmats, [])
    assert empty["invariant"] and empty["rank_lower_bound"] == 0


def test_pirio8_prefix_and_subbundle():
    web = pirio8()
    dims, mt, systems, triv, u_mat = pipeline(web, 2)
    forms = conn.connection_form(triv, u_mat, mt, dims)
    kmats = conn.curvature(forms, dims)
    summary = conn.curvature_summary(kmats, mt.ctx)
    assert not summary["flat"]
    assert summary["witness"] is not None
    assert conn.invariant_flat_prefix(forms, kmats, dims) == 19
    sub = conn.subbundle_check(forms, kmats, range(1, 20))
    assert sub["invariant"] and sub["flat_restriction"]
    assert sub["rank_lower_bound"] == 19
    full = conn.subbundle_check(forms, kmats, range(1, dims.ro + 1))
    assert not full["flat_restriction"]
