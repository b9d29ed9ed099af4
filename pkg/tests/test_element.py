import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import PENTAGON, UNIT_SQUARE
from hopf_vem.element import (
    STABILIZATIONS,
    CellData,
    DofLayout,
    ElementError,
    ModelCoefficients,
    build_element,
    dof_layout,
    element_for,
    elliptic_projector,
    interpolate,
    l2_projector,
    local_load,
    local_mass,
    local_stiffness,
    matrix_D,
)
from hopf_vem.meshgen import FAMILIES, generate_family
from hopf_vem.oracle import ReferenceElement, fixture_paths, load_fixture
from hopf_vem.quadrature import n_poly

ALPHA = ModelCoefficients(0.7, 1.3, 2.1)


def poly_fields(ops, coef):
    """(u, grad) closures of sum_l coef[l] m_l for interpolation."""
    b = ops.basis

    def u(x, y):
        return b.values(np.column_stack(np.broadcast_arrays(x, y))) @ coef

    def grad(x, y):
        g = np.einsum("qnd,n->qd", b.gradients(np.column_stack(np.broadcast_arrays(x, y))), coef)
        return g[:, 0], g[:, 1]

    return u, grad


# -- layout and coefficients ------------------------------------------------------


@pytest.mark.parametrize("k, n", [(2, 13), (3, 19), (4, 30), (5, 42)])
def test_square_dof_counts(k, n):
    L = dof_layout(4, k)
    assert L.n_dofs == n
    assert L.n_dofs == 3 * 4 + (max(k - 3, 0) + (k - 2)) * 4 + (k - 1) * k // 2


@pytest.mark.parametrize("k, r0, r1", [(2, 3, 1), (3, 3, 2), (4, 4, 3), (6, 6, 5)])
def test_trace_degrees(k, r0, r1):
    L = DofLayout(k, 5)
    assert (L.r0, L.r1) == (r0, r1)
    # each edge's Hermite data determine the traces exactly
    assert 4 + L.n_d2 == r0 + 1
    assert 2 + L.n_d3 == r1 + 1


def test_layout_blocks_are_contiguous():
    L = DofLayout(4, 5)
    idx = np.concatenate([L.d1(j) for j in range(5)] + [L.d2(j) for j in range(5)]
                         + [L.d3(j) for j in range(5)] + [L.d4()])
    np.testing.assert_array_equal(idx, np.arange(L.n_dofs))


def test_layout_rejects_low_degree():
    with pytest.raises(ValueError):
        DofLayout(1, 4)


@pytest.mark.parametrize("alpha", [(1, 0, 1), (1, 1, 0), (-1, 1, 1), (1, -2, 1)])
def test_coefficients_validation(alpha):
    with pytest.raises(ValueError):
        ModelCoefficients(*alpha)


def test_coefficients_parse():
    assert ModelCoefficients.parse("0,1,2.5") == ModelCoefficients(0.0, 1.0, 2.5)
    with pytest.raises(ValueError):
        ModelCoefficients.parse("1,2")


def test_unknown_stabilization(square_cell):
    with pytest.raises(ValueError, match="stabilization"):
        build_element(square_cell, 2, stabilization="none")


# -- edge traces ----------------------------------------------------------------------


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_trace_of_linear_and_constant(square_cell, k):
    ops = build_element(square_cell, k)
    s = np.linspace(0, 1, 7)
    lin = interpolate(ops, lambda x, y: x + 0 * y, lambda x, y: (1 + 0 * x, 0 * x))
    tr = ops.edge_trace_polys(lin, 0)  # (0,0) -> (1,0)
    np.testing.assert_allclose(tr.trace(s), s, atol=1e-13)
    np.testing.assert_allclose(tr.normal_derivative(s), 0, atol=1e-13)
    one = ops.constant_dofs()
    tr = ops.edge_trace_polys(one, 2)
    np.testing.assert_allclose(tr.trace(s), 1, atol=1e-13)
    np.testing.assert_allclose(tr.normal_derivative(s), 0, atol=1e-13)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_trace_normal_derivative_along_x_normal(k):
    # local edge 1 runs (0,0) -> (0,1) with outward normal +x
    cell = CellData.standalone([(-1, 0), (0, 0), (0, 1), (-1, 1)])
    ops = build_element(cell, k)
    s = np.linspace(0, 1, 5)
    sq = interpolate(ops, lambda x, y: x**2 + 0 * y, lambda x, y: (2 * x, 0 * x))
    tr = ops.edge_trace_polys(sq, 1)
    np.testing.assert_allclose(tr.trace(s), 0, atol=1e-12)
    np.testing.assert_allclose(tr.normal_derivative(s), 0, atol=1e-12)
    xy = interpolate(ops, lambda x, y: x * y, lambda x, y: (y, x))
    tr = ops.edge_trace_polys(xy, 1)
    np.testing.assert_allclose(tr.normal_derivative(s), s, atol=1e-12)


def test_traces_of_polynomials_are_exact(square_ops):
    """Traces in P_r0 and P_r1 reproduce any degree-k polynomial on every edge."""
    ops = square_ops
    coef = np.random.default_rng(3).standard_normal(n_poly(ops.k))
    u, grad = poly_fields(ops, coef)
    dofs = ops.polynomial_dofs(coef)
    geo = ops.geometry
    for j in range(4):
        p0, t = geo.vertices[j], geo.tangents[j]
        s = np.linspace(0, geo.edge_lengths[j], 6)
        pts = p0 + s[:, None] * t
        tr = ops.edge_trace_polys(dofs, j)
        gx, gy = grad(pts[:, 0], pts[:, 1])
        np.testing.assert_allclose(tr.trace(s), u(pts[:, 0], pts[:, 1]), atol=1e-11)
        np.testing.assert_allclose(tr.normal_derivative(s), gx * geo.normals[j][0] + gy * geo.normals[j][1], atol=1e-10)


# -- D, projectors ----------------------------------------------------------------------


def test_constant_column_of_D(square_ops):
    ops = square_ops
    L = ops.layout
    col = ops.D[:, 0]
    for j in range(4):
        np.testing.assert_allclose(col[L.d1(j)], [1, 0, 0])
        assert np.all(col[L.d3(j)] == 0)
    assert col[L.d4()[0]] == pytest.approx(1.0, rel=1e-14)
    # edge moments use the local coordinate xi in [-1/2, 1/2]
    for q, i in enumerate(L.d2(0)):
        assert col[i] == pytest.approx((0.5 ** (q + 1) - (-0.5) ** (q + 1)) / (q + 1), abs=1e-15)


def test_vertex_gradient_row_of_D(square_ops):
    ops = square_ops
    for j in range(4):
        r = ops.layout.d1(j)[1]
        assert ops.D[r, 1] == pytest.approx(ops.cell.vertex_h[j] / ops.geometry.diameter, rel=1e-14)
        assert ops.D[r, 2] == 0.0


@pytest.mark.parametrize("path", fixture_paths(), ids=lambda p: p.stem)
def test_golden_matrices(path):
    fx = load_fixture(path)
    ops = build_element(CellData.standalone(fx["vertices"]), fx["k"], ModelCoefficients(*fx["alpha"]))
    for name in ("D", "H", "G", "B", "C", "PiL", "Pi0"):
        ref = fx[name]
        got = getattr(ops, name)
        assert got.shape == ref.shape, name
        assert np.abs(got - ref).max() <= 1e-10 * max(1.0, np.abs(ref).max()), name


def test_golden_set_present():
    names = {p.stem for p in fixture_paths()}
    assert {"square_k2", "square_k3", "square_k4", "triangle_k2", "triangle_k3", "pentagon_k2"} <= names


@settings(max_examples=8, deadline=None)
@given(
    n=st.integers(3, 7),
    jitter=st.lists(st.floats(-0.15, 0.15), min_size=14, max_size=14),
    k=st.sampled_from([2, 3]),
)
def test_element_agrees_with_high_precision_oracle(n, jitter, k):
    t = 2 * np.pi * np.arange(n) / n + np.array(jitter[:n])
    r = 1.0 + np.array(jitter[7 : 7 + n])
    pts = np.column_stack([r * np.cos(t), r * np.sin(t)])
    ops = build_element(CellData.standalone(pts), k, ModelCoefficients())
    ref = ReferenceElement(pts.tolist(), k).as_arrays()
    for name in ("D", "G", "B", "H", "C", "PiL", "Pi0"):
        scale = max(1.0, np.abs(ref[name]).max())
        np.testing.assert_allclose(getattr(ops, name), ref[name], atol=1e-10 * scale, err_msg=name)


def test_square_k2_D_matches_oracle():
    ref = ReferenceElement(UNIT_SQUARE, 2).as_arrays()["D"]
    D = matrix_D(CellData.standalone(UNIT_SQUARE), 2)
    assert D.shape == (13, 6)
    np.testing.assert_allclose(D, ref, atol=1e-14)


def test_projectors_reproduce_polynomials(square_ops):
    I = np.eye(n_poly(square_ops.k))
    np.testing.assert_allclose(square_ops.PiL @ square_ops.D, I, atol=1e-10)
    np.testing.assert_allclose(square_ops.Pi0 @ square_ops.D, I, atol=1e-10)


def test_first_row_of_G_is_boundary_mean(square_cell):
    G, B, PiL = elliptic_projector(square_cell, 2, ModelCoefficients())
    assert G[0, 0] == pytest.approx(1.0, rel=1e-14)
    ops = build_element(square_cell, 2)
    assert B[0] @ ops.constant_dofs() == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_G_equals_BD_on_hex_mesh(k):
    m = generate_family("remapped-hex", 0)
    for c in range(m.n_cells):
        ops = element_for(m, c, k)
        assert np.abs(ops.G - ops.B @ ops.D).max() <= 1e-11 * np.abs(ops.G).max()


def test_enhancement_rows_of_C(square_cell):
    H, C, Pi0 = l2_projector(square_cell, 2)
    ops = build_element(square_cell, 2)
    assert np.array_equal(C[3:6], H[3:6] @ ops.PiL)
    assert np.array_equal(ops.C[3:6], ops.H[3:6] @ ops.PiL)


def test_pi0_of_constant(square_ops):
    np.testing.assert_allclose(square_ops.Pi0 @ square_ops.constant_dofs(), np.eye(n_poly(square_ops.k))[0], atol=1e-10)


@pytest.mark.parametrize("family", FAMILIES)
def test_D_has_full_column_rank(family):
    m = generate_family(family, 0)
    for k in (2, 3, 4):
        for c in range(0, m.n_cells, 3):
            sv = np.linalg.svd(element_for(m, c, k).D, compute_uv=False)
            assert sv[-1] > 1e-8 * sv[0]


def test_singular_projector_is_reported():
    from hopf_vem.element import _projector_solve

    with pytest.raises(ElementError):
        _projector_solve(np.zeros((3, 3), dtype=np.longdouble), np.eye(3, dtype=np.longdouble))


# -- local stiffness, mass and load ------------------------------------------------------------


@pytest.mark.parametrize("stab", STABILIZATIONS)
def test_stiffness_kills_constants(square_cell, k, stab):
    ops = build_element(square_cell, k, ALPHA, stab)
    K = local_stiffness(ops)
    np.testing.assert_allclose(K, K.T, atol=1e-14 * np.abs(K).max())
    assert np.abs(K @ ops.constant_dofs()).max() <= 1e-10 * np.abs(K).max()


# At k = 4 the stiffness entries on the interior moments reach 1e5..1e11 (moments of
# degree-2 scaled monomials are small), so storing K in double precision leaves
# about 3e-11 of round-off when it acts on polynomial dof vectors.
K4_ROUNDOFF = pytest.mark.xfail(strict=True, reason="k=4 stiffness round-off floor exceeds the tolerance")
KS = [2, 3, pytest.param(4, marks=K4_ROUNDOFF)]


@pytest.mark.parametrize("stab", STABILIZATIONS)
@pytest.mark.parametrize("k", KS)
def test_stiffness_on_polynomials_is_exact_energy(square_cell, k, stab):
    """D^T K D equals the alpha2 Lap Lap + alpha1 grad grad Gram matrix, recomputed by quadrature."""
    ops = build_element(square_cell, k, ALPHA, stab)
    r = ops.load_rule(2 * ops.k)
    ml, mg = ops.basis.laplacians(r.points), ops.basis.gradients(r.points)
    gram = ALPHA.alpha2 * (ml * r.weights[:, None]).T @ ml + ALPHA.alpha1 * np.einsum("q,qad,qbd->ab", r.weights, mg, mg)
    DKD = ops.D.T @ ops.K @ ops.D
    assert np.abs(DKD - gram).max() <= 1e-11 * np.abs(gram).max()


def test_stabilization_vanishes_on_polynomials(square_ops):
    assert np.abs(square_ops.K_stab @ square_ops.D).max() <= 1e-9 * np.abs(square_ops.K_stab).max()


def test_single_zero_eigenvalue_square_k2(square_cell):
    for stab in STABILIZATIONS:
        ev = np.linalg.eigvalsh(build_element(square_cell, 2, stabilization=stab).K)
        assert (np.abs(ev) <= 1e-9 * ev[-1]).sum() == 1
        assert ev[0] > -1e-12 * ev[-1]


def test_trace_stabilization_scale(square_ops):
    ops = build_element(square_ops.cell, square_ops.k, stabilization="trace")
    assert ops.stab_scale == pytest.approx(np.trace(ops.K_cons) / ops.layout.n_dofs)
    np.testing.assert_allclose(ops.S, ops.stab_scale * np.eye(ops.layout.n_dofs))


def test_energy_stabilization_structure(square_ops):
    S = square_ops.S
    L = square_ops.layout
    b = L.off_d4
    assert np.count_nonzero(S[:b, :b] - np.diag(np.diag(S[:b, :b]))) == 0
    assert np.all(np.diag(S)[:b] >= 1e-3 * square_ops.stab_scale)
    assert np.all(S[:b, b:] == 0)
    assert np.all(np.linalg.eigvalsh(S[b:, b:]) > 0)


@pytest.mark.parametrize("stab", STABILIZATIONS)
@pytest.mark.parametrize("family", ["remapped-hex", "nonconvex-octagon"])
def test_stiffness_is_positive_off_constants(family, stab):
    rng = np.random.default_rng(11)
    m = generate_family(family, 0)
    for c in range(0, m.n_cells, 5):
        for k in (2, 3, 4):
            ops = element_for(m, c, k, stabilization=stab)
            one = ops.constant_dofs() / np.linalg.norm(ops.constant_dofs())
            V = rng.standard_normal((ops.layout.n_dofs, 200))
            V -= np.outer(one, one @ V)
            num = np.einsum("ij,ik,kj->j", V, ops.K, V)
            den = np.einsum("ij,ik,kj->j", V, ops.K_cons, V)
            assert np.all(num > 0)
            # stabilization only adds energy; the 0.05 floor of the regression band holds
            assert np.all(num >= 0.05 * den)


def test_mass_of_constant(square_ops):
    ops = build_element(square_ops.cell, square_ops.k, ALPHA)
    one = ops.constant_dofs()
    assert one @ local_mass(ops) @ one == pytest.approx(ALPHA.alpha0 * ops.geometry.area, rel=1e-12)


def test_mass_vanishes_without_reaction(square_cell):
    ops = build_element(square_cell, 3, ModelCoefficients(0.0, 1.0, 1.0))
    assert np.all(ops.M == 0)


def test_mass_on_polynomials(square_ops):
    ops = build_element(square_ops.cell, square_ops.k, ALPHA)
    np.testing.assert_allclose(ops.D.T @ ops.M @ ops.D, ALPHA.alpha0 * ops.H, atol=1e-12 * np.abs(ops.H).max())
    ev = np.linalg.eigvalsh(ops.M)
    assert ev[0] > -1e-12 * ev[-1]


def test_load_of_zero_and_one(square_ops):
    ops = square_ops
    assert np.all(local_load(ops, lambda x, y: 0 * x) == 0)
    F = local_load(ops, lambda x, y: 1 + 0 * x)
    expect = np.zeros(ops.layout.n_dofs)
    expect[ops.layout.d4()[0]] = ops.geometry.area
    np.testing.assert_allclose(F, expect, atol=1e-13)


def test_load_of_scaled_monomial(square_ops):
    ops = square_ops
    i = ops.basis.index((1, 0))
    F = ops.load(lambda x, y: (x - ops.basis.center[0]) / ops.basis.h)
    np.testing.assert_allclose(F, ops.H[i] @ ops.Pi0, atol=1e-12)


@pytest.mark.parametrize("k", [2, 3, 4])
@pytest.mark.parametrize("family", FAMILIES)
def test_k_consistency(family, k):
    """(K + M) dofs(q) equals the exact bilinear form of q against each basis function."""
    m = generate_family(family, 0)
    rng = np.random.default_rng(5)
    for c in range(0, m.n_cells, 4):
        ops = element_for(m, c, k, ALPHA)
        coef = rng.standard_normal(n_poly(k))
        dofs = ops.polynomial_dofs(coef)
        # a(q, phi_i) by integration by parts (B_tilde); int q phi_i = int q Pi0 phi_i on P_k
        exact = ops.B_tilde.T @ coef + ALPHA.alpha0 * ops.Pi0.T @ (ops.H @ coef)
        cons = (ops.K_cons + ops.M) @ dofs
        assert np.abs(cons - exact).max() <= 1e-10 * np.abs(exact).max()
        # the stabilization vanishes on polynomials up to the round-off of its own entries
        A = ops.K + ops.M
        assert np.abs(A @ dofs - exact).max() <= 1e-10 * np.abs(A).max() * np.abs(dofs).max()


# far below the finest supported mesh size the alpha2 block swamps the alpha1 part
# that alone separates harmonic polynomials, so G degenerates towards the alpha1 = 0 case
@pytest.mark.parametrize("factor", [0.05, 0.1, 10.0, 1e3])
def test_scaling_invariance(factor):
    m = generate_family("nonconvex-octagon", 0)
    cell = CellData.from_mesh(m, 12)
    for k in (2, 3, 4):
        ops = build_element(cell.scaled(factor), k, ALPHA)
        np.testing.assert_allclose(ops.PiL @ ops.D, np.eye(n_poly(k)), atol=1e-10)
        np.testing.assert_allclose(ops.Pi0 @ ops.D, np.eye(n_poly(k)), atol=1e-10)


@pytest.mark.parametrize("factor", [1e-3, 0.1, 10.0, 1e3])
@pytest.mark.parametrize("stab", STABILIZATIONS)
def test_scaled_cell_with_scaled_coefficients_has_same_matrices(factor, stab):
    # x -> factor x leaves the dofs unchanged and scales Lap Lap by factor^-2 and
    # the mass by factor^2, so rescaled coefficients give identical local matrices
    m = generate_family("nonconvex-octagon", 0)
    cell = CellData.from_mesh(m, 12)
    scaled = ModelCoefficients(ALPHA.alpha0 / factor**2, ALPHA.alpha1, ALPHA.alpha2 * factor**2)
    for k in (2, 3):
        a = build_element(cell, k, ALPHA, stab)
        b = build_element(cell.scaled(factor), k, scaled, stab)
        for name in ("K", "M"):
            A, B = getattr(a, name), getattr(b, name)
            assert np.abs(A - B).max() <= 1e-9 * np.abs(A).max(), name
        ev_a, ev_b = np.linalg.eigvalsh(a.K), np.linalg.eigvalsh(b.K)
        assert (np.abs(ev_a) <= 1e-9 * ev_a[-1]).sum() == (np.abs(ev_b) <= 1e-9 * ev_b[-1]).sum()


def test_pentagon_condensed_matches_full_elimination():
    ops = build_element(CellData.standalone(PENTAGON), 3, ALPHA)
    A = ops.K + ops.M
    b = ops.layout.off_d4
    schur = A[:b, :b] - A[:b, b:] @ np.linalg.solve(A[b:, b:], A[b:, :b])
    ce = ops.condensed
    assert np.abs(ce.A - schur).max() <= 1e-9 * np.abs(schur).max()
    f = np.random.default_rng(2).standard_normal(ops.layout.n_dofs)
    v_b = np.random.default_rng(3).standard_normal(b)
    v_4 = np.linalg.solve(A[b:, b:], f[b:] - A[b:, :b] @ v_b)
    np.testing.assert_allclose(ce.recover_v @ v_b + ce.recover_f @ f, v_4, atol=1e-9 * np.abs(v_4).max())
