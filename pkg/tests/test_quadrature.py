import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import PENTAGON, UNIT_SQUARE, green_integral, single_cell_mesh
from hopf_vem.meshgen import FAMILIES, generate_family
from hopf_vem.quadrature import (
    ScaledMonomialBasis,
    cell_rule,
    edge_rule,
    monomial_eval,
    multi_indices,
    n_poly,
    polygon_rule,
    triangle_rule,
)

SQ = ScaledMonomialBasis(4, np.array([0.5, 0.5]), np.sqrt(2.0))


@pytest.mark.parametrize("k", range(2, 7))
def test_basis_cardinality_and_order(k):
    e = multi_indices(k)
    assert len(e) == n_poly(k) == (k + 1) * (k + 2) // 2
    assert tuple(e[0]) == (0, 0)
    assert [tuple(x) for x in e[:6]] == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    b = ScaledMonomialBasis(k, np.zeros(2), 1.0)
    for i, nu in enumerate(e):
        assert b.index(tuple(nu)) == i


def test_monomials_vanish_at_center():
    v = SQ.values(SQ.center)[0]
    assert v[0] == 1.0 and np.all(v[1:] == 0.0)


def test_laplacian_of_x2_on_unit_square():
    i = SQ.index((2, 0))
    assert monomial_eval(SQ, i, [0.3, 0.9], "laplacian") == pytest.approx(1.0, rel=1e-14)


def test_constant_member_derivatives():
    np.testing.assert_array_equal(monomial_eval(SQ, 0, [0.2, 0.7], "gradient"), [0.0, 0.0])
    assert monomial_eval(SQ, 0, [0.2, 0.7], "laplacian") == 0.0


def test_bilaplacian_of_x4():
    i = SQ.index((4, 0))
    assert monomial_eval(SQ, i, [0.1, 0.4], "bilaplacian") == pytest.approx(24 / SQ.h**4, rel=1e-14)


def test_bilaplacian_vanishes_up_to_cubics():
    x = np.random.default_rng(0).uniform(0, 1, (5, 2))
    assert np.all(SQ.bilaplacians(x)[:, : n_poly(3)] == 0.0)


def test_monomial_eval_rejects_bad_index():
    with pytest.raises(IndexError):
        monomial_eval(SQ, n_poly(4), [0.0, 0.0])


@settings(max_examples=30, deadline=None)
@given(
    x=st.floats(-2, 2),
    y=st.floats(-2, 2),
    cx=st.floats(-1, 1),
    cy=st.floats(-1, 1),
    h=st.floats(0.05, 3.0),
)
def test_derivatives_match_finite_differences(x, y, cx, cy, h):
    b = ScaledMonomialBasis(4, np.array([cx, cy]), h)
    p = np.array([[x, y]])
    d = 1e-5 * h
    ex, ey = np.array([[d, 0.0]]), np.array([[0.0, d]])
    fd_grad = np.stack([(b.values(p + ex) - b.values(p - ex)) / (2 * d),
                        (b.values(p + ey) - b.values(p - ey)) / (2 * d)], axis=-1)
    scale = 1 + np.abs(b.values(p)).max() / h
    np.testing.assert_allclose(b.gradients(p), fd_grad, atol=1e-6 * scale)
    fd_lap = (b.gradients(p + ex)[..., 0] - b.gradients(p - ex)[..., 0]
              + b.gradients(p + ey)[..., 1] - b.gradients(p - ey)[..., 1]) / (2 * d)
    np.testing.assert_allclose(b.laplacians(p), fd_lap, atol=1e-6 * scale / h)
    fd_bil = (b.grad_laplacians(p + ex)[..., 0] - b.grad_laplacians(p - ex)[..., 0]
              + b.grad_laplacians(p + ey)[..., 1] - b.grad_laplacians(p - ey)[..., 1]) / (2 * d)
    np.testing.assert_allclose(b.bilaplacians(p), fd_bil, atol=1e-6 * scale / h**3)


def test_laplacian_matrix_matches_pointwise():
    b = ScaledMonomialBasis(5, np.array([0.2, -0.1]), 0.7)
    x = np.random.default_rng(1).uniform(-1, 1, (4, 2))
    low = ScaledMonomialBasis(3, b.center, b.h).values(x)
    np.testing.assert_allclose(low @ b.laplacian_matrix().T, b.laplacians(x), rtol=1e-12, atol=1e-12)


def test_edge_midpoint_rule():
    r = edge_rule([0, 0], [1, 0], 1)
    assert len(r.weights) == 1
    np.testing.assert_allclose(r.points, [[0.5, 0.0]])
    assert r.weights[0] == 1.0


@pytest.mark.parametrize("p, degree, tol", [(2, 2, 1e-15), (7, 7, 1e-14)])
def test_edge_rule_exactness(p, degree, tol):
    r = edge_rule([0, 0], [1, 0], degree)
    assert r.integrate(r.points[:, 0] ** p) == pytest.approx(1 / (p + 1), abs=tol)


@settings(max_examples=30, deadline=None)
@given(
    p0=st.tuples(st.floats(-3, 3), st.floats(-3, 3)),
    d=st.tuples(st.floats(0.1, 2), st.floats(-2, 2)),
    degree=st.integers(0, 14),
)
def test_edge_weights_sum_to_length(p0, d, degree):
    p1 = np.add(p0, d)
    r = edge_rule(p0, p1, degree)
    assert np.all(r.weights > 0)
    assert r.weights.sum() == pytest.approx(np.hypot(*d), rel=1e-13)


def test_cell_rule_unit_square_values():
    m = single_cell_mesh(UNIT_SQUARE)
    r = cell_rule(m, 0, 4)
    x, y = r.points.T
    assert r.integrate(np.ones_like(x)) == pytest.approx(1.0, rel=1e-14)
    assert r.integrate((x - 0.5) ** 2) == pytest.approx(1 / 12, rel=1e-14)
    mv = SQ.values(r.points)
    assert r.integrate(mv[:, SQ.index((2, 0))] * mv[:, SQ.index((0, 2))]) == pytest.approx(1 / 576, rel=1e-13)


@pytest.mark.parametrize("degree", [0, 3, 8, 13])
def test_triangle_rule_positive_and_exact(degree):
    tri = np.array([[0.1, 0.2], [1.3, 0.0], [0.4, 0.9]])
    r = triangle_rule(tri, degree)
    assert np.all(r.weights > 0)
    x, y = r.points.T
    for a in range(degree + 1):
        b = degree - a
        assert r.integrate(x**a * y**b) == pytest.approx(green_integral(tri, a, b), rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("k", [2, 3, 4])
def test_cell_rule_matches_green_oracle(family, k):
    """|nu| + |mu| <= 2k products of scaled monomials against boundary integration."""
    m = generate_family(family, 0)
    for c in range(0, m.n_cells, 4):
        pts = m.vertices[m.cells[c]]
        r = cell_rule(m, c, 2 * k)
        assert r.weights.sum() == pytest.approx(m.areas[c], rel=1e-13)
        xc, h = m.centroids[c], m.diameters[c]
        # integrate m_nu m_mu = ((x - xc)/h)^(a) ((y - yc)/h)^(b), shifting so the oracle sees pure powers
        shifted = (pts - xc) / h
        X, Y = ((r.points - xc) / h).T
        for a in range(2 * k + 1):
            for b in range(2 * k + 1 - a):
                exact = green_integral(shifted, a, b) * h**2
                got = r.integrate(X**a * Y**b)
                assert got == pytest.approx(exact, rel=1e-11, abs=1e-14 * m.areas[c])


def test_fan_point_choice_does_not_change_integrals():
    m = generate_family("remapped-quad", 1)
    for c in (0, 37, 99):
        pts = m.vertices[m.cells[c]]
        a = polygon_rule(pts, 6, m.centroids[c])
        b = polygon_rule(pts, 6, pts.mean(0))
        for f in (lambda x, y: x**3 * y**3, lambda x, y: np.ones_like(x), lambda x, y: (x - y) ** 5):
            assert a.integrate(f(*a.points.T)) == pytest.approx(b.integrate(f(*b.points.T)), rel=1e-12, abs=1e-16)


def test_pentagon_rule_exact():
    r = polygon_rule(np.array(PENTAGON), 6)
    x, y = r.points.T
    assert r.integrate(x**2 * y**4) == pytest.approx(green_integral(PENTAGON, 2, 4), rel=1e-13)
