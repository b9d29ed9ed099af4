"""Local C1 virtual element: degrees of freedom, projectors and local matrices.

Local degrees of freedom of a cell with n vertices/edges, in order:

* D1  3 per vertex: v(x_V), h_V dv/dx(x_V), h_V dv/dy(x_V)
* D2  (k-3)+ per edge: (1/h_E) int_E q v ds,      q = xi^0 .. xi^(k-4)
* D3  (k-2) per edge:  int_E q dv/dn_P ds,        q = xi^0 .. xi^(k-3)
* D4  (k-1)k/2:        (1/|P|) int_P m v dx,      m scaled monomials of degree <= k-2

``xi = (x - x_E) . t_E / h_E`` in [-1/2, 1/2] always follows the global edge
orientation, so edge moments agree between the two cells sharing an edge;
only the D3 values differ by the sign of n_E . n_P.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as sla
from numpy.polynomial import Polynomial

from .mesh import CellGeometry, PolyMesh, polygon_geometry
from .quadrature import ScaledMonomialBasis, gauss_legendre, n_poly, polygon_rule

COND_LIMIT = 1e14
STABILIZATIONS = ("energy", "trace")
DIAG_FLOOR = 1e-3
REFINEMENT_STEPS = 3


class ElementError(ArithmeticError):
    """Numerical breakdown while building a local element."""


def _projector_solve(A: np.ndarray, R: np.ndarray) -> np.ndarray:
    """Solve A X = R with residuals in extended precision (A, R given as longdouble)."""
    Af = A.astype(float)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu = sla.lu_factor(Af)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise ElementError(f"projector system is singular: {exc}") from exc
    piv = np.abs(np.diag(lu[0]))
    if not np.all(np.isfinite(lu[0])) or piv.min() <= np.finfo(float).eps * piv.max():
        raise ElementError("projector system is singular")
    X = sla.lu_solve(lu, R.astype(float)).astype(np.longdouble)
    for _ in range(REFINEMENT_STEPS):
        X += sla.lu_solve(lu, (R - A @ X).astype(float))
    return X.astype(float)


@dataclass(frozen=True)
class ModelCoefficients:
    """alpha2 Lap^2 u - alpha1 Lap u + alpha0 u = f."""

    alpha0: float = 1.0
    alpha1: float = 1.0
    alpha2: float = 1.0

    def __post_init__(self):
        if not self.alpha2 > 0:
            raise ValueError(f"alpha2 must be > 0, got {self.alpha2}")
        if not self.alpha1 > 0:
            raise ValueError(f"alpha1 must be > 0 (the elliptic projector only fixes constants), got {self.alpha1}")
        if not self.alpha0 >= 0:
            raise ValueError(f"alpha0 must be >= 0, got {self.alpha0}")

    @classmethod
    def parse(cls, text: str) -> "ModelCoefficients":
        """Parse ``"a0,a1,a2"``."""
        parts = [float(p) for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected three comma-separated coefficients, got {text!r}")
        return cls(*parts)


@dataclass(frozen=True)
class DofLayout:
    k: int
    n_vertices: int

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"polynomial degree k must be >= 2, got {self.k}")

    @property
    def n_edges(self) -> int:
        return self.n_vertices

    @property
    def r0(self) -> int:
        return max(3, self.k)

    @property
    def r1(self) -> int:
        return self.k - 1

    @property
    def n_d2(self) -> int:
        return max(self.k - 3, 0)

    @property
    def n_d3(self) -> int:
        return self.k - 2

    @property
    def n_d4(self) -> int:
        return (self.k - 1) * self.k // 2

    @property
    def off_d2(self) -> int:
        return 3 * self.n_vertices

    @property
    def off_d3(self) -> int:
        return self.off_d2 + self.n_d2 * self.n_edges

    @property
    def off_d4(self) -> int:
        return self.off_d3 + self.n_d3 * self.n_edges

    @property
    def n_dofs(self) -> int:
        return self.off_d4 + self.n_d4

    def d1(self, j: int) -> np.ndarray:
        return np.arange(3 * j, 3 * j + 3)

    def d2(self, j: int) -> np.ndarray:
        return self.off_d2 + j * self.n_d2 + np.arange(self.n_d2)

    def d3(self, j: int) -> np.ndarray:
        return self.off_d3 + j * self.n_d3 + np.arange(self.n_d3)

    def d4(self) -> np.ndarray:
        return self.off_d4 + np.arange(self.n_d4)


def dof_layout(n_vertices: int, k: int) -> DofLayout:
    return DofLayout(k, n_vertices)


@dataclass(frozen=True)
class CellData:
    """Everything the local element needs to know about one cell."""

    vertices: np.ndarray
    vertex_h: np.ndarray
    edge_flip: np.ndarray
    fan_point: np.ndarray | None = None
    cell_id: int = -1

    @classmethod
    def from_mesh(cls, mesh: PolyMesh, cell: int) -> "CellData":
        loop = mesh.cells[cell]
        return cls(
            vertices=mesh.vertices[loop],
            vertex_h=mesh.vertex_h[loop],
            edge_flip=np.asarray(mesh.cell_edge_flip[cell]),
            fan_point=mesh.fan_point(cell),
            cell_id=cell,
        )

    @classmethod
    def standalone(cls, vertices, fan_point=None) -> "CellData":
        """Isolated polygon: h_V = h_P, every edge oriented along the ccw traversal."""
        pts = np.asarray(vertices, dtype=float)
        geo = polygon_geometry(pts)
        n = len(pts)
        return cls(pts, np.full(n, geo.diameter), np.zeros(n, dtype=bool), fan_point)

    def scaled(self, factor: float) -> "CellData":
        fp = None if self.fan_point is None else self.fan_point * factor
        return CellData(self.vertices * factor, self.vertex_h * factor, self.edge_flip, fp, self.cell_id)


@dataclass(frozen=True)
class EdgeTrace:
    """Reconstructed traces on one edge, in arc length s from the global first vertex."""

    trace: Polynomial
    normal_derivative: Polynomial  # along the cell-outward normal


@dataclass(frozen=True)
class CondensedElement:
    """Boundary-dof system of a cell; interior moments follow from
    v_4 = recover_v v_b + recover_f f_loc."""

    A: np.ndarray
    load_map: np.ndarray  # local load -> condensed load
    recover_v: np.ndarray
    recover_f: np.ndarray


class ElementOperators:
    """Projector and local matrices of one cell.

    Attribute names follow the usual VEM matrix notation: ``D`` (dofs of
    monomials), ``G``/``B`` (elliptic projector system), ``H``/``C``
    (L2 projector system), ``PiL`` and ``Pi0`` (projection coefficients).
    """

    def __init__(self, cell: CellData, k: int, coeffs: ModelCoefficients, stabilization: str = "energy"):
        if stabilization not in STABILIZATIONS:
            raise ValueError(f"unknown stabilization {stabilization!r}; choose from {STABILIZATIONS}")
        self.stabilization = stabilization
        self.cell = cell
        self.k = k
        self.coeffs = coeffs
        self.layout = DofLayout(k, len(cell.vertices))
        self.geometry: CellGeometry = polygon_geometry(cell.vertices)
        geo = self.geometry
        self.basis = ScaledMonomialBasis(k, geo.centroid, geo.diameter)
        self.rule = polygon_rule(cell.vertices, 2 * k, cell.fan_point if cell.fan_point is not None else geo.centroid)
        self._edges = [self._edge_frame(j) for j in range(self.layout.n_edges)]
        self._build()

    # -- edge reconstruction -------------------------------------------------

    def _edge_frame(self, j: int) -> dict:
        L = self.layout
        n = L.n_vertices
        flip = bool(self.cell.edge_flip[j])
        a, b = (j, (j + 1) % n) if not flip else ((j + 1) % n, j)
        xa, xb = self.cell.vertices[a], self.cell.vertices[b]
        hE = float(np.hypot(*(xb - xa)))
        t = (xb - xa) / hE
        nE = np.array([t[1], -t[0]])
        sigma = -1.0 if flip else 1.0
        N = L.n_dofs
        r0, r1 = L.r0, L.r1
        p0 = np.arange(r0 + 1)
        p1 = np.arange(r1 + 1)
        ends = np.array([-0.5, 0.5])
        mom = lambda p, q: (0.5 ** (p + q + 1) - (-0.5) ** (p + q + 1)) / (p + q + 1)  # noqa: E731

        A0 = np.zeros((r0 + 1, r0 + 1))
        R0 = np.zeros((r0 + 1, N))
        A0[0:2] = ends[:, None] ** p0
        A0[2:4] = p0 * ends[:, None] ** np.maximum(p0 - 1, 0)
        for row, v in ((0, a), (1, b)):
            R0[row, 3 * v] = 1.0
        for row, v in ((2, a), (3, b)):
            R0[row, 3 * v + 1 : 3 * v + 3] = hE / self.cell.vertex_h[v] * t
        for q, dof in enumerate(L.d2(j)):
            A0[4 + q] = mom(p0, q)
            R0[4 + q, dof] = 1.0

        A1 = np.zeros((r1 + 1, r1 + 1))
        R1 = np.zeros((r1 + 1, N))
        A1[0:2] = ends[:, None] ** p1
        for row, v in ((0, a), (1, b)):
            R1[row, 3 * v + 1 : 3 * v + 3] = nE / self.cell.vertex_h[v]
        for q, dof in enumerate(L.d3(j)):
            A1[2 + q] = mom(p1, q)
            R1[2 + q, dof] = sigma / hE

        T0 = np.linalg.solve(A0, R0)
        T1 = sigma * np.linalg.solve(A1, R1)  # outward normal derivative
        xi, w = gauss_legendre(2 * self.k + 2)
        xE = 0.5 * (xa + xb)
        return dict(
            a=a, b=b, hE=hE, t=t, nE=nE, nP=sigma * nE, sigma=sigma, xE=xE,
            T0=T0, T1=T1, xi=xi, w=w, pts=xE + xi[:, None] * hE * t,
            V0=xi[:, None] ** p0, V1=xi[:, None] ** p1,
        )

    def edge_trace_polys(self, dofs, j: int) -> EdgeTrace:
        """Trace and outward normal derivative on local edge ``j`` for a local dof vector."""
        e = self._edges[j]
        dofs = np.asarray(dofs, dtype=float)
        s_to_xi = Polynomial([-0.5, 1.0 / e["hE"]])
        return EdgeTrace(Polynomial(e["T0"] @ dofs)(s_to_xi), Polynomial(e["T1"] @ dofs)(s_to_xi))

    # -- matrices --------------------------------------------------------------

    def _build(self):
        L, geo, basis, k = self.layout, self.geometry, self.basis, self.k
        a0, a1, a2 = self.coeffs.alpha0, self.coeffs.alpha1, self.coeffs.alpha2
        nk, N = basis.size, L.n_dofs
        n4 = L.n_d4
        area = geo.area

        qp, qw = self.rule.points, self.rule.weights
        mv = basis.values(qp)
        mg = basis.gradients(qp)
        ml = basis.laplacians(qp)
        self.H = (mv * qw[:, None]).T @ mv
        self.G2 = (ml * qw[:, None]).T @ ml
        self.G1 = np.einsum("q,qad,qbd->ab", qw, mg, mg)
        self.G_tilde = a2 * self.G2 + a1 * self.G1

        D = np.zeros((N, nk))
        verts = self.cell.vertices
        vv = basis.values(verts)
        vg = basis.gradients(verts)
        for j in range(L.n_vertices):
            r = L.d1(j)
            D[r[0]] = vv[j]
            D[r[1]] = self.cell.vertex_h[j] * vg[j, :, 0]
            D[r[2]] = self.cell.vertex_h[j] * vg[j, :, 1]

        Bt = np.zeros((nk, N))
        g0 = np.zeros(nk)
        b0 = np.zeros(N)
        perimeter = 0.0
        for j, e in enumerate(self._edges):
            W = e["hE"] * e["w"]
            perimeter += e["hE"]
            m_e = basis.values(e["pts"])
            dn_m = basis.gradients(e["pts"]) @ e["nP"]
            dn_lap = basis.grad_laplacians(e["pts"]) @ e["nP"]
            lap_e = basis.laplacians(e["pts"])
            Phi = e["V0"] @ e["T0"]
            Psi = e["V1"] @ e["T1"]
            Bt += ((a1 * dn_m - a2 * dn_lap) * W[:, None]).T @ Phi
            Bt += (a2 * lap_e * W[:, None]).T @ Psi
            g0 += W @ m_e
            b0 += W @ Phi
            for q, row in enumerate(L.d2(j)):
                D[row] = (e["w"] * e["xi"] ** q) @ m_e
            for q, row in enumerate(L.d3(j)):
                D[row] = e["hE"] * (e["w"] * e["xi"] ** q) @ dn_m
        D[L.d4()] = self.H[:n4] / area

        lap_k = basis.laplacian_matrix()
        bil = np.zeros((nk, n4))
        if k >= 4:
            lap_km2 = ScaledMonomialBasis(k - 2, basis.center, basis.h).laplacian_matrix()
            bil = lap_k @ np.pad(lap_km2, ((0, 0), (0, n4 - lap_km2.shape[1])))
        Lcoef = a2 * bil - a1 * lap_k
        Bt[:, L.d4()] += area * Lcoef

        self.D = D
        self.B_tilde = Bt
        self.G0 = np.zeros((nk, nk))
        self.G0[0] = g0 / perimeter
        self.B0 = np.zeros((nk, N))
        self.B0[0] = b0 / perimeter
        self.G = self.G_tilde + self.G0
        self.B = Bt + self.B0

        if np.linalg.cond(self.G) > COND_LIMIT:
            raise ElementError(f"cell {self.cell.cell_id}: elliptic projector matrix G is ill-conditioned")
        # G = B D and H = C D hold exactly; solving with the products (formed and
        # refined in extended precision) keeps Pi D = I to near machine precision
        # even though G and H are badly conditioned in the monomial basis for k >= 4.
        ld = np.longdouble
        B_ld, D_ld = self.B.astype(ld), D.astype(ld)
        self.PiL = _projector_solve(B_ld @ D_ld, B_ld)

        C = np.zeros((nk, N))
        C[np.arange(n4), L.d4()] = area
        C[n4:] = self.H[n4:] @ self.PiL
        self.C = C
        if np.any(np.linalg.eigvalsh(self.H) <= 0):
            raise ElementError(f"cell {self.cell.cell_id}: monomial Gram matrix H is not SPD")
        C_ld = C.astype(ld)
        C_ld[n4:] = self.H[n4:].astype(ld) @ self.PiL.astype(ld)
        self.Pi0 = _projector_solve(C_ld @ D_ld, C_ld)

    # -- local system ------------------------------------------------------------

    @cached_property
    def K_cons(self) -> np.ndarray:
        K = self.PiL.T @ self.G_tilde @ self.PiL
        return 0.5 * (K + K.T)

    @cached_property
    def stab_scale(self) -> float:
        return float(np.trace(self.K_cons)) / self.layout.n_dofs

    @cached_property
    def S(self) -> np.ndarray:
        """Stabilization matrix acting on dof vectors of (I - Pi^L) v.

        ``trace``: stab_scale times the identity. ``energy``: diagonal of
        K_cons on the boundary dofs (floored at DIAG_FLOOR * stab_scale) and,
        on the interior moments, the energy of the cheapest polynomial
        bubble carrying those moments.
        """
        N = self.layout.n_dofs
        if self.stabilization == "trace":
            return self.stab_scale * np.eye(N)
        S = np.diag(np.maximum(np.diag(self.K_cons), DIAG_FLOOR * self.stab_scale))
        d4 = self.layout.d4()
        S[np.ix_(d4, d4)] = self.bubble_energy
        return S

    @cached_property
    def bubble_energy(self) -> np.ndarray:
        """(M E^-1 M^T)^-1 over bubbles b m_c, b = prod_E l_E^2, |c| <= k-2.

        E is the energy Gram matrix of the bubbles and M their interior
        moments, so the quadratic form gives the least energy of a bubble
        in that space with prescribed D4 values.
        """
        k, geo = self.k, self.geometry
        pts = self.cell.vertices
        n = len(pts)
        a0, a1, a2 = self.coeffs.alpha0, self.coeffs.alpha1, self.coeffs.alpha2
        fp = self.cell.fan_point if self.cell.fan_point is not None else geo.centroid
        rule = polygon_rule(pts, 2 * (2 * n + k), fp)
        x, w = rule.points, rule.weights
        # P = prod of edge lines, with gradient and Laplacian by the product rule
        P = np.ones(len(x))
        gP = np.zeros((len(x), 2))
        lP = np.zeros(len(x))
        for j in range(n):
            t = pts[(j + 1) % n] - pts[j]
            nrm = np.array([t[1], -t[0]]) / (np.hypot(*t) * geo.diameter)
            line = (x - pts[j]) @ nrm
            lP = lP * line + 2 * gP @ nrm
            gP = gP * line[:, None] + P[:, None] * nrm
            P = P * line
        B = P**2
        gB = 2 * P[:, None] * gP
        lB = 2 * (gP**2).sum(1) + 2 * P * lP
        basis = ScaledMonomialBasis(k - 2, geo.centroid, geo.diameter)
        mv, mg, ml = basis.values(x), basis.gradients(x), basis.laplacians(x)
        val = B[:, None] * mv
        grad = mv[:, :, None] * gB[:, None, :] + B[:, None, None] * mg
        lap = mv * lB[:, None] + 2 * np.einsum("qd,qnd->qn", gB, mg) + B[:, None] * ml
        E = a2 * (lap * w[:, None]).T @ lap + a1 * np.einsum("q,qad,qbd->ab", w, grad, grad)
        E += a0 * (val * w[:, None]).T @ val
        M = (mv * w[:, None]).T @ val / geo.area
        try:
            cf = sla.cho_factor(E)
        except np.linalg.LinAlgError as exc:
            raise ElementError(f"cell {self.cell.cell_id}: bubble energy matrix is not SPD") from exc
        Sb = np.linalg.inv(M @ sla.cho_solve(cf, M.T))
        return 0.5 * (Sb + Sb.T)

    @cached_property
    def _defect(self) -> np.ndarray:
        """I - D Pi^L, which maps a dof vector to the dofs of its non-polynomial part."""
        return np.eye(self.layout.n_dofs) - self.D @ self.PiL

    def _clean(self, K: np.ndarray) -> np.ndarray:
        # a stabilization satisfies K D = 0 exactly, so K = Z K Z with Z the orthogonal
        # projector off range(D); applying Z removes the round-off that a large S
        # (k >= 4) amplifies along the polynomial directions
        Q, _ = np.linalg.qr(self.D)
        K = K - (K @ Q) @ Q.T
        K = K - Q @ (Q.T @ K)
        return 0.5 * (K + K.T)

    @cached_property
    def K_stab(self) -> np.ndarray:
        P = self._defect
        return self._clean(P.T @ self.S @ P)

    @cached_property
    def condensed(self) -> "CondensedElement":
        """Local system with the interior moments eliminated.

        S is block diagonal between boundary dofs and the interior block S44,
        which is orders of magnitude stiffer. Writing the interior unknowns as
        z = (I - D Pi^L)_4 v decouples S44 from the boundary dofs, so the
        elimination never subtracts two quantities of the size of S44.
        """
        L = self.layout
        No, N = L.off_d4, L.n_dofs
        o, i = slice(0, No), slice(No, N)
        P = self._defect
        R = self.K_cons + self._clean(P[o].T @ self.S[o, o] @ P[o]) + self.M
        P4i_inv = np.linalg.inv(P[i, i])
        To = np.vstack([np.eye(No), -P4i_inv @ P[i, o]])
        Tz = np.vstack([np.zeros((No, L.n_d4)), P4i_inv])
        A_oo = To.T @ R @ To
        A_zo = Tz.T @ R @ To
        A_zz = Tz.T @ R @ Tz + self.S[i, i]
        try:
            cf = sla.cho_factor(0.5 * (A_zz + A_zz.T))
        except np.linalg.LinAlgError as exc:
            raise ElementError(f"cell {self.cell.cell_id}: interior block is not SPD") from exc
        X = sla.cho_solve(cf, A_zo)
        A = A_oo - A_zo.T @ X
        return CondensedElement(
            A=0.5 * (A + A.T),
            load_map=To.T - X.T @ Tz.T,
            recover_v=-P4i_inv @ (X + P[i, o]),
            recover_f=P4i_inv @ sla.cho_solve(cf, Tz.T),
        )

    @cached_property
    def K(self) -> np.ndarray:
        return self.K_cons + self.K_stab

    @cached_property
    def M(self) -> np.ndarray:
        M = self.coeffs.alpha0 * (self.Pi0.T @ self.H @ self.Pi0)
        return 0.5 * (M + M.T)

    def load(self, f, degree: int | None = None) -> np.ndarray:
        """F_P = (int_P f m^T) Pi0 with an analytic load ``f(x, y)``."""
        rule = self.load_rule(degree)
        fm = rule.weights * f(rule.points[:, 0], rule.points[:, 1])
        return (fm @ self.basis.values(rule.points)) @ self.Pi0

    def load_rule(self, degree: int | None = None):
        deg = 2 * self.k + 3 if degree is None else degree
        fp = self.cell.fan_point if self.cell.fan_point is not None else self.geometry.centroid
        return polygon_rule(self.cell.vertices, deg, fp)

    def polynomial_dofs(self, coef) -> np.ndarray:
        """Local dof vector of the polynomial sum_l coef[l] m_l."""
        return self.D @ np.asarray(coef)

    def constant_dofs(self) -> np.ndarray:
        return self.D[:, 0].copy()


def build_element(
    cell: CellData, k: int, coeffs: ModelCoefficients | None = None, stabilization: str = "energy"
) -> ElementOperators:
    return ElementOperators(cell, k, coeffs or ModelCoefficients(), stabilization)


def matrix_D(cell: CellData, k: int) -> np.ndarray:
    return build_element(cell, k).D


def elliptic_projector(cell: CellData, k: int, coeffs: ModelCoefficients):
    ops = build_element(cell, k, coeffs)
    return ops.G, ops.B, ops.PiL


def l2_projector(cell: CellData, k: int, coeffs: ModelCoefficients | None = None):
    ops = build_element(cell, k, coeffs)
    return ops.H, ops.C, ops.Pi0


def local_stiffness(ops: ElementOperators) -> np.ndarray:
    return ops.K


def local_mass(ops: ElementOperators) -> np.ndarray:
    return ops.M


def local_load(ops: ElementOperators, f) -> np.ndarray:
    return ops.load(f)


def interpolate(ops: ElementOperators, u, grad, edge_degree: int | None = None) -> np.ndarray:
    """Local dof vector of a smooth function given ``u(x, y)`` and ``grad(x, y) -> (gx, gy)``."""
    L, cell = ops.layout, ops.cell
    out = np.zeros(L.n_dofs)
    x, y = cell.vertices[:, 0], cell.vertices[:, 1]
    gx, gy = grad(x, y)
    for j in range(L.n_vertices):
        r = L.d1(j)
        out[r[0]] = u(x[j], y[j])
        out[r[1]] = cell.vertex_h[j] * gx[j]
        out[r[2]] = cell.vertex_h[j] * gy[j]
    xi, w = gauss_legendre(edge_degree or 4 * ops.k + 8)
    for j, e in enumerate(ops._edges):
        pts = e["xE"] + xi[:, None] * e["hE"] * e["t"]
        uv = u(pts[:, 0], pts[:, 1])
        g = np.column_stack(grad(pts[:, 0], pts[:, 1]))
        dn = g @ e["nP"]
        for q, row in enumerate(L.d2(j)):
            out[row] = (w * xi**q) @ uv
        for q, row in enumerate(L.d3(j)):
            out[row] = e["hE"] * (w * xi**q) @ dn
    rule = ops.load_rule(4 * ops.k + 8)
    mb = ops.basis.values(rule.points)[:, : L.n_d4]
    out[L.d4()] = (rule.weights * u(rule.points[:, 0], rule.points[:, 1])) @ mb / ops.geometry.area
    return out


def element_for(
    mesh: PolyMesh, cell: int, k: int, coeffs: ModelCoefficients | None = None, stabilization: str = "energy"
) -> ElementOperators:
    return build_element(CellData.from_mesh(mesh, cell), k, coeffs, stabilization)


__all__ = [
    "CellData",
    "DofLayout",
    "EdgeTrace",
    "ElementError",
    "ElementOperators",
    "ModelCoefficients",
    "build_element",
    "dof_layout",
    "elliptic_projector",
    "element_for",
    "interpolate",
    "l2_projector",
    "local_load",
    "local_mass",
    "local_stiffness",
    "matrix_D",
    "n_poly",
]
