"""Global dof numbering, sparse assembly and clamped boundary conditions.

Global numbering is vertices first (3 per vertex), then edges ((k-3)+ trace
moments followed by (k-2) normal moments per edge), then cells. Normal
moments are stored with respect to the global edge normal, which is the
edge tangent (lower vertex index to higher) rotated by -90 degrees.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .element import CellData, ElementError, ElementOperators, ModelCoefficients, build_element
from .mesh import PolyMesh
from .quadrature import ScaledMonomialBasis, cell_rule, gauss_legendre

FD_STEP = 1e-3
CORNER_TOL = 1e-8


class DirichletError(ValueError):
    """Boundary data cannot determine the constrained dofs."""


@dataclass(frozen=True)
class GlobalDofMap:
    k: int
    n_vertices: int
    n_edges: int
    n_cells: int
    cell_dofs: list[np.ndarray]
    cell_signs: list[np.ndarray]

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
    def edge_offset(self) -> int:
        return 3 * self.n_vertices

    @property
    def cell_offset(self) -> int:
        return self.edge_offset + (self.n_d2 + self.n_d3) * self.n_edges

    @property
    def n_dofs(self) -> int:
        return self.cell_offset + self.n_d4 * self.n_cells

    def vertex_dofs(self, v: int) -> np.ndarray:
        return 3 * v + np.arange(3)

    def edge_trace_dofs(self, e: int) -> np.ndarray:
        return self.edge_offset + e * (self.n_d2 + self.n_d3) + np.arange(self.n_d2)

    def edge_normal_dofs(self, e: int) -> np.ndarray:
        return self.edge_offset + e * (self.n_d2 + self.n_d3) + self.n_d2 + np.arange(self.n_d3)

    def cell_interior_dofs(self, c: int) -> np.ndarray:
        return self.cell_offset + c * self.n_d4 + np.arange(self.n_d4)


def count_dofs(n_vertices: int, n_edges: int, n_cells: int, k: int) -> int:
    """Closed-form global dimension."""
    return 3 * n_vertices + (max(k - 3, 0) + (k - 2)) * n_edges + (k - 1) * k // 2 * n_cells


def number_dofs(mesh: PolyMesh, k: int) -> GlobalDofMap:
    if k < 2:
        raise ValueError(f"polynomial degree must be >= 2, got {k}")
    nV, nF, nR = mesh.counts[2], mesh.counts[1], mesh.counts[0]
    n2, n3, n4 = max(k - 3, 0), k - 2, (k - 1) * k // 2
    eoff = 3 * nV
    coff = eoff + (n2 + n3) * nF
    dofs, signs = [], []
    for c, loop in enumerate(mesh.cells):
        loop = np.asarray(loop)
        edges = np.asarray(mesh.cell_edges[c])
        flip = np.asarray(mesh.cell_edge_flip[c], dtype=bool)
        d1 = (3 * loop[:, None] + np.arange(3)).ravel()
        base = eoff + edges[:, None] * (n2 + n3)
        d2 = (base + np.arange(n2)).ravel()
        d3 = (base + n2 + np.arange(n3)).ravel()
        s3 = np.repeat(np.where(flip, -1.0, 1.0), n3)
        d4 = coff + c * n4 + np.arange(n4)
        dofs.append(np.concatenate([d1, d2, d3, d4]).astype(np.int64))
        signs.append(np.concatenate([np.ones(len(d1) + len(d2)), s3, np.ones(n4)]))
    return GlobalDofMap(k, nV, nF, nR, dofs, signs)


@dataclass
class LinearSystem:
    """A u = F with A = K + M in CSR form; optional Dirichlet data."""

    A: sp.csr_matrix
    F: np.ndarray
    dofmap: GlobalDofMap | None = None
    fixed: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    fixed_values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def n(self) -> int:
        return self.A.shape[0]


@dataclass
class ReducedSystem:
    """Free-dof block after eliminating constrained rows and columns."""

    A: sp.csr_matrix
    F: np.ndarray
    free: np.ndarray
    fixed: np.ndarray
    fixed_values: np.ndarray
    n_full: int

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def expand(self, u_free: np.ndarray) -> np.ndarray:
        u = np.zeros(self.n_full)
        u[self.free] = u_free
        u[self.fixed] = self.fixed_values
        return u


def build_elements(
    mesh: PolyMesh, k: int, coeffs: ModelCoefficients, threads: int = 1, stabilization: str = "energy"
) -> list[ElementOperators]:
    """Local operators for every cell, in cell order."""

    def one(c):
        try:
            ops = build_element(CellData.from_mesh(mesh, c), k, coeffs, stabilization)
            ops.K, ops.M  # noqa: B018  force the local matrices inside the worker
            return ops
        except (ElementError, np.linalg.LinAlgError) as exc:
            raise ElementError(f"cell {c}: {exc}") from exc

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(one, range(mesh.n_cells)))
    return [one(c) for c in range(mesh.n_cells)]


def merge_triplets(rows, cols, vals, n: int) -> sp.csr_matrix:
    """Sum duplicate entries in a fixed (row, col, insertion) order."""
    order = np.lexsort((cols, rows))
    r, c, v = rows[order], cols[order], vals[order]
    if len(r) == 0:
        return sp.csr_matrix((n, n))
    start = np.flatnonzero(np.r_[True, (np.diff(r) != 0) | (np.diff(c) != 0)])
    data = np.add.reduceat(v, start)
    return sp.csr_matrix((data, (r[start], c[start])), shape=(n, n))


def assemble(
    mesh: PolyMesh,
    k: int,
    coeffs: ModelCoefficients | None = None,
    f: Callable | None = None,
    elements: Sequence[ElementOperators] | None = None,
    threads: int = 1,
    load_degree: int | None = None,
    stabilization: str = "energy",
) -> LinearSystem:
    """Global K + M and load vector F."""
    coeffs = coeffs or ModelCoefficients()
    dm = number_dofs(mesh, k)
    if elements is None:
        elements = build_elements(mesh, k, coeffs, threads, stabilization)
    rows, cols, vals = [], [], []
    F = np.zeros(dm.n_dofs)
    for c, ops in enumerate(elements):
        g, s = dm.cell_dofs[c], dm.cell_signs[c]
        A_loc = (ops.K + ops.M) * np.outer(s, s)
        rows.append(np.repeat(g, len(g)))
        cols.append(np.tile(g, len(g)))
        vals.append(A_loc.ravel())
        if f is not None:
            np.add.at(F, g, s * ops.load(f, load_degree))
    A = merge_triplets(np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), dm.n_dofs)
    return LinearSystem(A, F, dm)


@dataclass
class CondensedSystem(LinearSystem):
    """Skeleton system with the cell-interior moments eliminated cell by cell.

    ``A`` and ``F`` act on the vertex and edge dofs only; ``recover`` rebuilds
    the interior moments from a skeleton solution.
    """

    recovery: list = field(default_factory=list, repr=False)

    def recover(self, u_skeleton: np.ndarray) -> np.ndarray:
        dm = self.dofmap
        n = dm.cell_offset
        u = np.zeros(dm.n_dofs)
        u[:n] = u_skeleton
        for c, (Y, y) in enumerate(self.recovery):
            g, s = dm.cell_dofs[c], dm.cell_signs[c]
            # interior dofs carry sign +1
            u[g[g >= n]] = y + Y @ (s[g < n] * u_skeleton[g[g < n]])
        return u


def assemble_condensed(
    mesh: PolyMesh,
    k: int,
    coeffs: ModelCoefficients | None = None,
    f: Callable | None = None,
    elements: Sequence[ElementOperators] | None = None,
    threads: int = 1,
    load_degree: int | None = None,
    stabilization: str = "energy",
) -> CondensedSystem:
    """Assemble with the interior moments condensed out (they couple within one cell only).

    Removes the stiff per-cell interior blocks from the global matrix, which
    keeps the skeleton system far better conditioned for k >= 4.
    """
    coeffs = coeffs or ModelCoefficients()
    dm = number_dofs(mesh, k)
    if elements is None:
        elements = build_elements(mesh, k, coeffs, threads, stabilization)
    n = dm.cell_offset
    rows, cols, vals, recovery = [], [], [], []
    F = np.zeros(n)
    for c, ops in enumerate(elements):
        g, s = dm.cell_dofs[c], dm.cell_signs[c]
        ce = ops.condensed
        outer = g < n
        go, so = g[outer], s[outer]
        rows.append(np.repeat(go, len(go)))
        cols.append(np.tile(go, len(go)))
        vals.append((ce.A * np.outer(so, so)).ravel())
        f_loc = ops.load(f, load_degree) if f is not None else np.zeros(len(g))
        np.add.at(F, go, so * (ce.load_map @ f_loc))
        recovery.append((ce.recover_v, ce.recover_f @ f_loc))
    A = merge_triplets(np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), n)
    return CondensedSystem(A, F, dm, recovery=recovery)


def _edge_points(mesh: PolyMesh, e: int, xi: np.ndarray):
    a, b = mesh.vertices[mesh.edges[e]]
    hE = float(np.hypot(*(b - a)))
    t = (b - a) / hE
    return 0.5 * (a + b) + xi[:, None] * (b - a), hE, t, np.array([t[1], -t[0]])


def interpolate_global(mesh: PolyMesh, k: int, u: Callable, grad: Callable, degree: int | None = None) -> np.ndarray:
    """Global dof vector of a smooth function with gradient ``grad(x, y) -> (gx, gy)``."""
    dm = number_dofs(mesh, k)
    out = np.zeros(dm.n_dofs)
    x, y = mesh.vertices[:, 0], mesh.vertices[:, 1]
    gx, gy = grad(x, y)
    out[0 : 3 * dm.n_vertices : 3] = u(x, y)
    out[1 : 3 * dm.n_vertices : 3] = mesh.vertex_h * gx
    out[2 : 3 * dm.n_vertices : 3] = mesh.vertex_h * gy
    deg = degree or 4 * k + 8
    xi, w = gauss_legendre(deg)
    for e in range(dm.n_edges):
        pts, hE, _, nE = _edge_points(mesh, e, xi)
        uv = u(pts[:, 0], pts[:, 1])
        dn = np.column_stack(grad(pts[:, 0], pts[:, 1])) @ nE
        for q, i in enumerate(dm.edge_trace_dofs(e)):
            out[i] = (w * xi**q) @ uv
        for q, i in enumerate(dm.edge_normal_dofs(e)):
            out[i] = hE * (w * xi**q) @ dn
    if dm.n_d4:
        for c in range(dm.n_cells):
            rule = cell_rule(mesh, c, deg)
            basis = ScaledMonomialBasis(k - 2, mesh.centroids[c], mesh.diameters[c])
            mb = basis.values(rule.points)
            out[dm.cell_interior_dofs(c)] = (rule.weights * u(rule.points[:, 0], rule.points[:, 1])) @ mb / mesh.areas[c]
    return out


def boundary_dofs(mesh: PolyMesh, dm: GlobalDofMap) -> np.ndarray:
    bv = np.flatnonzero(mesh.boundary_vertex)
    be = np.flatnonzero(mesh.boundary_edge)
    parts = [(3 * bv[:, None] + np.arange(3)).ravel()]
    for e in be:
        parts += [dm.edge_trace_dofs(e), dm.edge_normal_dofs(e)]
    return np.unique(np.concatenate(parts)).astype(np.int64)


def _outward_normal(mesh: PolyMesh, e: int) -> np.ndarray:
    """Outward unit normal of a boundary edge (global normal times the owner's orientation)."""
    c = mesh.edge_cells[e, 0]
    j = int(np.flatnonzero(np.asarray(mesh.cell_edges[c]) == e)[0])
    sigma = -1.0 if mesh.cell_edge_flip[c][j] else 1.0
    a, b = mesh.vertices[mesh.edges[e]]
    t = (b - a) / np.hypot(*(b - a))
    return sigma * np.array([t[1], -t[0]])


def _one_sided_derivative(g0: Callable, p: np.ndarray, direction: np.ndarray, step: float) -> float:
    # fourth-order forward difference along the edge
    s = step * np.arange(5)
    pts = p + s[:, None] * direction
    vals = np.asarray(g0(pts[:, 0], pts[:, 1]), dtype=float)
    return float(np.dot([-25.0, 48.0, -36.0, 16.0, -3.0], vals) / (12.0 * step))


def corner_gradient(mesh: PolyMesh, v: int, g0: Callable, g1: Callable) -> np.ndarray:
    """Least-squares gradient at a boundary vertex from tangential derivatives of g0 and the g1 values."""
    p = mesh.vertices[v]
    rows, rhs = [], []
    for e in np.flatnonzero(mesh.boundary_edge):
        a, b = mesh.edges[e]
        if v not in (a, b):
            continue
        other = mesh.vertices[b if a == v else a]
        L = float(np.hypot(*(other - p)))
        t = (other - p) / L
        n = _outward_normal(mesh, e)
        rows += [t, n]
        rhs += [
            _one_sided_derivative(g0, p, t, FD_STEP * L),
            float(np.asarray(g1(np.array([p[0]]), np.array([p[1]]), n[None, :])).ravel()[0]),
        ]
    A = np.array(rows)
    r = np.array(rhs)
    grad, *_ = np.linalg.lstsq(A, r, rcond=None)
    resid = np.linalg.norm(A @ grad - r)
    if resid > CORNER_TOL * max(1.0, np.linalg.norm(grad)):
        raise DirichletError(
            f"vertex {v}: boundary data inconsistent at corner (residual {resid:.2e}); supply the exact gradient"
        )
    return grad


def dirichlet_values(
    mesh: PolyMesh,
    dm: GlobalDofMap,
    g0: Callable,
    g1: Callable,
    grad: Callable | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """(constrained dof indices, their values).

    ``g0(x, y)`` is the boundary trace, ``g1(x, y, n)`` the outward normal
    derivative with ``n`` the (npts, 2) outward normals, and ``grad`` an
    optional full gradient used for the vertex gradient dofs.
    """
    fixed = boundary_dofs(mesh, dm)
    full = np.zeros(dm.n_dofs)
    bv = np.flatnonzero(mesh.boundary_vertex)
    p = mesh.vertices[bv]
    full[3 * bv] = g0(p[:, 0], p[:, 1])
    if grad is not None:
        gx, gy = grad(p[:, 0], p[:, 1])
        G = np.column_stack([np.broadcast_to(gx, len(bv)), np.broadcast_to(gy, len(bv))])
    else:
        G = np.array([corner_gradient(mesh, v, g0, g1) for v in bv]).reshape(-1, 2)
    full[3 * bv + 1] = mesh.vertex_h[bv] * G[:, 0]
    full[3 * bv + 2] = mesh.vertex_h[bv] * G[:, 1]
    xi, w = gauss_legendre(4 * dm.k + 8)
    for e in np.flatnonzero(mesh.boundary_edge):
        pts, hE, _, nE = _edge_points(mesh, e, xi)
        n_out = _outward_normal(mesh, e)
        sigma = float(np.dot(n_out, nE))
        uv = g0(pts[:, 0], pts[:, 1])
        dn = np.asarray(g1(pts[:, 0], pts[:, 1], np.tile(n_out, (len(xi), 1))), dtype=float)
        for q, i in enumerate(dm.edge_trace_dofs(e)):
            full[i] = (w * xi**q) @ uv
        for q, i in enumerate(dm.edge_normal_dofs(e)):
            full[i] = sigma * hE * (w * xi**q) @ dn
    return fixed, full[fixed]


def apply_dirichlet(
    system: LinearSystem,
    mesh: PolyMesh,
    g0: Callable,
    g1: Callable,
    grad: Callable | None = None,
) -> ReducedSystem:
    """Eliminate the clamped boundary dofs: F_free <- F_free - A_free,fixed u_fixed."""
    dm = system.dofmap
    fixed, values = dirichlet_values(mesh, dm, g0, g1, grad)
    system.fixed, system.fixed_values = fixed, values
    return reduce_system(system.A, system.F, fixed, values)


def reduce_system(A: sp.spmatrix, F: np.ndarray, fixed: np.ndarray, values: np.ndarray) -> ReducedSystem:
    n = A.shape[0]
    mask = np.ones(n, dtype=bool)
    mask[fixed] = False
    free = np.flatnonzero(mask)
    A = sp.csr_matrix(A)
    A_ff = A[free][:, free].tocsr()
    A_fb = A[free][:, fixed]
    F_f = F[free] - A_fb @ values
    return ReducedSystem(A_ff, F_f, free, np.asarray(fixed), np.asarray(values), n)


def write_coordinate(A: sp.spmatrix, path) -> None:
    """Plain ``row col value`` lines, 1-based, sorted by row then column."""
    C = sp.coo_matrix(A)
    order = np.lexsort((C.col, C.row))
    with open(path, "w") as fh:
        fh.write(f"% {A.shape[0]} {A.shape[1]} {C.nnz}\n")
        for i in order:
            fh.write(f"{C.row[i] + 1} {C.col[i] + 1} {C.data[i]:.17g}\n")


def symmetry_defect(A: sp.spmatrix) -> float:
    """max |A - A^T| / max |A|."""
    A = sp.csr_matrix(A)
    top = abs(A).max()
    return float(abs(A - A.T).max() / top) if top else 0.0
