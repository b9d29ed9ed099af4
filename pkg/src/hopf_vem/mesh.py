"""Polygonal meshes: connectivity, geometry, sub-triangulation and quality audit."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class MeshError(ValueError):
    """Base class for rejected mesh input."""


class ClockwiseCellError(MeshError):
    pass


class NonSimplePolygonError(MeshError):
    pass


class DuplicateCellError(MeshError):
    pass


class DanglingVertexError(MeshError):
    pass


class NonConformingMeshError(MeshError):
    pass


class StarShapednessError(MeshError):
    pass


@dataclass(frozen=True)
class CellGeometry:
    vertices: np.ndarray  # (n, 2), counterclockwise
    area: float
    centroid: np.ndarray
    diameter: float
    edge_lengths: np.ndarray  # local edge j joins vertex j and j+1
    tangents: np.ndarray  # unit, along the counterclockwise traversal
    normals: np.ndarray  # unit, cell-outward

    @property
    def perimeter(self) -> float:
        return float(self.edge_lengths.sum())


@dataclass(frozen=True)
class EdgeGeometry:
    p0: np.ndarray
    p1: np.ndarray
    midpoint: np.ndarray
    length: float
    tangent: np.ndarray  # p0 -> p1
    normal: np.ndarray  # tangent rotated by -90 degrees


@dataclass(frozen=True)
class VertexGeometry:
    position: np.ndarray
    h: float


@dataclass(frozen=True)
class RegularityReport:
    min_edge_ratio: float
    min_ball_ratio: float
    worst_edge_cell: int
    worst_ball_cell: int

    def __str__(self) -> str:
        return (
            f"min h_E/h_P = {self.min_edge_ratio:.4g} (cell {self.worst_edge_cell}), "
            f"min r_ball/h_P = {self.min_ball_ratio:.4g} (cell {self.worst_ball_cell})"
        )


@dataclass(eq=False)
class PolyMesh:
    """Conforming polygonal mesh.

    Edges carry a global orientation (lower vertex index first). For every
    cell, ``cell_edges[c][j]`` is the global edge joining local vertices j
    and j+1 and ``cell_edge_flip[c][j]`` is True when the counterclockwise
    traversal of the cell runs against the global orientation.
    """

    vertices: np.ndarray
    cells: list[np.ndarray]
    edges: np.ndarray
    edge_cells: np.ndarray  # (nF, 2), second entry -1 on the boundary
    cell_edges: list[np.ndarray]
    cell_edge_flip: list[np.ndarray]
    boundary_vertex: np.ndarray
    boundary_edge: np.ndarray
    kernel_points: dict[int, np.ndarray] = field(default_factory=dict)

    areas: np.ndarray = field(init=False)
    centroids: np.ndarray = field(init=False)
    diameters: np.ndarray = field(init=False)
    vertex_h: np.ndarray = field(init=False)

    def __post_init__(self):
        nR = len(self.cells)
        self.areas = np.empty(nR)
        self.centroids = np.empty((nR, 2))
        self.diameters = np.empty(nR)
        for c, loop in enumerate(self.cells):
            pts = self.vertices[loop]
            self.areas[c], self.centroids[c] = _area_centroid(pts)
            self.diameters[c] = _diameter(pts)
        hsum = np.zeros(len(self.vertices))
        cnt = np.zeros(len(self.vertices))
        for c, loop in enumerate(self.cells):
            np.add.at(hsum, loop, self.diameters[c])
            np.add.at(cnt, loop, 1.0)
        self.vertex_h = hsum / cnt

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def counts(self) -> tuple[int, int, int]:
        """(nR, nF, nV) as reported in mesh tables."""
        return self.n_cells, self.n_edges, self.n_vertices

    @property
    def h_max(self) -> float:
        return float(self.diameters.max())

    def fan_point(self, cell: int) -> np.ndarray:
        kp = self.kernel_points.get(cell)
        return self.centroids[cell] if kp is None else kp


def _area_centroid(pts: np.ndarray) -> tuple[float, np.ndarray]:
    x, y = pts[:, 0], pts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * cross.sum()
    cx = ((x + xn) * cross).sum() / (6.0 * area)
    cy = ((y + yn) * cross).sum() / (6.0 * area)
    return float(area), np.array([cx, cy])


def _diameter(pts: np.ndarray) -> float:
    d = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt((d**2).sum(-1)).max())


def _segments_cross(pts: np.ndarray) -> bool:
    """True when two non-adjacent sides of the closed loop intersect."""
    n = len(pts)
    a = pts
    b = np.roll(pts, -1, axis=0)
    i, j = np.triu_indices(n, 2)
    keep = ~((i == 0) & (j == n - 1))
    i, j = i[keep], j[keep]
    if len(i) == 0:
        return False

    def orient(p, q, r):
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (q[..., 1] - p[..., 1]) * (
            r[..., 0] - p[..., 0]
        )

    d1 = orient(a[i], b[i], a[j])
    d2 = orient(a[i], b[i], b[j])
    d3 = orient(a[j], b[j], a[i])
    d4 = orient(a[j], b[j], b[i])
    eps = 1e-14 * np.abs(b - a).max() ** 2
    s1, s2, s3, s4 = (np.where(np.abs(d) <= eps, 0.0, np.sign(d)) for d in (d1, d2, d3, d4))
    proper = (s1 * s2 < 0) & (s3 * s4 < 0)
    touching = (s1 == 0) | (s2 == 0) | (s3 == 0) | (s4 == 0)
    if proper.any():
        return True
    if touching.any():
        # collinear/touching cases: check bounding-box overlap of the offending pairs
        for ii, jj in zip(i[touching], j[touching]):
            if _touch(a[ii], b[ii], a[jj], b[jj], eps):
                return True
    return False


def _touch(p1, p2, p3, p4, eps) -> bool:
    def on_seg(p, q, r):
        cr = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
        return (
            abs(cr) <= eps
            and min(p[0], q[0]) - 1e-14 <= r[0] <= max(p[0], q[0]) + 1e-14
            and min(p[1], q[1]) - 1e-14 <= r[1] <= max(p[1], q[1]) + 1e-14
        )

    return on_seg(p1, p2, p3) or on_seg(p1, p2, p4) or on_seg(p3, p4, p1) or on_seg(p3, p4, p2)


def build_mesh(vertices, cells, kernel_points=None, check_simple: bool = True) -> PolyMesh:
    """Build a :class:`PolyMesh` from coordinates and counterclockwise index loops."""
    verts = np.asarray(vertices, dtype=float)
    if verts.ndim != 2 or verts.shape[1] != 2:
        raise MeshError("vertices must be an (n, 2) array")
    loops = [np.asarray(c, dtype=np.int64) for c in cells]
    if not loops:
        raise MeshError("mesh needs at least one cell")
    nV = len(verts)

    seen = {}
    used = np.zeros(nV, dtype=bool)
    for c, loop in enumerate(loops):
        if len(loop) < 3:
            raise NonSimplePolygonError(f"cell {c} has fewer than 3 vertices")
        if loop.min() < 0 or loop.max() >= nV:
            raise MeshError(f"cell {c} references a vertex index out of range")
        if len(set(loop.tolist())) != len(loop):
            raise NonSimplePolygonError(f"cell {c} repeats a vertex")
        key = frozenset(loop.tolist())
        if key in seen:
            raise DuplicateCellError(f"cell {c} duplicates cell {seen[key]}")
        seen[key] = c
        pts = verts[loop]
        area, _ = _area_centroid(pts)
        if area <= 0.0:
            raise ClockwiseCellError(f"cell {c} is not counterclockwise (signed area {area:.3e})")
        if check_simple and len(loop) > 3 and _segments_cross(pts):
            raise NonSimplePolygonError(f"cell {c} is self-intersecting")
        used[loop] = True
    if not used.all():
        raise DanglingVertexError(f"vertices {np.flatnonzero(~used)[:10].tolist()} belong to no cell")

    edge_id: dict[tuple[int, int], int] = {}
    edges = []
    edge_cells = []
    first_dir = []
    cell_edges = []
    cell_flip = []
    for c, loop in enumerate(loops):
        ids = np.empty(len(loop), dtype=np.int64)
        flips = np.empty(len(loop), dtype=bool)
        for j in range(len(loop)):
            a, b = int(loop[j]), int(loop[(j + 1) % len(loop)])
            key = (a, b) if a < b else (b, a)
            flip = a > b
            e = edge_id.get(key)
            if e is None:
                e = len(edges)
                edge_id[key] = e
                edges.append(key)
                edge_cells.append([c, -1])
                first_dir.append(flip)
            else:
                if edge_cells[e][1] != -1:
                    raise NonConformingMeshError(f"edge {key} shared by more than two cells")
                if first_dir[e] == flip:
                    raise NonConformingMeshError(
                        f"edge {key} traversed in the same direction by cells {edge_cells[e][0]} and {c}"
                    )
                edge_cells[e][1] = c
            ids[j] = e
            flips[j] = flip
        cell_edges.append(ids)
        cell_flip.append(flips)

    edges_arr = np.array(edges, dtype=np.int64)
    edge_cells_arr = np.array(edge_cells, dtype=np.int64)
    bnd_edge = edge_cells_arr[:, 1] < 0
    bnd_vert = np.zeros(nV, dtype=bool)
    bnd_vert[edges_arr[bnd_edge].ravel()] = True

    kp = {}
    if kernel_points:
        items = kernel_points.items() if isinstance(kernel_points, dict) else enumerate(kernel_points)
        for c, p in items:
            if p is not None:
                kp[int(c)] = np.asarray(p, dtype=float)

    return PolyMesh(
        vertices=verts,
        cells=loops,
        edges=edges_arr,
        edge_cells=edge_cells_arr,
        cell_edges=cell_edges,
        cell_edge_flip=cell_flip,
        boundary_vertex=bnd_vert,
        boundary_edge=bnd_edge,
        kernel_points=kp,
    )


def cell_geometry(mesh: PolyMesh, cell: int) -> CellGeometry:
    if not 0 <= cell < mesh.n_cells:
        raise IndexError(f"cell index {cell} out of range")
    pts = mesh.vertices[mesh.cells[cell]]
    return polygon_geometry(pts, area=mesh.areas[cell], centroid=mesh.centroids[cell],
                            diameter=mesh.diameters[cell])


def polygon_geometry(pts, area=None, centroid=None, diameter=None) -> CellGeometry:
    pts = np.asarray(pts, dtype=float)
    if area is None or centroid is None:
        area, centroid = _area_centroid(pts)
    if diameter is None:
        diameter = _diameter(pts)
    d = np.roll(pts, -1, axis=0) - pts
    lengths = np.hypot(d[:, 0], d[:, 1])
    t = d / lengths[:, None]
    n = np.column_stack([t[:, 1], -t[:, 0]])
    return CellGeometry(pts, float(area), np.asarray(centroid), float(diameter), lengths, t, n)


def edge_geometry(mesh: PolyMesh, edge: int) -> EdgeGeometry:
    a, b = mesh.edges[edge]
    p0, p1 = mesh.vertices[a], mesh.vertices[b]
    d = p1 - p0
    h = float(np.hypot(*d))
    t = d / h
    return EdgeGeometry(p0, p1, 0.5 * (p0 + p1), h, t, np.array([t[1], -t[0]]))


def vertex_geometry(mesh: PolyMesh, vertex: int) -> VertexGeometry:
    return VertexGeometry(mesh.vertices[vertex], float(mesh.vertex_h[vertex]))


def subtriangulate(mesh: PolyMesh, cell: int) -> np.ndarray:
    """Triangle fan of ``cell`` from its stored kernel point (or centroid).

    Returns an array of shape (n, 3, 2) with counterclockwise triangles.
    """
    pts = mesh.vertices[mesh.cells[cell]]
    return fan_triangles(pts, mesh.fan_point(cell), cell)


def fan_triangles(pts: np.ndarray, center: np.ndarray, cell=None) -> np.ndarray:
    p0 = pts
    p1 = np.roll(pts, -1, axis=0)
    c = np.broadcast_to(center, p0.shape)
    tri = np.stack([c, p0, p1], axis=1)
    u = p0 - c
    v = p1 - c
    areas = 0.5 * (u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])
    scale = np.abs(areas).sum()
    if np.any(areas <= 1e-14 * scale):
        name = "polygon" if cell is None else f"cell {cell}"
        raise StarShapednessError(f"{name} is not star-shaped with respect to its fan point {center}")
    return tri


def _point_segment_distance(p, a, b) -> np.ndarray:
    d = b - a
    t = np.clip(((p - a) * d).sum(-1) / (d * d).sum(-1), 0.0, 1.0)
    q = a + t[:, None] * d
    return np.hypot(*(p - q).T)


def audit_regularity(mesh: PolyMesh) -> RegularityReport:
    """Estimate the mesh-regularity constants (edge/diameter and ball/diameter).

    Only reports; degenerate cells produce small ratios, not errors.
    """
    min_e, min_b = np.inf, np.inf
    we, wb = -1, -1
    for c, loop in enumerate(mesh.cells):
        pts = mesh.vertices[loop]
        nxt = np.roll(pts, -1, axis=0)
        hP = mesh.diameters[c]
        he = np.hypot(*(nxt - pts).T).min()
        if he / hP < min_e:
            min_e, we = he / hP, c
        candidates = [mesh.centroids[c]]
        if c in mesh.kernel_points:
            candidates.append(mesh.kernel_points[c])
        best = 0.0
        for p in candidates:
            if not _inside(pts, p):
                continue
            best = max(best, _point_segment_distance(p, pts, nxt).min())
        if best / hP < min_b:
            min_b, wb = best / hP, c
    return RegularityReport(float(min_e), float(min_b), we, wb)


def _inside(pts, p) -> bool:
    x, y = pts[:, 0], pts[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    crosses = ((y > p[1]) != (yn > p[1])) & (
        p[0] < (xn - x) * (p[1] - y) / np.where(yn == y, 1.0, yn - y) + x
    )
    return bool(crosses.sum() % 2)


def save_mesh(mesh: PolyMesh, path) -> None:
    data = {
        "vertices": mesh.vertices.tolist(),
        "cells": [c.tolist() for c in mesh.cells],
    }
    if mesh.kernel_points:
        data["kernel_points"] = {str(c): p.tolist() for c, p in sorted(mesh.kernel_points.items())}
    Path(path).write_text(json.dumps(data))


def load_mesh(path) -> PolyMesh:
    data = json.loads(Path(path).read_text())
    kp = data.get("kernel_points")
    if isinstance(kp, dict):
        kp = {int(c): p for c, p in kp.items()}
    return build_mesh(data["vertices"], data["cells"], kernel_points=kp)
