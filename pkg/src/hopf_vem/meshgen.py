"""Generators for the four unit-square mesh families.

Every family is indexed by a refinement level 0..8. Quadrilateral and
octagonal families use an n x n logical grid with n in ``GRID_SIZES``;
the hexagonal family uses (n+1) x (n+1) cells.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from .mesh import MeshError, PolyMesh, build_mesh

FAMILIES = ("remapped-quad", "randomized-quad", "remapped-hex", "nonconvex-octagon")
GRID_SIZES = (5, 10, 20, 30, 40, 50, 60, 70, 80)
MAX_LEVEL = len(GRID_SIZES) - 1

REMAP_AMPLITUDE = 0.1
RANDOM_AMPLITUDE = 0.3
HEX_POINT_SHIFT = 0.15
OCTAGON_DENT = 0.3


class UnsupportedLevelError(MeshError):
    pass


def smooth_remap(xy: np.ndarray, amplitude: float = REMAP_AMPLITUDE) -> np.ndarray:
    """(x, y) -> (x + a s, y + a s) with s = sin(2 pi x) sin(2 pi y); fixes the boundary."""
    s = np.sin(2 * np.pi * xy[:, 0]) * np.sin(2 * np.pi * xy[:, 1])
    out = xy + amplitude * s[:, None]
    on_bnd = _on_unit_boundary(xy)
    out[on_bnd] = xy[on_bnd]
    return out


def _on_unit_boundary(xy, tol=1e-13):
    return (
        (np.abs(xy[:, 0]) < tol)
        | (np.abs(xy[:, 0] - 1) < tol)
        | (np.abs(xy[:, 1]) < tol)
        | (np.abs(xy[:, 1] - 1) < tol)
    )


def _quad_grid(n: int):
    t = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(t, t, indexing="xy")
    xy = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return j * (n + 1) + i

    cells = [[vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)] for j in range(n) for i in range(n)]
    return xy, cells


def remapped_quad(n: int) -> PolyMesh:
    xy, cells = _quad_grid(n)
    return build_mesh(smooth_remap(xy), cells)


def randomized_quad(n: int, seed: int = 42) -> PolyMesh:
    xy, cells = _quad_grid(n)
    rng = np.random.default_rng(seed)
    shift = rng.uniform(-RANDOM_AMPLITUDE, RANDOM_AMPLITUDE, size=xy.shape) / n
    interior = ~_on_unit_boundary(xy)
    xy[interior] += shift[interior]
    return build_mesh(xy, cells)


def remapped_hex(m: int) -> PolyMesh:
    """Brick-pattern hexagons, m rows of m cells, then smoothly remapped.

    Even rows break at x = i/m, odd rows at x = (i + 1/2)/m (with the end
    cells absorbing the half widths). Vertices of row-above corners are
    lifted and row-below corners lowered so interior cells are pointy
    hexagons. Boundary edges of non-corner cells get a midpoint vertex.
    """
    even = [i / m for i in range(m + 1)]
    odd = [0.0] + [(i + 0.5) / m for i in range(1, m)] + [1.0]
    breaks = [even if r % 2 == 0 else odd for r in range(m)]
    dy = HEX_POINT_SHIFT / m

    index: dict[tuple[int, float], int] = {}
    coords: list[tuple[float, float]] = []

    def vertex(line: int, x: float) -> int:
        key = (line, round(x * 4 * m))
        v = index.get(key)
        if v is None:
            below = breaks[line - 1] if line > 0 else []
            above = breaks[line] if line < m else []
            corner_above = any(abs(x - b) < 1e-12 for b in above)
            corner_below = any(abs(x - b) < 1e-12 for b in below)
            y = line / m
            if 0 < line < m and not (corner_above and corner_below):
                y += dy if corner_above else -dy
            v = len(coords)
            index[key] = v
            coords.append((x, y))
        return v

    def line_points(line: int, x0: float, x1: float) -> list[float]:
        pts = set()
        for r in (line - 1, line):
            if 0 <= r < m:
                pts.update(b for b in breaks[r] if x0 - 1e-12 <= b <= x1 + 1e-12)
        return sorted(pts)

    cells = []
    for r in range(m):
        br = breaks[r]
        for i in range(m):
            x0, x1 = br[i], br[i + 1]
            bottom = line_points(r, x0, x1)
            top = line_points(r + 1, x0, x1)
            loop = [vertex(r, x) for x in bottom] + [vertex(r + 1, x) for x in reversed(top)]
            cells.append(loop)

    # midpoint on each boundary edge that does not belong to a corner cell
    corner_cells = {0, m - 1, m * (m - 1), m * m - 1}
    xy = list(coords)
    for c, loop in enumerate(cells):
        if c in corner_cells:
            continue
        new_loop = []
        for j, a in enumerate(loop):
            b = loop[(j + 1) % len(loop)]
            new_loop.append(a)
            pa, pb = np.array(xy[a]), np.array(xy[b])
            if _segment_on_boundary(pa, pb):
                new_loop.append(len(xy))
                xy.append(tuple(0.5 * (pa + pb)))
        cells[c] = new_loop
    return build_mesh(smooth_remap(np.array(xy)), cells)


def _segment_on_boundary(pa, pb, tol=1e-13) -> bool:
    for k in range(2):
        for val in (0.0, 1.0):
            if abs(pa[k] - val) < tol and abs(pb[k] - val) < tol:
                return True
    return False


def nonconvex_octagon(n: int, dent: float = OCTAGON_DENT) -> PolyMesh:
    """Square grid with a vertex at every edge midpoint.

    Interior horizontal-edge midpoints move up and interior vertical-edge
    midpoints move right by ``dent`` times the grid spacing, so interior
    cells are octagons with reflex vertices on their bottom and left sides.
    """
    h = 1.0 / n
    t = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(t, t, indexing="xy")
    corners = np.column_stack([X.ravel(), Y.ravel()])
    nc = len(corners)

    def cid(i, j):
        return j * (n + 1) + i

    # horizontal edges (i, j) -> (i+1, j); vertical edges (i, j) -> (i, j+1)
    hmid = {}
    vmid = {}
    pts = [p for p in corners]
    for j in range(n + 1):
        for i in range(n):
            p = np.array([(i + 0.5) * h, j * h])
            if 0 < j < n:
                p[1] += dent * h
            hmid[i, j] = len(pts)
            pts.append(p)
    for j in range(n):
        for i in range(n + 1):
            p = np.array([i * h, (j + 0.5) * h])
            if 0 < i < n:
                p[0] += dent * h
            vmid[i, j] = len(pts)
            pts.append(p)
    cells = []
    for j in range(n):
        for i in range(n):
            cells.append(
                [
                    cid(i, j),
                    hmid[i, j],
                    cid(i + 1, j),
                    vmid[i + 1, j],
                    cid(i + 1, j + 1),
                    hmid[i, j + 1],
                    cid(i, j + 1),
                    vmid[i, j],
                ]
            )
    xy = np.array(pts)
    kernel = {}
    shapes: dict[tuple, np.ndarray] = {}
    for c, loop in enumerate(cells):
        rel = xy[loop] - xy[loop[0]]
        key = tuple(np.round(rel / h, 9).ravel())
        if key not in shapes:
            shapes[key] = kernel_point(rel)
        kernel[c] = xy[loop[0]] + shapes[key]
    return build_mesh(xy, cells, kernel_points=kernel)


def kernel_point(pts: np.ndarray) -> np.ndarray:
    """Chebyshev center of the kernel of a counterclockwise polygon (LP)."""
    a = pts
    b = np.roll(pts, -1, axis=0)
    d = b - a
    L = np.hypot(d[:, 0], d[:, 1])
    # inward normal of a ccw edge is the tangent rotated +90 degrees
    nin = np.column_stack([-d[:, 1], d[:, 0]]) / L[:, None]
    # nin . (x - a) >= r  ->  -nin . x + r <= -nin . a
    A = np.column_stack([-nin, np.ones(len(a))])
    rhs = -(nin * a).sum(1)
    res = linprog([0.0, 0.0, -1.0], A_ub=A, b_ub=rhs, bounds=[(None, None)] * 2 + [(0, None)])
    if not res.success or res.x[2] <= 0:
        raise MeshError("polygon has an empty kernel")
    return res.x[:2]


def generate_family(family: str, level: int, seed: int = 42) -> PolyMesh:
    """Mesh of ``family`` at refinement ``level`` (0..8) on the unit square."""
    if family not in FAMILIES:
        raise MeshError(f"unknown mesh family {family!r}; choose from {FAMILIES}")
    if not 0 <= level <= MAX_LEVEL:
        raise UnsupportedLevelError(f"level {level} unsupported (0..{MAX_LEVEL})")
    n = GRID_SIZES[level]
    if family == "remapped-quad":
        return remapped_quad(n)
    if family == "randomized-quad":
        return randomized_quad(n, seed)
    if family == "remapped-hex":
        return remapped_hex(n + 1)
    return nonconvex_octagon(n)
