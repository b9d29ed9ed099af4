"""Scaled monomials and polynomial-exact quadrature on edges and polygons."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .mesh import PolyMesh, fan_triangles


def n_poly(k: int) -> int:
    """Dimension of P_k in two variables; 0 for k < 0."""
    return (k + 1) * (k + 2) // 2 if k >= 0 else 0


@lru_cache(maxsize=None)
def multi_indices(k: int) -> np.ndarray:
    """Graded-lexicographic exponents (1, x, y, x^2, xy, y^2, ...) up to degree k."""
    return np.array([(d - j, j) for d in range(k + 1) for j in range(d + 1)], dtype=np.int64).reshape(-1, 2)


@dataclass(frozen=True)
class ScaledMonomialBasis:
    """m_nu(x) = ((x - center) / h)^nu for |nu| <= order."""

    order: int
    center: np.ndarray
    h: float

    @property
    def exponents(self) -> np.ndarray:
        return multi_indices(self.order)

    @property
    def size(self) -> int:
        return n_poly(self.order)

    def index(self, nu: tuple[int, int]) -> int:
        a, b = nu
        d = a + b
        return n_poly(d - 1) + b

    def _powers(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        s = (x - self.center) / self.h
        p = np.arange(self.order + 1)
        return s[:, 0:1] ** p, s[:, 1:2] ** p

    def values(self, x) -> np.ndarray:
        """(npts, n_k) values."""
        px, py = self._powers(x)
        e = self.exponents
        return px[:, e[:, 0]] * py[:, e[:, 1]]

    def gradients(self, x) -> np.ndarray:
        """(npts, n_k, 2) gradients."""
        px, py = self._powers(x)
        a, b = self.exponents.T
        gx = a * px[:, np.maximum(a - 1, 0)] * py[:, b]
        gy = b * px[:, a] * py[:, np.maximum(b - 1, 0)]
        return np.stack([gx, gy], axis=-1) / self.h

    def laplacians(self, x) -> np.ndarray:
        px, py = self._powers(x)
        a, b = self.exponents.T
        lx = a * (a - 1) * px[:, np.maximum(a - 2, 0)] * py[:, b]
        ly = b * (b - 1) * px[:, a] * py[:, np.maximum(b - 2, 0)]
        return (lx + ly) / self.h**2

    def grad_laplacians(self, x) -> np.ndarray:
        """(npts, n_k, 2) gradients of the Laplacians."""
        px, py = self._powers(x)
        a, b = self.exponents.T
        c = lambda e: np.maximum(e, 0)  # noqa: E731
        gx = a * (a - 1) * (a - 2) * px[:, c(a - 3)] * py[:, b] + b * (b - 1) * a * px[:, c(a - 1)] * py[:, c(b - 2)]
        gy = a * (a - 1) * b * px[:, c(a - 2)] * py[:, c(b - 1)] + b * (b - 1) * (b - 2) * px[:, a] * py[:, c(b - 3)]
        return np.stack([gx, gy], axis=-1) / self.h**3

    def bilaplacians(self, x) -> np.ndarray:
        px, py = self._powers(x)
        a, b = self.exponents.T
        c = lambda e: np.maximum(e, 0)  # noqa: E731
        f4 = lambda e: e * (e - 1) * (e - 2) * (e - 3)  # noqa: E731
        f2 = lambda e: e * (e - 1)  # noqa: E731
        val = (
            f4(a) * px[:, c(a - 4)] * py[:, b]
            + 2 * f2(a) * f2(b) * px[:, c(a - 2)] * py[:, c(b - 2)]
            + f4(b) * px[:, a] * py[:, c(b - 4)]
        )
        return val / self.h**4

    def laplacian_matrix(self) -> np.ndarray:
        """Lap with Lap[i, j] the coefficient of m_j (|j| <= order-2) in Delta m_i."""
        e = self.exponents
        L = np.zeros((self.size, n_poly(self.order - 2)))
        for i, (a, b) in enumerate(e):
            if a >= 2:
                L[i, self.index((a - 2, b))] += a * (a - 1)
            if b >= 2:
                L[i, self.index((a, b - 2))] += b * (b - 1)
        return L / self.h**2


def monomial_eval(basis: ScaledMonomialBasis, which: int, x, kind: str = "value"):
    """Evaluate one basis member; ``kind`` in value/gradient/laplacian/bilaplacian."""
    if not 0 <= which < basis.size:
        raise IndexError(f"monomial index {which} out of range for order {basis.order}")
    pts = np.atleast_2d(x)
    if kind == "value":
        out = basis.values(pts)[:, which]
    elif kind == "gradient":
        out = basis.gradients(pts)[:, which, :]
    elif kind == "laplacian":
        out = basis.laplacians(pts)[:, which]
    elif kind == "bilaplacian":
        out = basis.bilaplacians(pts)[:, which]
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return out[0] if np.ndim(x) == 1 else out


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray
    degree: int

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


@lru_cache(maxsize=None)
def gauss_legendre(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on [-1/2, 1/2] exact for polynomials of ``degree``."""
    n = degree // 2 + 1
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * x, 0.5 * w


def edge_rule(p0, p1, degree: int) -> QuadratureRule:
    """Gauss-Legendre rule on the segment p0 -> p1."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    xi, w = gauss_legendre(degree)
    length = float(np.hypot(*(p1 - p0)))
    pts = 0.5 * (p0 + p1) + xi[:, None] * (p1 - p0)
    return QuadratureRule(pts, w * length, degree)


@lru_cache(maxsize=None)
def triangle_reference_rule(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Collapsed Gauss-Jacobi rule on the unit simplex, barycentric (l1, l2) and weights summing to 1/2."""
    n = degree // 2 + 1
    a, wa = roots_jacobi(n, 1.0, 0.0)  # weight (1 - a)
    b, wb = np.polynomial.legendre.leggauss(n)
    u = 0.5 * (1.0 + a)
    v = 0.5 * (1.0 + b)
    U, V = np.meshgrid(u, v, indexing="ij")
    W = np.outer(wa, wb) / 8.0
    l1 = U.ravel()
    l2 = ((1.0 - U) * V).ravel()
    return np.column_stack([l1, l2]), W.ravel()


def triangle_rule(tri: np.ndarray, degree: int) -> QuadratureRule:
    """Rule on one or several triangles given as (..., 3, 2) vertex arrays."""
    tri = np.asarray(tri, dtype=float).reshape(-1, 3, 2)
    ref, w = triangle_reference_rule(degree)
    e1 = tri[:, 1] - tri[:, 0]
    e2 = tri[:, 2] - tri[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    pts = tri[:, None, 0] + ref[None, :, 0:1] * e1[:, None] + ref[None, :, 1:2] * e2[:, None]
    wts = det[:, None] * w[None, :]
    return QuadratureRule(pts.reshape(-1, 2), wts.ravel(), degree)


def polygon_rule(pts: np.ndarray, degree: int, fan_point=None) -> QuadratureRule:
    pts = np.asarray(pts, dtype=float)
    if fan_point is None:
        from .mesh import _area_centroid

        fan_point = _area_centroid(pts)[1]
    return triangle_rule(fan_triangles(pts, np.asarray(fan_point)), degree)


def cell_rule(mesh: PolyMesh, cell: int, degree: int, fan_point=None) -> QuadratureRule:
    """Rule exact for polynomials of ``degree`` on a mesh cell (fan sub-triangulation)."""
    pts = mesh.vertices[mesh.cells[cell]]
    fp = mesh.fan_point(cell) if fan_point is None else fan_point
    tri = fan_triangles(pts, np.asarray(fp), cell)
    return triangle_rule(tri, degree)
