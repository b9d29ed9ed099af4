"""High-precision reference construction of the local element matrices.

Independent of ``element``: polynomials are exact coefficient dictionaries,
cell integrals use Green's theorem on the boundary (no sub-triangulation),
edge integrals are exact term-by-term, edge traces come from a direct
Hermite solve per canonical basis function, and all linear algebra runs in
mpmath at ``DIGITS`` decimal digits. Only used to build test fixtures.
"""

from __future__ import annotations

import json
from itertools import product
from pathlib import Path

import mpmath as mp
import numpy as np

DIGITS = 40
GOLDEN_DIR = Path(__file__).parent / "data" / "golden"

Poly = dict  # {(a, b): coeff} in scaled coordinates X = (x - xc)/h, Y = (y - yc)/h


def _add(p: Poly, q: Poly, s=1) -> Poly:
    out = dict(p)
    for e, c in q.items():
        out[e] = out.get(e, 0) + s * c
    return out


def _scale(p: Poly, s) -> Poly:
    return {e: s * c for e, c in p.items()}


def _dx(p: Poly) -> Poly:
    return {(a - 1, b): a * c for (a, b), c in p.items() if a > 0}


def _dy(p: Poly) -> Poly:
    return {(a, b - 1): b * c for (a, b), c in p.items() if b > 0}


def _lap(p: Poly) -> Poly:
    return _add(_dx(_dx(p)), _dy(_dy(p)))


def _eval(p: Poly, X, Y):
    return mp.fsum(c * X**a * Y**b for (a, b), c in p.items())


def _poly1_mul(u, v):
    out = [mp.mpf(0)] * (len(u) + len(v) - 1)
    for i, a in enumerate(u):
        for j, b in enumerate(v):
            out[i + j] += a * b
    return out


def _poly1_pow(u, n):
    out = [mp.mpf(1)]
    for _ in range(n):
        out = _poly1_mul(out, u)
    return out


def _restrict(p: Poly, X0, dX, Y0, dY):
    """Coefficients in t of p(X0 + t dX, Y0 + t dY)."""
    out = [mp.mpf(0)]
    for (a, b), c in p.items():
        term = _poly1_mul(_poly1_pow([X0, dX], a), _poly1_pow([Y0, dY], b))
        if len(term) > len(out):
            out += [mp.mpf(0)] * (len(term) - len(out))
        for i, t in enumerate(term):
            out[i] += c * t
    return out


def _int01(u, weight=None):
    """int_0^1 u(t) [* weight(t)] dt for coefficient lists."""
    if weight is not None:
        u = _poly1_mul(u, weight)
    return mp.fsum(c / (i + 1) for i, c in enumerate(u))


def _monomials(k):
    return [(d - j, j) for d in range(k + 1) for j in range(d + 1)]


class ReferenceElement:
    """Reference matrices for a standalone polygon (h_V = h_P, ccw edge orientation)."""

    def __init__(self, vertices, k: int, alpha=(1, 1, 1)):
        mp.mp.dps = DIGITS
        self.k = k
        self.a0, self.a1, self.a2 = (mp.mpf(str(a)) for a in alpha)
        self.V = [(mp.mpf(str(x)), mp.mpf(str(y))) for x, y in vertices]
        n = self.n = len(self.V)
        # area and centroid by the shoelace formula
        A = mp.mpf(0)
        cx = cy = mp.mpf(0)
        for i in range(n):
            (x0, y0), (x1, y1) = self.V[i], self.V[(i + 1) % n]
            cr = x0 * y1 - x1 * y0
            A += cr
            cx += (x0 + x1) * cr
            cy += (y0 + y1) * cr
        self.area = A / 2
        self.xc, self.yc = cx / (3 * A), cy / (3 * A)
        self.h = max(mp.sqrt((p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2) for p in self.V for q in self.V)
        self.exps = _monomials(k)
        self.m = [{e: mp.mpf(1)} for e in self.exps]
        self.n2, self.n3, self.n4 = max(k - 3, 0), k - 2, (k - 1) * k // 2
        self.N = 3 * n + n * (self.n2 + self.n3) + self.n4
        self._build()

    # -- geometry in scaled coordinates ---------------------------------------------

    def _S(self, x, y):
        return (x - self.xc) / self.h, (y - self.yc) / self.h

    def _edge(self, j):
        (x0, y0), (x1, y1) = self.V[j], self.V[(j + 1) % self.n]
        L = mp.sqrt((x1 - x0) ** 2 + (y1 - y0) ** 2)
        t = ((x1 - x0) / L, (y1 - y0) / L)
        nrm = (t[1], -t[0])
        X0, Y0 = self._S(x0, y0)
        X1, Y1 = self._S(x1, y1)
        return dict(L=L, t=t, n=nrm, X0=X0, Y0=Y0, dX=X1 - X0, dY=Y1 - Y0)

    def cell_integral(self, p: Poly):
        """int_P p dx via Green: int X^a Y^b dA = h^2 oint X^(a+1) Y^b / (a+1) dY."""
        total = mp.mpf(0)
        for j in range(self.n):
            e = self._edge(j)
            prim = {(a + 1, b): c / (a + 1) for (a, b), c in p.items()}
            total += _int01(_restrict(prim, e["X0"], e["dX"], e["Y0"], e["dY"])) * e["dY"]
        return total * self.h**2

    def _grad(self, p: Poly):
        return _scale(_dx(p), 1 / self.h), _scale(_dy(p), 1 / self.h)

    # -- degrees of freedom of a polynomial ---------------------------------------------

    def dofs_of(self, p: Poly):
        out = [mp.mpf(0)] * self.N
        gx, gy = self._grad(p)
        for j, (x, y) in enumerate(self.V):
            X, Y = self._S(x, y)
            out[3 * j] = _eval(p, X, Y)
            out[3 * j + 1] = self.h * _eval(gx, X, Y)
            out[3 * j + 2] = self.h * _eval(gy, X, Y)
        xi = [mp.mpf(-0.5), mp.mpf(1)]
        for j in range(self.n):
            e = self._edge(j)
            tr = _restrict(p, e["X0"], e["dX"], e["Y0"], e["dY"])
            dn = _add(_scale(gx, e["n"][0]), _scale(gy, e["n"][1]))
            dnr = _restrict(dn, e["X0"], e["dX"], e["Y0"], e["dY"])
            for q in range(self.n2):
                out[self._d2(j, q)] = _int01(tr, _poly1_pow(xi, q))
            for q in range(self.n3):
                out[self._d3(j, q)] = e["L"] * _int01(dnr, _poly1_pow(xi, q))
        for b in range(self.n4):
            out[self._d4(b)] = self.cell_integral(_mul(self.m[b], p)) / self.area
        return out

    def _d2(self, j, q):
        return 3 * self.n + j * self.n2 + q

    def _d3(self, j, q):
        return 3 * self.n + self.n * self.n2 + j * self.n3 + q

    def _d4(self, b):
        return 3 * self.n + self.n * (self.n2 + self.n3) + b

    # -- edge traces of canonical basis functions -----------------------------------------

    def _traces(self, j, i):
        """(trace, outward normal derivative) of phi_i on edge j as t-coefficient lists."""
        e = self._edge(j)
        a, b = j, (j + 1) % self.n
        L, t, nrm = e["L"], e["t"], e["n"]
        d = [mp.mpf(1) if r == i else mp.mpf(0) for r in range(self.N)]
        r0 = max(3, self.k)
        r1 = self.k - 1
        xi = [mp.mpf(-0.5), mp.mpf(1)]

        def grad_at(v):
            return d[3 * v + 1] / self.h, d[3 * v + 2] / self.h

        rows, rhs = [], []
        rows.append([mp.mpf(1) if p == 0 else mp.mpf(0) for p in range(r0 + 1)])
        rhs.append(d[3 * a])
        rows.append([mp.mpf(1)] * (r0 + 1))
        rhs.append(d[3 * b])
        rows.append([mp.mpf(1) if p == 1 else mp.mpf(0) for p in range(r0 + 1)])
        ga = grad_at(a)
        rhs.append(L * (ga[0] * t[0] + ga[1] * t[1]))
        rows.append([mp.mpf(p) for p in range(r0 + 1)])
        gb = grad_at(b)
        rhs.append(L * (gb[0] * t[0] + gb[1] * t[1]))
        for q in range(self.n2):
            w = _poly1_pow(xi, q)
            rows.append([_int01([mp.mpf(0)] * p + [mp.mpf(1)], w) for p in range(r0 + 1)])
            rhs.append(d[self._d2(j, q)])
        trace = mp.lu_solve(mp.matrix(rows), mp.matrix(rhs))

        rows, rhs = [], []
        rows.append([mp.mpf(1) if p == 0 else mp.mpf(0) for p in range(r1 + 1)])
        rhs.append(ga[0] * nrm[0] + ga[1] * nrm[1])
        rows.append([mp.mpf(1)] * (r1 + 1))
        rhs.append(gb[0] * nrm[0] + gb[1] * nrm[1])
        for q in range(self.n3):
            w = _poly1_pow(xi, q)
            rows.append([L * _int01([mp.mpf(0)] * p + [mp.mpf(1)], w) for p in range(r1 + 1)])
            rhs.append(d[self._d3(j, q)])
        normal = mp.lu_solve(mp.matrix(rows), mp.matrix(rhs))
        return [trace[p] for p in range(r0 + 1)], [normal[p] for p in range(r1 + 1)]

    # -- matrices ------------------------------------------------------------------------

    def _build(self):
        nk, N = len(self.m), self.N
        D = mp.matrix(N, nk)
        for col, p in enumerate(self.m):
            dv = self.dofs_of(p)
            for r in range(N):
                D[r, col] = dv[r]
        H = mp.matrix(nk, nk)
        Gt = mp.matrix(nk, nk)
        for i, j in product(range(nk), range(nk)):
            mi, mj = self.m[i], self.m[j]
            H[i, j] = self.cell_integral(_mul(mi, mj))
            gi, gj = self._grad(mi), self._grad(mj)
            lap_i = _scale(_lap(mi), 1 / self.h**2)
            lap_j = _scale(_lap(mj), 1 / self.h**2)
            Gt[i, j] = self.a2 * self.cell_integral(_mul(lap_i, lap_j)) + self.a1 * self.cell_integral(
                _add(_mul(gi[0], gj[0]), _mul(gi[1], gj[1]))
            )

        traces = [[self._traces(j, i) for i in range(N)] for j in range(self.n)]
        Bt = mp.matrix(nk, N)
        perim = mp.fsum(self._edge(j)["L"] for j in range(self.n))
        g0 = [mp.mpf(0)] * nk
        b0 = [mp.mpf(0)] * N
        for j in range(self.n):
            e = self._edge(j)
            L, nrm = e["L"], e["n"]
            for r, p in enumerate(self.m):
                gx, gy = self._grad(p)
                lap = _scale(_lap(p), 1 / self.h**2)
                glx, gly = self._grad(lap)
                flux = _add(
                    _scale(_add(_scale(gx, nrm[0]), _scale(gy, nrm[1])), self.a1),
                    _scale(_add(_scale(glx, nrm[0]), _scale(gly, nrm[1])), -self.a2),
                )
                fr = _restrict(flux, e["X0"], e["dX"], e["Y0"], e["dY"])
                lr = _restrict(_scale(lap, self.a2), e["X0"], e["dX"], e["Y0"], e["dY"])
                g0[r] += L * _int01(_restrict(p, e["X0"], e["dX"], e["Y0"], e["dY"]))
                for i in range(N):
                    tr, dn = traces[j][i]
                    Bt[r, i] += L * (_int01(fr, tr) + _int01(lr, dn))
            for i in range(N):
                b0[i] += L * _int01(traces[j][i][0])
        # volume part: int phi (a2 Lap^2 m - a1 Lap m), a polynomial of degree <= k-2
        for r, p in enumerate(self.m):
            q = _add(
                _scale(_lap(_lap(p)), self.a2 / self.h**4),
                _scale(_lap(p), -self.a1 / self.h**2),
            )
            for (a, b), c in q.items():
                bidx = self.exps.index((a, b))
                Bt[r, self._d4(bidx)] += self.area * c
        G = Gt.copy()
        B = Bt.copy()
        for c in range(nk):
            G[0, c] += g0[c] / perim
        for c in range(N):
            B[0, c] += b0[c] / perim
        PiL = mp.inverse(G) * B
        C = mp.matrix(nk, N)
        HP = H * PiL
        for r in range(nk):
            if r < self.n4:
                C[r, self._d4(r)] = self.area
            else:
                for c in range(N):
                    C[r, c] = HP[r, c]
        Pi0 = mp.inverse(H) * C
        self.D, self.H, self.G_tilde, self.B_tilde, self.G, self.B = D, H, Gt, Bt, G, B
        self.PiL, self.C, self.Pi0 = PiL, C, Pi0

    def as_arrays(self) -> dict:
        conv = lambda M: np.array(M.tolist(), dtype=float)  # noqa: E731
        return {name: conv(getattr(self, name)) for name in ("D", "H", "G", "B", "C", "PiL", "Pi0")}


def _mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for (a, b), c in p.items():
        for (d, e), f in q.items():
            key = (a + d, b + e)
            out[key] = out.get(key, 0) + c * f
    return out


FIXTURES = {
    "square": [(0, 0), (1, 0), (1, 1), (0, 1)],
    "triangle": [(0, 0), (1, 0), (0, 1)],
    "pentagon": [(0, 0), (2, 0), (2.5, 1), (1, 2), (-0.5, 1)],
}
FIXTURE_SET = [("square", 2), ("square", 3), ("square", 4), ("triangle", 2), ("triangle", 3), ("pentagon", 2)]


def fixture_name(shape: str, k: int) -> str:
    return f"{shape}_k{k}.json"


def write_fixture(shape: str, k: int, directory: Path = GOLDEN_DIR) -> Path:
    ref = ReferenceElement(FIXTURES[shape], k)
    data = {"shape": shape, "k": k, "alpha": [1, 1, 1], "vertices": FIXTURES[shape]}
    for name, arr in ref.as_arrays().items():
        data[name] = [[float(f"{v:.15g}") for v in row] for row in arr]
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / fixture_name(shape, k)
    path.write_text(json.dumps(data))
    return path


def load_fixture(path) -> dict:
    data = json.loads(Path(path).read_text())
    for name in ("D", "H", "G", "B", "C", "PiL", "Pi0"):
        data[name] = np.array(data[name], dtype=float)
    return data


def fixture_paths(directory: Path = GOLDEN_DIR) -> list[Path]:
    return sorted(Path(directory).glob("*.json"))
