"""Manufactured solutions, relative error norms and convergence sweeps."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .assembly import apply_dirichlet, assemble, assemble_condensed, build_elements, number_dofs
from .element import ElementError, ElementOperators, ModelCoefficients
from .mesh import PolyMesh
from .meshgen import generate_family
from .solver import SolveOptions, SolveReport, SolverError, solve_spd

TESTS = ("1", "2", "patch")
CSV_COLUMNS = (
    "family,k,test,epsilon,level,h_max,n_dofs,err_l2,err_h1,err_energy,"
    "rate_l2,rate_h1,rate_energy,solve_method,iterations,residual"
).split(",")


@dataclass(frozen=True)
class ExactSolution:
    """Closed-form u with the derivatives needed for data and error norms.

    ``grad`` and ``grad_lap`` return (d/dx, d/dy) tuples.
    """

    name: str
    u: Callable
    grad: Callable
    lap: Callable
    grad_lap: Callable
    bilap: Callable
    coeffs: ModelCoefficients = ModelCoefficients()

    def f(self, x, y):
        c = self.coeffs
        return c.alpha2 * self.bilap(x, y) - c.alpha1 * self.lap(x, y) + c.alpha0 * self.u(x, y)

    def g0(self, x, y):
        return self.u(x, y)

    def g1(self, x, y, n):
        gx, gy = self.grad(x, y)
        n = np.asarray(n, dtype=float).reshape(-1, 2)
        return gx * n[:, 0] + gy * n[:, 1]


def test_case_1(coeffs: ModelCoefficients | None = None) -> ExactSolution:
    """u = sin(2 pi x) sin(2 pi y) + x^5 + y^5."""
    tp = 2 * np.pi

    def u(x, y):
        return np.sin(tp * x) * np.sin(tp * y) + x**5 + y**5

    def grad(x, y):
        return (
            tp * np.cos(tp * x) * np.sin(tp * y) + 5 * x**4,
            tp * np.sin(tp * x) * np.cos(tp * y) + 5 * y**4,
        )

    def lap(x, y):
        return -2 * tp**2 * np.sin(tp * x) * np.sin(tp * y) + 20 * (x**3 + y**3)

    def grad_lap(x, y):
        return (
            -2 * tp**3 * np.cos(tp * x) * np.sin(tp * y) + 60 * x**2,
            -2 * tp**3 * np.sin(tp * x) * np.cos(tp * y) + 60 * y**2,
        )

    def bilap(x, y):
        return 4 * tp**4 * np.sin(tp * x) * np.sin(tp * y) + 120 * (x + y)

    return ExactSolution("test-case-1", u, grad, lap, grad_lap, bilap, coeffs or ModelCoefficients())


def test_case_2(coeffs: ModelCoefficients | None = None, epsilon: float = 1.0) -> ExactSolution:
    """Gaussian ridge u = exp(-(x - y)^2 / epsilon) along the line y = x."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    e = float(epsilon)

    def g(r):
        return np.exp(-(r**2) / e)

    def d1(r):
        return -2 * r / e * g(r)

    def d2(r):
        return (4 * r**2 / e**2 - 2 / e) * g(r)

    def d3(r):
        return (-8 * r**3 / e**3 + 12 * r / e**2) * g(r)

    def d4(r):
        return (16 * r**4 / e**4 - 48 * r**2 / e**3 + 12 / e**2) * g(r)

    def grad(x, y):
        v = d1(x - y)
        return v, -v

    def grad_lap(x, y):
        v = 2 * d3(x - y)
        return v, -v

    return ExactSolution(
        f"test-case-2(eps={e:g})",
        lambda x, y: g(x - y),
        grad,
        lambda x, y: 2 * d2(x - y),
        grad_lap,
        lambda x, y: 4 * d4(x - y),
        coeffs or ModelCoefficients(),
    )


def power_sum(p: int, coeffs: ModelCoefficients | None = None) -> ExactSolution:
    """u = x^p + y^p."""
    c = lambda n: math.factorial(p) // math.factorial(p - n) if n <= p else 0  # noqa: E731

    def mono(x, n):
        return c(n) * x ** (p - n) if n <= p else 0 * x

    def u(x, y):
        return x**p + y**p

    return ExactSolution(
        f"x^{p}+y^{p}",
        u,
        lambda x, y: (mono(x, 1), mono(y, 1)),
        lambda x, y: mono(x, 2) + mono(y, 2),
        lambda x, y: (mono(x, 3), mono(y, 3)),
        lambda x, y: mono(x, 4) + mono(y, 4) + 0 * x,
        coeffs or ModelCoefficients(),
    )


def harmonic_cubic(coeffs: ModelCoefficients | None = None) -> ExactSolution:
    """u = x^3 - 3 x y^2 (harmonic)."""
    zero = lambda x, y: 0 * x  # noqa: E731
    return ExactSolution(
        "x^3-3xy^2",
        lambda x, y: x**3 - 3 * x * y**2,
        lambda x, y: (3 * x**2 - 3 * y**2, -6 * x * y),
        zero,
        lambda x, y: (0 * x, 0 * x),
        zero,
        coeffs or ModelCoefficients(),
    )


def patch_solution(k: int, coeffs: ModelCoefficients | None = None) -> ExactSolution:
    """Degree-k polynomial used for patch tests."""
    if k == 3:
        return harmonic_cubic(coeffs)
    return power_sum(k, coeffs)


def exact_solution(test: str, coeffs: ModelCoefficients | None = None, epsilon: float = 1.0, k: int = 2):
    test = str(test)
    if test == "1":
        return test_case_1(coeffs)
    if test == "2":
        return test_case_2(coeffs, epsilon)
    if test == "patch":
        return patch_solution(k, coeffs)
    raise ValueError(f"unknown test {test!r}; choose from {TESTS}")


@dataclass
class ErrorReport:
    err_l2: float
    err_h1: float
    err_energy: float
    h_max: float = math.nan
    n_dofs: int = 0
    level: int | None = None


def cell_coefficients(elements: Sequence[ElementOperators], dofmap, dofs: np.ndarray) -> list[np.ndarray]:
    """Scaled-monomial coefficients of Pi0 u_h on every cell."""
    return [ops.Pi0 @ (dofmap.cell_signs[c] * dofs[dofmap.cell_dofs[c]]) for c, ops in enumerate(elements)]


def compute_errors(
    mesh: PolyMesh,
    k: int,
    dofs: np.ndarray,
    exact: ExactSolution,
    elements: Sequence[ElementOperators] | None = None,
    degree: int | None = None,
) -> ErrorReport:
    """Relative L2, broken H1 and energy errors of Pi0 u_h against ``exact``."""
    coeffs = exact.coeffs
    if elements is None:
        elements = build_elements(mesh, k, coeffs)
    dm = number_dofs(mesh, k)
    coefs = cell_coefficients(elements, dm, np.asarray(dofs, dtype=float))
    a0, a1, a2 = coeffs.alpha0, coeffs.alpha1, coeffs.alpha2
    s = np.zeros(6)  # e_l2, e_h1, e_lap, u_l2, u_h1, u_lap
    for ops, c in zip(elements, coefs):
        rule = ops.load_rule(degree)
        x, y = rule.points[:, 0], rule.points[:, 1]
        w = rule.weights
        u = exact.u(x, y)
        gu = np.column_stack(np.broadcast_arrays(*exact.grad(x, y)))
        lu = exact.lap(x, y) + 0 * x
        e = u - ops.basis.values(rule.points) @ c
        ge = gu - np.einsum("qnd,n->qd", ops.basis.gradients(rule.points), c)
        le = lu - ops.basis.laplacians(rule.points) @ c
        s += [w @ e**2, w @ (ge**2).sum(1), w @ le**2, w @ u**2, w @ (gu**2).sum(1), w @ lu**2]

    def rel(num, den):
        return math.sqrt(num / den) if den > 0 else math.sqrt(num)

    energy_e = a2 * s[2] + a1 * s[1] + a0 * s[0]
    energy_u = a2 * s[5] + a1 * s[4] + a0 * s[3]
    return ErrorReport(rel(s[0], s[3]), rel(s[1], s[4]), rel(energy_e, energy_u), mesh.h_max, dm.n_dofs)


@dataclass
class Solution:
    dofs: np.ndarray
    report: SolveReport
    elements: list[ElementOperators]
    n_dofs: int


def solve_problem(
    mesh: PolyMesh,
    k: int,
    exact: ExactSolution,
    opts: SolveOptions | None = None,
    elements: Sequence[ElementOperators] | None = None,
    threads: int = 1,
    use_exact_gradient: bool = True,
    stabilization: str = "energy",
    condense: bool = True,
) -> Solution:
    """Assemble, clamp the boundary with the data of ``exact`` and solve.

    With ``condense`` the interior moments are eliminated per cell before the
    global solve and recovered afterwards; the solution is the same up to
    round-off, which is much smaller for k >= 4.
    """
    if elements is None:
        elements = build_elements(mesh, k, exact.coeffs, threads, stabilization)
    build = assemble_condensed if condense else assemble
    system = build(mesh, k, exact.coeffs, exact.f, elements=elements)
    red = apply_dirichlet(system, mesh, exact.g0, exact.g1, exact.grad if use_exact_gradient else None)
    u_free, rep = solve_spd(red.A, red.F, opts)
    u = red.expand(u_free)
    if condense:
        u = system.recover(u)
    return Solution(u, rep, list(elements), len(u))


@lru_cache(maxsize=4)
def cached_mesh(family: str, level: int, seed: int = 42) -> PolyMesh:
    return generate_family(family, level, seed)


@lru_cache(maxsize=4)
def cached_elements(
    family: str, level: int, seed: int, k: int, coeffs: ModelCoefficients, threads: int = 1, stabilization: str = "energy"
):
    return build_elements(cached_mesh(family, level, seed), k, coeffs, threads, stabilization)


def rate(e0: float, e1: float, h0: float, h1: float) -> float:
    """log(e0/e1) / log(h0/h1)."""
    if not (e0 > 0 and e1 > 0 and h0 > 0 and h1 > 0) or h0 == h1:
        return math.nan
    return math.log(e0 / e1) / math.log(h0 / h1)


def fitted_rate(h: Sequence[float], e: Sequence[float]) -> float:
    """Least-squares slope of log e against log h."""
    h = np.asarray(h, dtype=float)
    e = np.asarray(e, dtype=float)
    ok = (h > 0) & (e > 0) & np.isfinite(e)
    if ok.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(h[ok]), np.log(e[ok]), 1)[0])


@dataclass
class StudyRow:
    family: str
    k: int
    test: str
    epsilon: float | None
    level: int
    h_max: float
    n_dofs: int
    err_l2: float
    err_h1: float
    err_energy: float
    rate_l2: float | None = None
    rate_h1: float | None = None
    rate_energy: float | None = None
    solve_method: str = ""
    iterations: int = 0
    residual: float = math.nan
    error: str = ""


@dataclass
class StudyResult:
    rows: list[StudyRow] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def last_rate(self, norm: str) -> float:
        """Rate between the last two levels for ``norm`` in l2/h1/energy."""
        v = getattr(self.rows[-1], f"rate_{norm}") if self.rows else None
        return math.nan if v is None else v

    def fitted(self, norm: str, last: int = 3) -> float:
        """Least-squares rate over the last ``last`` levels."""
        rows = self.rows[-last:]
        return fitted_rate([r.h_max for r in rows], [getattr(r, f"err_{norm}") for r in rows])

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            write_rows(fh, self.rows)


def write_rows(fh, rows: Sequence[StudyRow]) -> None:
    w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, extrasaction="ignore")
    w.writeheader()
    for r in rows:
        d = asdict(r)
        for key in ("rate_l2", "rate_h1", "rate_energy", "epsilon"):
            if d[key] is None or (isinstance(d[key], float) and math.isnan(d[key])):
                d[key] = ""
        w.writerow(d)


def convergence_study(
    family: str,
    k: int,
    levels: Sequence[int],
    test: str = "1",
    coeffs: ModelCoefficients | None = None,
    epsilon: float | None = None,
    opts: SolveOptions | None = None,
    seed: int = 42,
    threads: int = 1,
    stabilization: str = "energy",
    condense: bool = True,
) -> StudyResult:
    """One solve per level; failed levels are recorded with NaN errors and the sweep continues."""
    coeffs = coeffs or ModelCoefficients()
    test = str(test)
    eps = 1.0 if epsilon is None else epsilon
    exact = exact_solution(test, coeffs, eps, k)
    out = StudyResult()
    prev = None
    for level in levels:
        mesh = cached_mesh(family, level, seed)
        n = number_dofs(mesh, k).n_dofs
        row = StudyRow(family, k, test, epsilon if test == "2" else None, level, mesh.h_max, n, *[math.nan] * 3)
        o = opts or SolveOptions()
        o = SolveOptions(o.method, o.tol, o.max_iter, level, o.estimate_condition)
        try:
            elements = cached_elements(family, level, seed, k, coeffs, threads, stabilization)
            sol = solve_problem(mesh, k, exact, o, elements, condense=condense)
            err = compute_errors(mesh, k, sol.dofs, exact, elements)
            row.err_l2, row.err_h1, row.err_energy = err.err_l2, err.err_h1, err.err_energy
            row.solve_method, row.iterations, row.residual = sol.report.method, sol.report.iterations, sol.report.residual
        except (SolverError, ElementError) as exc:
            row.error = str(exc)
            rep = getattr(exc, "report", None)
            if rep is not None:
                row.solve_method, row.iterations, row.residual = rep.method, rep.iterations, rep.residual
        if prev is not None:
            for norm in ("l2", "h1", "energy"):
                setattr(
                    row,
                    f"rate_{norm}",
                    rate(getattr(prev, f"err_{norm}"), getattr(row, f"err_{norm}"), prev.h_max, row.h_max),
                )
        out.rows.append(row)
        prev = row
    return out
