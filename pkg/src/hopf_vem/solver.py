"""Direct (sparse Cholesky) and preconditioned CG solves of the reduced SPD system."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from cholespy import CholeskySolverD, MatrixType

METHODS = ("auto", "direct", "cg")
AUTO_DIRECT_MAX_LEVEL = 4
REFINEMENT_STEPS = 3


@dataclass(frozen=True)
class SolveOptions:
    method: str = "auto"
    tol: float = 1e-12
    max_iter: int | None = None
    level: int | None = None  # mesh level, used by the auto rule
    estimate_condition: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown solver method {self.method!r}; choose from {METHODS}")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")

    def resolved_method(self) -> str:
        if self.method != "auto":
            return self.method
        return "direct" if self.level is None or self.level <= AUTO_DIRECT_MAX_LEVEL else "cg"


@dataclass
class SolveReport:
    method: str
    iterations: int
    residual: float
    condition: float | None = None
    converged: bool = True
    history: list[float] = field(default_factory=list, repr=False)


class SolverError(RuntimeError):
    def __init__(self, message: str, report: SolveReport | None = None):
        super().__init__(message)
        self.report = report


def _relative_residual(A, u, F) -> float:
    nf = np.linalg.norm(F)
    r = np.linalg.norm(F - A @ u)
    return float(r / nf) if nf > 0 else float(r)


class CholeskyFactor:
    """CHOLMOD factorization (fill-reducing ordering chosen by the library)."""

    def __init__(self, A: sp.spmatrix):
        C = sp.coo_matrix(A)
        self.n = A.shape[0]
        try:
            self._solver = CholeskySolverD(
                self.n, C.row.astype(np.int32), C.col.astype(np.int32), C.data.astype(np.float64), MatrixType.COO
            )
        except (ValueError, RuntimeError) as exc:
            raise SolverError(f"Cholesky factorization failed: {exc}") from exc

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.ascontiguousarray(b, dtype=np.float64)
        x = np.zeros_like(b)
        self._solver.solve(b, x)
        return x


def solve_direct(A: sp.spmatrix, F: np.ndarray, tol: float = 1e-12) -> tuple[np.ndarray, SolveReport, CholeskyFactor]:
    fac = CholeskyFactor(A)
    u = fac.solve(F)
    res = _relative_residual(A, u, F)
    steps = 0
    # a few steps of iterative refinement for the badly conditioned high-order systems
    while res > tol and steps < REFINEMENT_STEPS:
        du = fac.solve(F - A @ u)
        u_new = u + du
        res_new = _relative_residual(A, u_new, F)
        steps += 1
        if res_new >= res:
            break
        u, res = u_new, res_new
    if not np.all(np.isfinite(u)):
        raise SolverError("Cholesky solve produced non-finite values")
    return u, SolveReport("direct", steps, res), fac


def solve_cg(
    A: sp.spmatrix, F: np.ndarray, tol: float = 1e-12, max_iter: int | None = None, callback=None
) -> tuple[np.ndarray, SolveReport, tuple[list, list]]:
    """Jacobi-preconditioned conjugate gradients from a zero initial guess.

    ``callback(u)`` is called with the iterate after every step. The energy
    norm of the error decreases monotonically; the Euclidean residual recorded
    in the history need not.
    """
    A = sp.csr_matrix(A)
    n = A.shape[0]
    max_iter = max_iter or 10 * n
    d = A.diagonal()
    if np.any(d <= 0):
        raise SolverError("matrix has a nonpositive diagonal entry; not SPD")
    Minv = 1.0 / d
    u = np.zeros(n)
    r = F.astype(float).copy()
    nf = np.linalg.norm(F)
    if nf == 0:
        return u, SolveReport("cg", 0, 0.0), ([], [])
    z = Minv * r
    p = z.copy()
    rz = r @ z
    history = [1.0]
    alphas, betas = [], []
    it = 0
    while history[-1] > tol and it < max_iter:
        Ap = A @ p
        pAp = p @ Ap
        if pAp <= 0:
            rep = SolveReport("cg", it, history[-1], converged=False, history=history)
            raise SolverError("CG breakdown: matrix is not positive definite", rep)
        alpha = rz / pAp
        u += alpha * p
        r -= alpha * Ap
        it += 1
        history.append(float(np.linalg.norm(r) / nf))
        alphas.append(alpha)
        if callback is not None:
            callback(u)
        if history[-1] <= tol:
            break
        z = Minv * r
        rz_new = r @ z
        beta = rz_new / rz
        betas.append(beta)
        rz = rz_new
        p = z + beta * p
    res = _relative_residual(A, u, F)
    rep = SolveReport("cg", it, res, converged=history[-1] <= tol, history=history)
    if not rep.converged:
        raise SolverError(f"CG did not converge in {max_iter} iterations (residual {history[-1]:.2e})", rep)
    return u, rep, (alphas, betas)


def lanczos_from_cg(alphas, betas) -> float | None:
    """Condition estimate of the preconditioned operator from the CG coefficients."""
    m = len(alphas)
    if m == 0:
        return None
    diag = np.empty(m)
    off = np.empty(max(m - 1, 0))
    diag[0] = 1.0 / alphas[0]
    for j in range(1, m):
        diag[j] = 1.0 / alphas[j] + betas[j - 1] / alphas[j - 1]
        off[j - 1] = np.sqrt(betas[j - 1]) / alphas[j - 1]
    ev = sla.eigvalsh_tridiagonal(diag, off)
    return float(ev[-1] / ev[0]) if ev[0] > 0 else float("inf")


def condition_estimate(A: sp.spmatrix, factor: CholeskyFactor | None = None, tol: float = 1e-3) -> float:
    """lambda_max / lambda_min from Lanczos runs (shift-invert through the factor for lambda_min)."""
    A = sp.csr_matrix(A)
    n = A.shape[0]
    if n <= 50:
        ev = np.linalg.eigvalsh(A.toarray())
        return float(ev[-1] / ev[0])
    factor = factor or CholeskyFactor(A)
    lmax = spla.eigsh(A, k=1, which="LA", tol=tol, return_eigenvectors=False)[0]
    inv = spla.LinearOperator((n, n), matvec=lambda x: factor.solve(np.ravel(x)), dtype=float)
    mu = spla.eigsh(inv, k=1, which="LA", tol=tol, return_eigenvectors=False)[0]
    return float(lmax * mu)


def solve_spd(A: sp.spmatrix, F: np.ndarray, opts: SolveOptions | None = None) -> tuple[np.ndarray, SolveReport]:
    """Solve A u = F for SPD ``A``; raises SolverError on breakdown."""
    opts = opts or SolveOptions()
    F = np.asarray(F, dtype=float)
    if A.shape[0] == 0:
        return np.zeros(0), SolveReport(opts.resolved_method(), 0, 0.0)
    method = opts.resolved_method()
    if method == "direct":
        u, rep, fac = solve_direct(A, F, opts.tol)
        if opts.estimate_condition:
            rep.condition = condition_estimate(A, fac)
    else:
        u, rep, (alphas, betas) = solve_cg(A, F, opts.tol, opts.max_iter)
        if opts.estimate_condition:
            rep.condition = lanczos_from_cg(alphas, betas)
    return u, rep
