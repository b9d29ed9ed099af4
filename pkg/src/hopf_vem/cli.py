"""Command-line interface: ``hopf-vem {mesh,solve,convergence,verify-element}``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .assembly import DirichletError, assemble, count_dofs, number_dofs, write_coordinate
from .element import STABILIZATIONS, CellData, ElementError, ModelCoefficients, build_element, element_for
from .mesh import MeshError, audit_regularity, build_mesh, save_mesh
from .meshgen import FAMILIES, generate_family
from .oracle import fixture_paths, load_fixture
from .solver import METHODS, SolveOptions, SolverError
from .study import (
    TESTS,
    StudyRow,
    compute_errors,
    convergence_study,
    exact_solution,
    solve_problem,
    write_rows,
)

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3
K_RANGE = range(2, 7)
EXPERIMENTAL_K = (5, 6)

PI_TOL = 1e-10
GBD_TOL = 1e-11
KERNEL_TOL = 1e-9
PATCH_TOL = 1e-8
GOLDEN_TOL = 1e-10


class InputError(ValueError):
    pass


# -- acceptance bands ------------------------------------------------------------


def rate_bands(test: str, k: int, family: str) -> dict[str, tuple[float, float]]:
    """Expected last-pair rates (centre, half-width) per norm; empty when none apply."""
    if k > 4:
        return {}
    if test == "1":
        bands = {"energy": (k - 1, 0.3), "h1": (k, 0.3)}
        if family != "nonconvex-octagon":
            bands["l2"] = (2 if k == 2 else k + 1, 0.5)
        return bands
    if test == "2":
        return {"l2": {2: (2, 0.4), 3: (4, 0.5), 4: (5, 0.6)}[k]}
    return {}


def in_band(value: float, band: tuple[float, float]) -> bool:
    centre, width = band
    return math.isfinite(value) and abs(value - centre) <= width


# -- argument helpers ------------------------------------------------------------


def parse_levels(text: str) -> list[int]:
    """``"0..3"``, ``"0,1,2"`` or ``"2"``."""
    text = str(text).strip()
    try:
        if ".." in text:
            a, b = text.split("..")
            levels = list(range(int(a), int(b) + 1))
        else:
            levels = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise InputError(f"cannot parse levels {text!r}") from exc
    if not levels:
        raise InputError(f"empty level range {text!r}")
    return levels


def parse_ks(text) -> list[int]:
    return [int(t) for t in str(text).split(",")] if text is not None else [2, 3, 4]


def check_k(k: int) -> int:
    if k not in K_RANGE:
        raise InputError(f"k must be in 2..6, got {k}")
    if k in EXPERIMENTAL_K:
        print(f"warning: k={k} is experimental", file=sys.stderr)
    return k


def resolve_threads(value) -> int:
    if value is None:
        value = os.environ.get("HOPF_VEM_THREADS") or os.cpu_count() or 1
    try:
        n = int(value)
    except ValueError as exc:
        raise InputError(f"invalid thread count {value!r}") from exc
    if n < 1:
        raise InputError("thread count must be >= 1")
    return n


def coefficients(args) -> ModelCoefficients:
    return ModelCoefficients.parse(args.alpha) if args.alpha else ModelCoefficients()


def solve_options(args, level=None) -> SolveOptions:
    return SolveOptions(args.method, args.tol, args.max_iter, level)


# -- commands --------------------------------------------------------------------


def cmd_mesh(args) -> int:
    mesh = generate_family(args.family, args.level, args.seed)
    out = Path(args.out or f"mesh-{args.family}-{args.level}.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    save_mesh(mesh, out)
    nR, nF, nV = mesh.counts
    print(f"{args.family} level {args.level}: {nR} cells, {nF} edges, {nV} vertices, h_max = {mesh.h_max:.6g}")
    print("dofs: " + ", ".join(f"k={k}: {count_dofs(nV, nF, nR, k)}" for k in (2, 3, 4)))
    print(f"regularity: {audit_regularity(mesh)}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_solve(args) -> int:
    k = check_k(args.k)
    coeffs = coefficients(args)
    exact = exact_solution(args.test, coeffs, args.epsilon, k)
    mesh = generate_family(args.family, args.level, args.seed)
    sol = solve_problem(
        mesh,
        k,
        exact,
        solve_options(args, args.level),
        threads=resolve_threads(args.threads),
        stabilization=args.stabilization,
    )
    err = compute_errors(mesh, k, sol.dofs, exact, sol.elements)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    np.savetxt(out / "dofs.txt", sol.dofs, fmt="%.17g")
    dm = number_dofs(mesh, k)
    with open(out / "pi0.csv", "w") as fh:
        nk = sol.elements[0].basis.size
        fh.write("cell,xc,yc,h," + ",".join(f"c{i}" for i in range(nk)) + "\n")
        for c, ops in enumerate(sol.elements):
            coef = ops.Pi0 @ (dm.cell_signs[c] * sol.dofs[dm.cell_dofs[c]])
            xc, yc = ops.basis.center
            fh.write(f"{c},{xc:.17g},{yc:.17g},{ops.basis.h:.17g}," + ",".join(f"{v:.17g}" for v in coef) + "\n")
    if args.matrix:
        write_coordinate(assemble(mesh, k, coeffs, elements=sol.elements).A, args.matrix)

    eps = args.epsilon if args.test == "2" else None
    row = StudyRow(args.family, k, args.test, eps, args.level, mesh.h_max, sol.n_dofs, err.err_l2, err.err_h1,
                   err.err_energy, solve_method=sol.report.method, iterations=sol.report.iterations,
                   residual=sol.report.residual)
    write_rows(sys.stdout, [row])
    print(f"wrote {out / 'dofs.txt'} and {out / 'pi0.csv'}", file=sys.stderr)
    if args.test == "patch" and max(err.err_l2, err.err_h1, err.err_energy) > PATCH_TOL:
        print(f"patch test failed: errors above {PATCH_TOL:g}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_convergence(args) -> int:
    k = check_k(args.k)
    levels = parse_levels(args.levels)
    res = convergence_study(
        args.family,
        k,
        levels,
        args.test,
        coefficients(args),
        args.epsilon if args.test == "2" else None,
        SolveOptions(args.method, args.tol, args.max_iter),
        args.seed,
        resolve_threads(args.threads),
        args.stabilization,
    )
    out = Path(args.out or f"convergence-{args.family}-k{k}-test{args.test}.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    res.write_csv(out)

    print(f"{'level':>5} {'h_max':>10} {'n_dofs':>8} {'err_l2':>11} {'err_h1':>11} {'err_energy':>11}"
          f" {'rate_l2':>8} {'rate_h1':>8} {'rate_en':>8}")
    for r in res.rows:
        rates = [getattr(r, f"rate_{n}") for n in ("l2", "h1", "energy")]
        cells = " ".join(f"{x:8.3f}" if x is not None and math.isfinite(x) else f"{'':8}" for x in rates)
        print(f"{r.level:5d} {r.h_max:10.4g} {r.n_dofs:8d} {r.err_l2:11.4e} {r.err_h1:11.4e} {r.err_energy:11.4e} {cells}")
        if r.error:
            print(f"      level {r.level} failed: {r.error}")

    broken = any(r.error for r in res.rows)
    failed = False
    bands = rate_bands(args.test, k, args.family)
    for norm, band in bands.items():
        last = res.last_rate(norm)
        ok = in_band(last, band)
        failed |= not ok
        print(f"{'PASS' if ok else 'FAIL'} {norm} last-pair rate {last:.3f} (expected {band[0]} +- {band[1]});"
              f" least-squares over last three {res.fitted(norm):.3f}")
    if args.test == "patch":
        worst = max(max(r.err_l2, r.err_h1, r.err_energy) for r in res.rows)
        ok = worst <= PATCH_TOL
        failed |= not ok
        print(f"{'PASS' if ok else 'FAIL'} patch: largest relative error {worst:.3e} (limit {PATCH_TOL:g})")
    print(f"wrote {out}; {'some bands missed' if failed else 'all bands met'}")
    # band misses are reported, not treated as errors; failed solves are
    return EXIT_NUMERICAL if broken else EXIT_OK


def _identity_checks(ops, label: str) -> list[tuple[str, bool, str]]:
    I = np.eye(ops.D.shape[1])
    pil = np.abs(ops.PiL @ ops.D - I).max()
    pi0 = np.abs(ops.Pi0 @ ops.D - I).max()
    gbd = np.abs(ops.G - ops.B @ ops.D).max() / np.abs(ops.G).max()
    ev = np.linalg.eigvalsh(ops.K)
    zeros = int((np.abs(ev) <= KERNEL_TOL * ev[-1]).sum())
    return [
        (f"PiL*D=I {label}", pil <= PI_TOL, f"{pil:.2e}"),
        (f"Pi0*D=I {label}", pi0 <= PI_TOL, f"{pi0:.2e}"),
        (f"G=BD {label}", gbd <= GBD_TOL, f"{gbd:.2e}"),
        (f"kernel {label}", zeros == 1, f"{zeros} zero eigenvalue(s), lambda_2/lambda_max = {ev[1] / ev[-1]:.2e}"),
    ]


def _patch_check(mesh, k, label, stabilization) -> tuple[str, bool, str]:
    exact = exact_solution("patch", ModelCoefficients(), 1.0, k)
    sol = solve_problem(mesh, k, exact, stabilization=stabilization)
    err = compute_errors(mesh, k, sol.dofs, exact, sol.elements)
    worst = max(err.err_l2, err.err_h1, err.err_energy)
    return (f"patch {label}", worst <= PATCH_TOL, f"{worst:.2e}")


def golden_checks(directory=None, stabilization: str = "energy", ks=(2, 3, 4)) -> list[tuple[str, bool, str]]:
    results = []
    paths = fixture_paths(directory) if directory else fixture_paths()
    fixtures = [(p, load_fixture(p)) for p in paths]
    fixtures = [(p, fx) for p, fx in fixtures if fx["k"] in ks]
    if not fixtures:
        return [("golden fixtures", False, "no fixture files found")]
    for path, fx in fixtures:
        k, label = fx["k"], path.stem
        ops = build_element(CellData.standalone(np.array(fx["vertices"], dtype=float)), k, ModelCoefficients(*fx["alpha"]),
                            stabilization)
        for name in ("D", "H", "G", "B", "C", "PiL", "Pi0"):
            ref = fx[name]
            if ref.shape != getattr(ops, name).shape:
                results.append((f"golden {label} {name}", False, f"shape {ref.shape} vs {getattr(ops, name).shape}"))
                continue
            diff = np.abs(ref - getattr(ops, name)).max() / max(1.0, np.abs(ref).max())
            results.append((f"golden {label} {name}", diff <= GOLDEN_TOL, f"{diff:.2e}"))
        results += _identity_checks(ops, label)
        cell_mesh = build_mesh(fx["vertices"], [list(range(len(fx["vertices"])))])
        results.append(_patch_check(cell_mesh, k, label, stabilization))
    return results


def family_checks(family, levels, ks, seed, stabilization) -> list[tuple[str, bool, str]]:
    results = []
    for level in levels:
        mesh = generate_family(family, level, seed)
        for k in ks:
            worst: dict[str, tuple[bool, str, str]] = {}
            for c in range(mesh.n_cells):
                ops = element_for(mesh, c, k, stabilization=stabilization)
                for name, ok, detail in _identity_checks(ops, f"cell {c}"):
                    key = name.split()[0]
                    if key not in worst or (worst[key][0] and not ok):
                        worst[key] = (ok, name, detail)
            for key, (ok, name, detail) in worst.items():
                results.append((f"{key} {family} level {level} k={k} ({'all cells' if ok else name})", ok, detail))
            results.append(_patch_check(mesh, k, f"{family} level {level} k={k}", stabilization))
    return results


def cmd_verify_element(args) -> int:
    ks = [check_k(k) for k in parse_ks(args.k)]
    if args.family:
        results = family_checks(args.family, parse_levels(args.levels), ks, args.seed, args.stabilization)
    else:
        results = golden_checks(args.golden, args.stabilization, ks)
    n_fail = 0
    for name, ok, detail in results:
        n_fail += not ok
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    print(f"{len(results) - n_fail}/{len(results)} checks passed")
    return EXIT_NUMERICAL if n_fail else EXIT_OK


# -- parser ----------------------------------------------------------------------


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    ap = argparse.ArgumentParser(prog="hopf-vem", description="C1 virtual elements for the fourth-order HOPF equation.")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file with flag values (command-line flags win)")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--threads", default=None, help="worker threads (default: $HOPF_VEM_THREADS or all cores)")

    problem = argparse.ArgumentParser(add_help=False)
    problem.add_argument("--family", choices=FAMILIES, default="remapped-quad")
    problem.add_argument("--k", type=int, default=2)
    problem.add_argument("--alpha", default="1,1,1", help="alpha0,alpha1,alpha2")
    problem.add_argument("--test", choices=TESTS, default="1")
    problem.add_argument("--epsilon", type=float, default=1.0, help="length scale for test 2")
    problem.add_argument("--method", choices=METHODS, default="auto")
    problem.add_argument("--tol", type=float, default=1e-12)
    problem.add_argument("--max-iter", type=int, default=None)
    problem.add_argument("--stabilization", choices=STABILIZATIONS, default="energy")

    subs = {}
    p = sub.add_parser("mesh", parents=[common], help="generate a mesh and write it as JSON")
    p.add_argument("--family", choices=FAMILIES, default="remapped-quad")
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_mesh)
    subs["mesh"] = p

    p = sub.add_parser("solve", parents=[common, problem], help="solve one problem and report its errors")
    p.add_argument("--level", type=int, default=0)
    p.add_argument("--out", default="solve-out", help="output directory")
    p.add_argument("--matrix", default=None, help="also write the assembled K+M in coordinate format")
    p.set_defaults(func=cmd_solve)
    subs["solve"] = p

    p = sub.add_parser("convergence", parents=[common, problem], help="sweep levels and report rates")
    p.add_argument("--levels", default="0..3")
    p.add_argument("--out", default=None, help="CSV path")
    p.set_defaults(func=cmd_convergence)
    subs["convergence"] = p

    p = sub.add_parser("verify-element", parents=[common], help="check element identities and golden matrices")
    p.add_argument("--k", default=None, help="comma-separated degrees (default 2,3,4)")
    p.add_argument("--family", choices=FAMILIES, default=None, help="check generated cells instead of fixtures")
    p.add_argument("--levels", default="0..1")
    p.add_argument("--golden", type=Path, default=None, help="fixture directory")
    p.add_argument("--stabilization", choices=STABILIZATIONS, default="energy")
    p.set_defaults(func=cmd_verify_element)
    subs["verify-element"] = p
    return ap, subs


def parse_args(argv=None) -> argparse.Namespace:
    ap, subs = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        try:
            config = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(config, dict):
            raise InputError("config file must hold a JSON object")
        p = subs[args.command]
        known = {a.dest for a in p._actions}
        unknown = set(k.replace("-", "_") for k in config) - known
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        p.set_defaults(**{k.replace("-", "_"): v for k, v in config.items()})
        args = ap.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        return args.func(args)
    except (InputError, MeshError, DirichletError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (SolverError, ElementError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
