"""Condition numbers of the reduced systems, with and without static condensation."""

import argparse

from hopf_vem.assembly import apply_dirichlet, assemble, assemble_condensed, build_elements
from hopf_vem.cli import parse_levels
from hopf_vem.meshgen import FAMILIES, generate_family
from hopf_vem.solver import condition_estimate
from hopf_vem.study import test_case_1


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--families", nargs="+", default=list(FAMILIES), choices=FAMILIES)
    ap.add_argument("--ks", nargs="+", type=int, default=[2, 3, 4])
    ap.add_argument("--levels", default="0..2")
    ap.add_argument("--stabilization", default="energy", choices=["energy", "trace"])
    args = ap.parse_args()

    ex = test_case_1()
    print(f"{'family':18s} {'lvl':>3} {'k':>2} {'n_free':>7} {'cond(full)':>11} {'cond(condensed)':>15}")
    for family in args.families:
        for level in parse_levels(args.levels):
            mesh = generate_family(family, level)
            for k in args.ks:
                els = build_elements(mesh, k, ex.coeffs, stabilization=args.stabilization)
                full = apply_dirichlet(assemble(mesh, k, ex.coeffs, ex.f, elements=els), mesh, ex.g0, ex.g1, ex.grad)
                cond = apply_dirichlet(assemble_condensed(mesh, k, ex.coeffs, ex.f, elements=els), mesh, ex.g0,
                                       ex.g1, ex.grad)
                print(f"{family:18s} {level:3d} {k:2d} {full.n:7d} {condition_estimate(full.A):11.3e}"
                      f" {condition_estimate(cond.A):15.3e}")


if __name__ == "__main__":
    main()
