"""Errors of the energy-scaled and the trace-scaled stabilization side by side."""

import argparse

from hopf_vem.cli import parse_levels
from hopf_vem.meshgen import FAMILIES
from hopf_vem.study import convergence_study


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--family", default="remapped-hex", choices=FAMILIES)
    ap.add_argument("--ks", nargs="+", type=int, default=[2, 3, 4])
    ap.add_argument("--levels", default="0..3")
    ap.add_argument("--test", default="1", choices=["1", "2"])
    ap.add_argument("--epsilon", type=float, default=None)
    args = ap.parse_args()
    levels = parse_levels(args.levels)

    for k in args.ks:
        runs = {s: convergence_study(args.family, k, levels, args.test, epsilon=args.epsilon, stabilization=s)
                for s in ("energy", "trace")}
        print(f"k={k}")
        for i, level in enumerate(levels):
            e, t = runs["energy"].rows[i], runs["trace"].rows[i]
            print(f"  level {level}: energy-stab err_l2 {e.err_l2:.3e} err_energy {e.err_energy:.3e} | "
                  f"trace-stab err_l2 {t.err_l2:.3e} err_energy {t.err_energy:.3e}")
        for s, res in runs.items():
            print(f"  {s:6s} last-pair rates l2 {res.last_rate('l2'):.2f} h1 {res.last_rate('h1'):.2f}"
                  f" energy {res.last_rate('energy'):.2f}")


if __name__ == "__main__":
    main()
