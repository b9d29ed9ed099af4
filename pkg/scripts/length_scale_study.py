"""Test Case 2 sweep over the length scale: L2 rates and the error ordering in epsilon."""

import argparse
import time
from pathlib import Path

import numpy as np

from hopf_vem.cli import in_band, parse_levels, rate_bands
from hopf_vem.study import convergence_study


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--families", nargs="+", default=["randomized-quad", "remapped-hex"])
    ap.add_argument("--ks", nargs="+", type=int, default=[2, 3, 4])
    ap.add_argument("--epsilons", nargs="+", type=float, default=[1.0, 1e-1, 1e-2])
    ap.add_argument("--levels", default="0..3")
    ap.add_argument("--csv-dir", type=Path, default=None)
    args = ap.parse_args()
    levels = parse_levels(args.levels)

    t0 = time.time()
    for family in args.families:
        for k in args.ks:
            band = rate_bands("2", k, family)["l2"]
            errs = {}
            for eps in args.epsilons:
                res = convergence_study(family, k, levels, "2", epsilon=eps)
                errs[eps] = res.column("err_l2")
                if args.csv_dir:
                    args.csv_dir.mkdir(parents=True, exist_ok=True)
                    res.write_csv(args.csv_dir / f"tc2-{family}-k{k}-eps{eps:g}.csv")
                r = res.last_rate("l2")
                print(f"{family:16s} k={k} eps={eps:<6g} L2 rate {r:6.3f} {'ok' if in_band(r, band) else 'MISS'}"
                      f"  errors {' '.join(f'{v:.2e}' for v in errs[eps])}  [{time.time() - t0:.0f}s]")
            lo, hi = min(args.epsilons), max(args.epsilons)
            print(f"    error(eps={lo:g}) > error(eps={hi:g}) at every level: {bool(np.all(errs[lo] > errs[hi]))}")


if __name__ == "__main__":
    main()
