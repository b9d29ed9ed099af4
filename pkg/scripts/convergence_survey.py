"""Test Case 1 convergence sweep over every family and k, with the expected rate bands."""

import argparse
import time
from pathlib import Path

from hopf_vem.cli import in_band, parse_levels, rate_bands
from hopf_vem.meshgen import FAMILIES
from hopf_vem.study import convergence_study


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--families", nargs="+", default=list(FAMILIES), choices=FAMILIES)
    ap.add_argument("--ks", nargs="+", type=int, default=[2, 3, 4])
    ap.add_argument("--levels", default="0..3")
    ap.add_argument("--stabilization", default="energy", choices=["energy", "trace"])
    ap.add_argument("--csv-dir", type=Path, default=None, help="write one CSV per (family, k)")
    args = ap.parse_args()
    levels = parse_levels(args.levels)

    t0 = time.time()
    n_miss = 0
    for family in args.families:
        for k in args.ks:
            res = convergence_study(family, k, levels, "1", stabilization=args.stabilization)
            if args.csv_dir:
                args.csv_dir.mkdir(parents=True, exist_ok=True)
                res.write_csv(args.csv_dir / f"tc1-{family}-k{k}.csv")
            cells = []
            for norm, band in rate_bands("1", k, family).items():
                r = res.last_rate(norm)
                ok = in_band(r, band)
                n_miss += not ok
                cells.append(f"{norm} {r:6.3f} {'ok' if ok else 'MISS'} ({band[0]}+-{band[1]})")
            print(f"{family:18s} k={k}  " + "  ".join(cells) + f"  [{time.time() - t0:.0f}s]")
    print(f"{n_miss} rate(s) outside their band")


if __name__ == "__main__":
    main()
