"""Regenerate the golden element fixtures with the 40-digit reference implementation."""

import argparse
import time
from pathlib import Path

from hopf_vem.oracle import FIXTURE_SET, GOLDEN_DIR, write_fixture


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=GOLDEN_DIR)
    args = ap.parse_args()
    for shape, k in FIXTURE_SET:
        t = time.time()
        path = write_fixture(shape, k, args.out)
        print(f"{path}  ({time.time() - t:.1f}s)")


if __name__ == "__main__":
    main()
