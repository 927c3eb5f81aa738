#!/usr/bin/env python3
"""Regenerate every figure dataset into one output directory.

    python3 scripts/run_figures.py --out results
    python3 scripts/run_figures.py --out results --only fig2 fig4c
    python3 scripts/run_figures.py --out results --full   # L=10, 500 cycle grids

fig5c runs finite TEBD up to L=20 and takes several minutes.
"""

import argparse
import time

from floquet_qutrit.reproduce import FIGURES, reproduce


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--only", nargs="+", choices=FIGURES, default=list(FIGURES))
    ap.add_argument("--full", action="store_true")
    args = ap.parse_args()
    for fig in args.only:
        t0 = time.perf_counter()
        path = reproduce(fig, args.out, full=args.full)
        print(f"{fig:6s} -> {path}  ({time.perf_counter() - t0:.1f} s)")


if __name__ == "__main__":
    main()
