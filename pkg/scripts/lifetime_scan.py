#!/usr/bin/env python3
"""Noiseless lifetime T(θz) from the decay of the period-3 magnetization envelope.

Small chains (L=4 by default, 20 steps) as in the trapped-ion runs. Writes a
two-column CSV; T = inf marks curves whose envelope does not decay within the
window.
"""

import argparse

import numpy as np

from floquet_qutrit.io import RunConfig, write_csv
from floquet_qutrit.phase_diagram import lifetime_or_inf
from floquet_qutrit.runs import run_exact

ap = argparse.ArgumentParser()
ap.add_argument("--L", type=int, default=4)
ap.add_argument("--theta-x", type=float, default=0.2)
ap.add_argument("--steps", type=int, default=20)
ap.add_argument("--dz", type=float, default=0.1)
ap.add_argument("--out", default="lifetimes.csv")
args = ap.parse_args()

rows = []
for tz in np.arange(0.0, 2.5 + 1e-9, args.dz):
    cfg = RunConfig(L=args.L, theta_x=args.theta_x, theta_z=float(tz), steps=args.steps)
    m = run_exact(cfg, observables=("mean_Sz",)).columns["mean_Sz"]
    rows.append((round(float(tz), 10), lifetime_or_inf(m)))
    print(f"theta_z={tz:4.2f}  T={rows[-1][1]:.1f}")
write_csv(args.out, ["theta_z", "T"], rows)
