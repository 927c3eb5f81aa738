#!/usr/bin/env python3
"""Plot the CSVs written by ``floquet-qutrit reproduce`` (needs matplotlib).

    python3 scripts/plot_figures.py results          # writes results/*.png
"""

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from floquet_qutrit.io import read_csv
from floquet_qutrit.observables import multipartite_bound


def series(d: Path, column: str, ylabel: str, name: str):
    fig, ax = plt.subplots(2, 1, figsize=(6, 6))
    for f in sorted(d.glob("series_tz*.csv")):
        header, data = read_csv(f)
        label = f.stem.split("tz")[1].replace("p", ".")
        ax[0].plot(data[:, 0], data[:, header.index(column)], "o-", ms=3, label=f"θz={label}")
        _, spec = read_csv(d / f"spectrum_{column}_tz{f.stem.split('tz')[1]}.csv")
        ax[1].plot(spec[:, 0], spec[:, 1], ".-")
    ax[0].set(xlabel="step n", ylabel=ylabel)
    ax[0].legend(fontsize=7, ncol=3)
    ax[1].set(xlabel="ω/2π", ylabel="|DFT|")
    fig.tight_layout()
    fig.savefig(d / name, dpi=150)


def grid(d: Path, observable: str):
    header, data = read_csv(d / f"grid_{observable}.csv")
    tx, tz = np.unique(data[:, 0]), np.unique(data[:, 1])
    values = data[:, 2].reshape(tx.size, tz.size)
    fig, ax = plt.subplots(figsize=(5, 4))
    mesh = ax.pcolormesh(tz, tx, values, shading="nearest")
    for m in (2, 4, 6, 8):
        ax.axvline(m * np.pi / 9, color="w", lw=0.5, ls=":")
    fig.colorbar(mesh, label=observable)
    ax.set(xlabel="θz", ylabel="θx")
    fig.savefig(d / f"grid_{observable}.png", dpi=150)


def overlaps(d: Path):
    fig, ax = plt.subplots(figsize=(6, 4))
    for f in sorted(d.glob("overlap_L*.csv")):
        _, data = read_csv(f)
        ax.plot(data[:, 1], data[:, 2], lw=1, ls="--" if "tz0p00" in f.stem else "-", label=f.stem[8:])
    ax.axhline(0.6, color="gray", lw=0.5)
    ax.set(xscale="log", xlabel="n + 1", ylabel="overlap")
    ax.legend(fontsize=7)
    fig.savefig(d / "overlaps.png", dpi=150)


def qfi(d: Path):
    fig, ax = plt.subplots(figsize=(6, 4))
    for f in sorted(d.glob("qfi_tz*.csv")):
        _, data = read_csv(f)
        ax.plot(data[:, 0], data[:, 1], label=f.stem)
    ax.axhline(multipartite_bound(1), color="k", lw=0.5)
    ax.set(xlabel="step n", ylabel="f_Q")
    ax.legend()
    fig.savefig(d / "qfi.png", dpi=150)


def peaks(d: Path):
    _, rows = read_csv(d / "qfi_peaks.csv")
    _, ext = read_csv(d / "extrapolation.csv")
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(1 / rows[:, 0], rows[:, 3], "o")
    x = np.linspace(0, 1 / rows[:, 0].min(), 20)
    ax.plot(x, ext[0, 0] + ext[0, 1] * x, "--")
    for k in (2, 3, 4):
        ax.axhline(multipartite_bound(k), color="gray", lw=0.5)
    ax.set(xlabel="1/L", ylabel="max f_Q")
    fig.savefig(d / "qfi_peaks.png", dpi=150)


def main(root: Path):
    jobs = {
        "fig2": lambda d: series(d, "mean_Sz", "⟨S^z⟩", "fig2.png"),
        "fig3": lambda d: series(d, "zz_6_11", "⟨S^z_6 S^z_11⟩", "fig3.png"),
        "fig4a": lambda d: (grid(d, "overlap"), grid(d, "entropy")),
        "fig5a": lambda d: grid(d, "qfi"),
        "fig4c": overlaps,
        "fig5b": qfi,
        "fig5c": peaks,
    }
    for name, job in jobs.items():
        if (root / name).is_dir():
            job(root / name)
            print("plotted", name)


if __name__ == "__main__":
    main(Path(sys.argv[1] if len(sys.argv) > 1 else "results"))
