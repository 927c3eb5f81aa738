"""Regenerate the figure datasets.

Each figure id maps to a fixed parameter set.  Grid figures default to a
desk-scale reduction (L=8, 25x25 cells, 150 cycles); ``full=True`` restores
L=10 and 500 cycles.  Data files are deterministic; only the manifest carries
timings.
"""

from __future__ import annotations

import math
import time
from pathlib import Path

import numpy as np

from . import mps as mps_engine
from . import phase_diagram as pdg
from .engine import FloquetParams
from .io import RunConfig, RunManifest, write_columns, write_csv, write_matrix
from .observables import multipartite_bound
from .runs import run_exact

FIGURES = ("fig2", "fig3", "fig4a", "fig4c", "fig5a", "fig5b", "fig5c", "dips")
LEGEND_THETA_Z = (0.0, 0.5, 1.0, 1.5, 2.0, 2.5)


def _tag(x: float) -> str:
    return f"{x:.2f}".replace(".", "p")


def _series_figure(out: Path, L: int, steps: int, theta_zs, pairs_name: str) -> tuple[list[str], dict]:
    files = []
    lifetimes = []
    for tz in theta_zs:
        cfg = RunConfig(L=L, theta_x=0.2, theta_z=tz, steps=steps)
        run = run_exact(cfg, observables=("mean_Sz", pairs_name))
        name = out / f"series_tz{_tag(tz)}.csv"
        write_columns(name, {k: run.columns[k] for k in ("step", "mean_Sz", pairs_name)})
        files.append(name.name)
        for column in ("mean_Sz", pairs_name):
            spec = run.spectrum(column)
            sname = out / f"spectrum_{column}_tz{_tag(tz)}.csv"
            write_columns(sname, spec)
            files.append(sname.name)
        lifetimes.append((tz, pdg.lifetime_or_inf(run.columns["mean_Sz"])))
    write_csv(out / "lifetimes.csv", ["theta_z", "T"], lifetimes)
    files.append("lifetimes.csv")
    return files, {"theta_z": list(theta_zs), "L": L, "theta_x": 0.2, "steps": steps}


def fig2(out: Path, full: bool = False):
    return _series_figure(out, 4, 20, LEGEND_THETA_Z, "zz_0_1")


def fig3(out: Path, full: bool = False):
    return _series_figure(out, 12, 200, LEGEND_THETA_Z, "zz_6_11")


def _grid_axes(full: bool):
    n = 25
    L, cycles = (10, 500) if full else (8, 150)
    axis = np.linspace(0.0, math.pi, n)
    return axis, axis.copy(), L, cycles


_GRID_CACHE: dict = {}


def _cached_grid(full: bool) -> pdg.PhaseGrid:
    if full not in _GRID_CACHE:
        tx, tz, L, cycles = _grid_axes(full)
        _GRID_CACHE[full] = pdg.sweep(tx, tz, L, cycles)
    return _GRID_CACHE[full]


def _write_grid(out: Path, grid: pdg.PhaseGrid, names) -> list[str]:
    files = []
    for name in names:
        rows = []
        for ix, tx in enumerate(grid.theta_x):
            for iz, tz in enumerate(grid.theta_z):
                rows.append((tx, tz, grid.values[name][ix, iz]))
        write_csv(out / f"grid_{name}.csv", ["theta_x", "theta_z", name], rows)
        write_matrix(out / f"grid_{name}.dat", grid.values[name])
        files += [f"grid_{name}.csv", f"grid_{name}.dat"]
    return files


def _grid_meta(grid: pdg.PhaseGrid) -> dict:
    return {
        "L": grid.L,
        "cycles": grid.cycles,
        "theta_x": grid.theta_x,
        "theta_z": grid.theta_z,
        "failures": {f"{i},{j}": v for (i, j), v in grid.failures.items()},
    }


def fig4a(out: Path, full: bool = False):
    grid = _cached_grid(full)
    return _write_grid(out, grid, ("overlap", "entropy")), _grid_meta(grid)


def fig5a(out: Path, full: bool = False):
    grid = _cached_grid(full)
    return _write_grid(out, grid, ("qfi",)), _grid_meta(grid)


def fig4c(out: Path, full: bool = False):
    cycles = 1000 if full else 300
    runs = [(L, 0.5) for L in (4, 6, 8, 10, 12)] + [(10, 0.0)]
    files = []
    for L, tz in runs:
        cfg = RunConfig(L=L, theta_x=0.2, theta_z=tz, steps=cycles, measure_every=3)
        run = run_exact(cfg, observables=("overlap",))
        name = out / f"overlap_L{L}_tz{_tag(tz)}.csv"
        steps = run.columns["step"]
        write_columns(name, {"step": steps, "shifted_step": steps + 1, "overlap": run.columns["overlap"]})
        files.append(name.name)
    return files, {"theta_x": 0.2, "cycles": cycles, "runs": runs}


def fig5b(out: Path, full: bool = False):
    cycles = 500 if full else 150
    files = []
    for tz in (0.0, 0.5, 1.0):
        cfg = RunConfig(L=10, theta_x=0.2, theta_z=tz, steps=cycles, measure_every=3)
        run = run_exact(cfg, observables=("fQ",))
        name = out / f"qfi_tz{_tag(tz)}.csv"
        write_columns(name, {"step": run.columns["step"], "fQ": run.columns["fQ"]})
        files.append(name.name)
    return files, {"L": 10, "theta_x": 0.2, "cycles": cycles, "separable_bound": multipartite_bound(1)}


def qfi_peak(L: int, theta_x: float, theta_z: float, cycles: int = 100, tolerance: float = 1e-6, chi_cap: int = 600):
    """Maximum of f_Q over steps 3n of a finite TEBD run from |0...0⟩."""
    params = FloquetParams(L=L, theta_x=theta_x, theta_z=theta_z, steps=cycles)
    policy = mps_engine.TruncationPolicy(tolerance, chi_cap)
    gates = mps_engine.FloquetGates(params)
    state = mps_engine.product_mps(L)
    best, best_step = mps_engine.mps_qfi(state).scaled, 0
    for n in range(1, cycles + 1):
        mps_engine.tebd_step(state, params, policy, gates=gates)
        if n % 3 == 0:
            f = mps_engine.mps_qfi(state).scaled
            if f > best:
                best, best_step = f, n
    return best, best_step


def extrapolate_inverse_l(sizes, values) -> tuple[float, float]:
    """Least-squares line in 1/L; returns (intercept at 1/L = 0, slope)."""
    slope, intercept = np.polyfit(1.0 / np.asarray(sizes, dtype=float), np.asarray(values, dtype=float), 1)
    return float(intercept), float(slope)


FIG5C_SIZES = (8, 12, 16, 20)
FIG5C_THETA_Z = (0.02, 0.03, 0.04, 0.05, 0.06)


def fig5c_peaks(sizes=FIG5C_SIZES, theta_zs=FIG5C_THETA_Z, theta_x: float = 0.04, cycles: int = 100):
    """Per-L maximum of f_Q over time and over the θz scan."""
    rows = []
    for L in sizes:
        best = max((qfi_peak(L, theta_x, tz, cycles) + (tz,) for tz in theta_zs), key=lambda r: r[0])
        rows.append((L, best[2], best[1], best[0]))
    return rows


def fig5c(out: Path, full: bool = False):
    rows = fig5c_peaks()
    write_csv(out / "qfi_peaks.csv", ["L", "theta_z", "step", "fQ_max"], rows)
    limit, slope = extrapolate_inverse_l([r[0] for r in rows], [r[3] for r in rows])
    write_csv(out / "extrapolation.csv", ["fQ_inf", "slope"], [(limit, slope)])
    bounds = [(k, multipartite_bound(k)) for k in range(1, 6)]
    write_csv(out / "bounds.csv", ["k", "fQ_bound"], bounds)
    return ["qfi_peaks.csv", "extrapolation.csv", "bounds.csv"], {"theta_x": 0.04, "cycles": 100}


def dips_scan(L: int = 8, theta_x: float = 0.05, n: int = 60, cycles: int = 150) -> pdg.PhaseGrid:
    return pdg.sweep([theta_x], np.linspace(0.0, math.pi, n), L, cycles, observables=("overlap",))


def dips(out: Path, full: bool = False):
    grid = dips_scan()
    row = grid.values["overlap"][0]
    nt = [pdg.predict_nt(0.05, tz, grid.L) for tz in grid.theta_z]
    write_columns(out / "overlap_row.csv", {"theta_z": grid.theta_z, "overlap": row, "n_t": nt})
    found = pdg.find_dips(row, grid.theta_z)
    write_csv(out / "dips.csv", ["theta_z"], [(d,) for d in found])
    return ["overlap_row.csv", "dips.csv"], {"L": grid.L, "theta_x": 0.05, "cycles": grid.cycles}


_BUILDERS = {
    "fig2": fig2,
    "fig3": fig3,
    "fig4a": fig4a,
    "fig4c": fig4c,
    "fig5a": fig5a,
    "fig5b": fig5b,
    "fig5c": fig5c,
    "dips": dips,
}


def reproduce(figure: str, out_dir: str | Path, full: bool = False) -> Path:
    """Write the datasets for ``figure`` under ``out_dir/figure`` plus a manifest."""
    if figure not in _BUILDERS:
        raise KeyError(f"unknown figure id {figure!r}; choose from {FIGURES}")
    out = Path(out_dir) / figure
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    files, meta = _BUILDERS[figure](out, full)
    manifest = RunManifest(
        kind=f"reproduce:{figure}",
        config={"figure": figure, "full": full, **meta},
        engine="mps" if figure == "fig5c" else "exact",
        timings={"total_s": time.perf_counter() - start},
        outputs=sorted(files),
    )
    manifest.write(out / "manifest.json")
    return out
