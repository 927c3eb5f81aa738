"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 verification failure,
4 engine failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import compiler, spin_ops
from . import phase_diagram as pdg
from .engine import NormDriftError
from .io import (
    ConfigError,
    RunConfig,
    RunManifest,
    config_from_dict,
    parse_config,
    parse_grid,
    write_columns,
    write_csv,
    write_matrix,
)
from .mps import ChiCapExceeded
from .reproduce import FIGURES, reproduce
from .runs import run_exact, run_mps

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_ENGINE = 0, 2, 3, 4

_RUN_FLAGS = {
    "L": "L",
    "theta_x": "theta_x",
    "theta_z": "theta_z",
    "epsilon": "epsilon",
    "steps": "steps",
    "measure_every": "measure_every",
    "ux_mode": "ux_mode",
    "out": "out",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON or YAML run configuration; flags override its values")
    p.add_argument("--L", type=int)
    p.add_argument("--theta-x", dest="theta_x", type=float)
    p.add_argument("--theta-z", dest="theta_z", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--measure-every", dest="measure_every", type=int)
    p.add_argument("--ux-mode", dest="ux_mode", choices=("exact", "brickwork"))
    p.add_argument("--out", help="output directory")


def _config_from_args(args, extra: dict | None = None) -> RunConfig:
    doc = parse_config(args.config).to_dict() if args.config else {}
    for flag, key in {**_RUN_FLAGS, **(extra or {})}.items():
        value = getattr(args, flag, None)
        if value is not None:
            doc[key] = value
    return config_from_dict(doc)


def _out_dir(config: RunConfig, default: str) -> Path:
    out = Path(config.out or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_run(kind: str, config: RunConfig, run, out: Path) -> None:
    write_columns(out / "series.csv", run.columns)
    outputs = ["series.csv"]
    if "mean_Sz" in run.columns:
        write_columns(out / "spectrum_mean_Sz.csv", run.spectrum("mean_Sz"))
        outputs.append("spectrum_mean_Sz.csv")
    RunManifest(kind, config.to_dict(), config.engine, run.timings, run.diagnostics, outputs).write(out / "manifest.json")
    print(out / "series.csv")


def cmd_evolve(args) -> int:
    config = _config_from_args(args)
    _write_run("evolve", config, run_exact(config), _out_dir(config, "out/evolve"))
    return EXIT_OK


def cmd_mps_evolve(args) -> int:
    extra = {"chi_cap": "chi_cap", "tebd_tol": "tebd_tol", "trotter_substeps": "trotter_substeps", "mode": "mode"}
    config = _config_from_args(args, extra)
    config.engine = "mps"
    _write_run("mps-evolve", config, run_mps(config), _out_dir(config, "out/mps"))
    return EXIT_OK


def cmd_sweep(args) -> int:
    observables = tuple(o.strip() for o in args.observables.split(",") if o.strip())
    config = config_from_dict(
        {
            "L": args.L,
            "theta_x": 0.0,
            "theta_z": 0.0,
            "steps": args.cycles,
            "engine": args.engine,
            "grid_x": args.grid_x,
            "grid_z": args.grid_z,
            "observables": list(observables),
            "tebd_tol": args.tebd_tol,
            "chi_cap": args.chi_cap,
            "out": args.out,
        }
    )
    tx, tz = parse_grid(args.grid_x, "grid_x"), parse_grid(args.grid_z, "grid_z")
    start = time.perf_counter()
    grid = pdg.sweep(tx, tz, args.L, args.cycles, args.engine, observables, tolerance=args.tebd_tol, chi_cap=args.chi_cap)
    elapsed = time.perf_counter() - start
    out = _out_dir(config, "out/sweep")
    outputs = []
    for name in observables:
        rows = [(x, z, grid.values[name][i, j]) for i, x in enumerate(tx) for j, z in enumerate(tz)]
        write_csv(out / f"{name}.csv", ["theta_x", "theta_z", name], rows)
        outputs.append(f"{name}.csv")
        if args.matrix:
            write_matrix(out / f"{name}.dat", grid.values[name])
            outputs.append(f"{name}.dat")
    diagnostics = {"failures": {f"{i},{j}": v for (i, j), v in grid.failures.items()}}
    RunManifest("sweep", config.to_dict(), args.engine, {"sweep_s": elapsed}, diagnostics, outputs).write(
        out / "manifest.json"
    )
    for (i, j), message in grid.failures.items():
        print(f"cell ({tx[i]:.4f}, {tz[j]:.4f}) failed: {message}", file=sys.stderr)
    print(out)
    return EXIT_OK


def cmd_compile_check(args) -> int:
    circuit = compiler.compile_coupling(args.axis, args.theta)
    report = {"gates": [g.to_dict() for g in circuit]}
    try:
        report["residuals"] = compiler.verify_coupling(args.axis, args.theta, tol=args.tol, circuit=circuit)
        if args.ledger:
            compiled, ledger = compiler.ledger_compile(circuit)
            explicit = compiler.circuit_unitary(circuit, 2)
            tracked = ledger.operator(2) @ compiler.circuit_unitary(compiled, 2)
            residual = float(np.abs(explicit - tracked).max())
            report["ledger"] = {"gates": [g.to_dict() for g in compiled], "phases": ledger.to_dict(), "residual": residual}
            if residual > args.tol:
                raise compiler.VerificationFailed("ledger-compiled circuit differs from explicit circuit", residual)
    except compiler.VerificationFailed as exc:
        report["error"] = str(exc)
        print(json.dumps(report, indent=2))
        return EXIT_VERIFY
    print(json.dumps(report, indent=2))
    return EXIT_OK


def _finite_or_label(x: float):
    return x if np.isfinite(x) else str(x)


def cmd_predict_nt(args) -> int:
    nt = pdg.predict_nt(args.theta_x, args.theta_z, args.L)
    steps = pdg.thermalization_steps(args.theta_x, args.theta_z, args.L)
    doc = {"theta_x": args.theta_x, "theta_z": args.theta_z, "L": args.L}
    doc.update(n_t=_finite_or_label(nt), steps=_finite_or_label(steps))
    print(json.dumps(doc))
    return EXIT_OK


def cmd_reproduce(args) -> int:
    figures = FIGURES if args.figure == "all" else (args.figure,)
    for fig in figures:
        print(reproduce(fig, args.out, full=args.full))
    return EXIT_OK


def cmd_ops_dump(args) -> int:
    try:
        op = spin_ops.named_operator(args.op, args.theta, args.phi)
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    print(json.dumps({"op": args.op, "theta": args.theta, "phi": args.phi, "real": op.real.tolist(), "imag": op.imag.tolist()}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="floquet-qutrit", description="Spin-1 Floquet chain simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("evolve", help="exact statevector evolution")
    _add_run_flags(p)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("mps-evolve", help="finite TEBD or iTEBD evolution")
    _add_run_flags(p)
    p.add_argument("--chi-cap", dest="chi_cap", type=int)
    p.add_argument("--tebd-tol", dest="tebd_tol", type=float)
    p.add_argument("--trotter-substeps", dest="trotter_substeps", type=int)
    p.add_argument("--mode", choices=("finite", "infinite"))
    p.set_defaults(func=cmd_mps_evolve)

    p = sub.add_parser("sweep", help="(theta_x, theta_z) phase-diagram grid")
    p.add_argument("--grid-x", required=True, help="start:stop:count")
    p.add_argument("--grid-z", required=True, help="start:stop:count")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--cycles", type=int, required=True)
    p.add_argument("--engine", choices=("exact", "mps"), default="exact")
    p.add_argument("--observables", default="overlap,entropy,qfi")
    p.add_argument("--tebd-tol", type=float, default=1e-6)
    p.add_argument("--chi-cap", type=int, default=600)
    p.add_argument("--matrix", action="store_true", help="also write gnuplot matrix files")
    p.add_argument("--out", default="out/sweep")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compile-check", help="compile and verify one spin-spin coupling")
    p.add_argument("--axis", choices=("x", "z"), required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--ledger", action="store_true", help="track Z gates in software")
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_compile_check)

    p = sub.add_parser("predict-nt", help="perturbative thermalization step estimate")
    p.add_argument("--theta-x", type=float, required=True)
    p.add_argument("--theta-z", type=float, required=True)
    p.add_argument("--L", type=int, required=True)
    p.set_defaults(func=cmd_predict_nt)

    p = sub.add_parser("reproduce", help="regenerate figure datasets")
    p.add_argument("figure", choices=FIGURES + ("all",))
    p.add_argument("--out", default="out/reproduce")
    p.add_argument("--full", action="store_true", help="full-size grids instead of desk-scale")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("ops", help="operator utilities")
    ops = p.add_subparsers(dest="ops_command", required=True, parser_class=_Parser)
    d = ops.add_parser("dump", help="print a named operator as JSON")
    d.add_argument("--op", required=True)
    d.add_argument("--theta", type=float, default=0.0)
    d.add_argument("--phi", type=float, default=0.0)
    d.set_defaults(func=cmd_ops_dump)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NormDriftError, ChiCapExceeded, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"engine failure: {exc}", file=sys.stderr)
        return EXIT_ENGINE


if __name__ == "__main__":
    sys.exit(main())
