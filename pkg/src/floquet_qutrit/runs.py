"""Trajectory runners that turn a RunConfig into named columns."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import mps as mps_engine
from .engine import evolve, init_state
from .io import RunConfig
from .observables import dft, half_chain_entropy, mean_magnetization, overlap, scaled_qfi, zz_correlation


def correlation_pairs(L: int) -> list[tuple[int, int]]:
    """Nearest-neighbour pair at the left edge and the middle-to-right-edge pair."""
    pairs = [(0, 1)]
    mid = L // 2
    if (mid, L - 1) not in pairs and mid < L - 1:
        pairs.append((mid, L - 1))
    return pairs


@dataclass
class RunOutput:
    columns: dict[str, np.ndarray]
    timings: dict[str, float] = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def spectrum(self, name: str) -> dict[str, np.ndarray]:
        spec = dft(self.columns[name])
        return {"omega_over_2pi": spec.omega_over_2pi, "magnitude": spec.magnitudes}


def run_exact(config: RunConfig, observables: tuple[str, ...] | None = None) -> RunOutput:
    params = config.params()
    L = params.L
    psi0 = init_state(L)
    hooks = {
        "overlap": lambda s: overlap(s, psi0),
        "mean_Sz": mean_magnetization,
        "entropy_half": half_chain_entropy,
        "fQ": scaled_qfi,
    }
    for i, j in correlation_pairs(L):
        hooks[f"zz_{i}_{j}"] = lambda s, i=i, j=j: zz_correlation(s, i, j)
    if observables is not None:
        hooks = {k: v for k, v in hooks.items() if k in observables}
    start = time.perf_counter()
    result = evolve(params, hooks)
    elapsed = time.perf_counter() - start
    columns = {"step": result.steps, **result.series}
    return RunOutput(columns, {"evolve_s": elapsed}, {"max_norm_drift": result.max_norm_drift})


def run_mps(config: RunConfig, observables: tuple[str, ...] | None = None) -> RunOutput:
    """Finite TEBD or two-site iTEBD, recording every ``measure_every`` cycles.

    ``discarded`` is the discarded Schmidt weight summed since the previous row.
    Raises :class:`ChiCapExceeded` with the failing step.
    """
    params = config.params()
    policy = mps_engine.TruncationPolicy(config.tebd_tol, config.chi_cap)
    gates = mps_engine.FloquetGates(params, config.trotter_substeps)
    infinite = config.mode == "infinite"
    if infinite:
        state = mps_engine.product_imps("00")
        probes = {
            "mean_Sz": mps_engine.imps_magnetization,
            "entropy_half": lambda s: s.bond_entropy(0),
        }
        step_fn = mps_engine.itebd_step
    else:
        state = mps_engine.product_mps(params.L)
        reference = mps_engine.product_mps(params.L)
        probes = {
            "overlap": lambda s: mps_engine.mps_overlap(s, reference),
            "mean_Sz": mps_engine.mps_mean_magnetization,
            "entropy_half": lambda s: s.bond_entropy(),
            "fQ": lambda s: mps_engine.mps_qfi(s).scaled,
        }
        for i, j in correlation_pairs(params.L):
            probes[f"zz_{i}_{j}"] = lambda s, i=i, j=j: mps_engine.mps_zz_correlation(s, i, j)
        step_fn = mps_engine.tebd_step
    if observables is not None:
        probes = {k: v for k, v in probes.items() if k in observables}
    columns = {"step": [], **{k: [] for k in probes}, "max_chi": [], "discarded": []}
    pending = 0.0

    def record(n, chi):
        columns["step"].append(n)
        for name, fn in probes.items():
            columns[name].append(fn(state))
        columns["max_chi"].append(chi)
        columns["discarded"].append(pending)

    start = time.perf_counter()
    record(0, state.max_chi)
    for n in range(1, params.steps + 1):
        try:
            diag = step_fn(state, params, policy, gates=gates)
        except mps_engine.ChiCapExceeded as exc:
            raise mps_engine.ChiCapExceeded(exc.chi, exc.cap, step=n) from None
        pending += diag.discarded
        if n % params.measure_every == 0:
            record(n, diag.max_chi)
            pending = 0.0
    elapsed = time.perf_counter() - start
    out = {k: np.asarray(v) for k, v in columns.items()}
    diagnostics = {
        "max_chi": int(out["max_chi"].max()),
        "total_discarded": float(out["discarded"].sum()),
        "mode": config.mode,
    }
    return RunOutput(out, {"evolve_s": elapsed}, diagnostics)
