"""(θx, θz) sweeps, lifetime fits, dip detection and the perturbative n_t estimate."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import mps as mps_engine
from .engine import FloquetParams, evolve, init_state
from .observables import half_chain_entropy, overlap, scaled_qfi

OBSERVABLES = ("overlap", "entropy", "qfi")
WORKERS_ENV = "FLOQUET_WORKERS"


class FitDegenerate(ValueError):
    """The oscillation envelope does not decay; ``fit.T`` is infinite."""

    def __init__(self, message: str, fit: "LifetimeFit"):
        super().__init__(message)
        self.fit = fit


@dataclass
class LifetimeFit:
    T: float
    stderr: float
    amplitude: float
    window: tuple[int, int]
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    theta_z: float | None = None


@dataclass
class PhaseGrid:
    """Time-averaged observables on a (θx, θz) grid, indexed [ix, iz]."""

    theta_x: np.ndarray
    theta_z: np.ndarray
    values: dict[str, np.ndarray]
    L: int
    cycles: int
    stride: int = 3
    engine: str = "exact"
    failures: dict[tuple[int, int], str] = field(default_factory=dict)

    def row(self, name: str, theta_x: float) -> np.ndarray:
        ix = int(np.argmin(np.abs(self.theta_x - theta_x)))
        return self.values[name][ix]


def default_workers() -> int:
    return int(os.environ.get(WORKERS_ENV, "1"))


def _exact_cell(args) -> dict[str, float]:
    theta_x, theta_z, L, cycles, observables, ux_mode = args
    psi0 = init_state(L)
    hooks = {}
    if "overlap" in observables:
        hooks["overlap"] = lambda s: overlap(s, psi0)
    if "entropy" in observables:
        hooks["entropy"] = half_chain_entropy
    if "qfi" in observables:
        hooks["qfi"] = scaled_qfi
    params = FloquetParams(L=L, theta_x=theta_x, theta_z=theta_z, steps=cycles, measure_every=3, ux_mode=ux_mode)
    result = evolve(params, hooks)
    return {name: float(series.mean()) for name, series in result.series.items()}


def _mps_cell(args) -> dict[str, float]:
    theta_x, theta_z, L, cycles, observables, tolerance, chi_cap = args
    params = FloquetParams(L=L, theta_x=theta_x, theta_z=theta_z, steps=cycles, measure_every=3)
    policy = mps_engine.TruncationPolicy(tolerance, chi_cap)
    gates = mps_engine.FloquetGates(params)
    state = mps_engine.product_mps(L)
    reference = mps_engine.product_mps(L)
    samples = {name: [] for name in observables}

    def record():
        if "overlap" in observables:
            samples["overlap"].append(mps_engine.mps_overlap(state, reference))
        if "entropy" in observables:
            samples["entropy"].append(state.bond_entropy())
        if "qfi" in observables:
            samples["qfi"].append(mps_engine.mps_qfi(state).scaled)

    record()
    for n in range(1, cycles + 1):
        try:
            mps_engine.tebd_step(state, params, policy, gates=gates)
        except mps_engine.ChiCapExceeded as exc:
            raise mps_engine.ChiCapExceeded(exc.chi, exc.cap, step=n) from None
        if n % 3 == 0:
            record()
    return {name: float(np.mean(v)) for name, v in samples.items()}


def _run_cell(task):
    engine, args = task
    try:
        return (_exact_cell if engine == "exact" else _mps_cell)(args), None
    except Exception as exc:  # recorded per cell; the sweep carries on
        return None, f"{type(exc).__name__}: {exc}"


def sweep(
    theta_x: np.ndarray,
    theta_z: np.ndarray,
    L: int,
    cycles: int,
    engine: str = "exact",
    observables: tuple[str, ...] = OBSERVABLES,
    workers: int | None = None,
    ux_mode: str = "exact",
    tolerance: float = 1e-6,
    chi_cap: int = 600,
) -> PhaseGrid:
    """Time averages at steps 3n (n = 0 included) for every grid cell, from |0...0⟩.

    Cells run independently, in a process pool when ``workers`` > 1; results
    are placed by index, so the grid does not depend on scheduling.  Failed
    cells hold NaN and are listed in ``failures``.
    """
    theta_x = np.atleast_1d(np.asarray(theta_x, dtype=float))
    theta_z = np.atleast_1d(np.asarray(theta_z, dtype=float))
    if theta_x.size == 0 or theta_z.size == 0:
        raise ValueError("grid axes must be nonempty")
    unknown = set(observables) - set(OBSERVABLES)
    if unknown:
        raise ValueError(f"unknown observables {sorted(unknown)}")
    if engine not in ("exact", "mps"):
        raise ValueError("engine must be 'exact' or 'mps'")
    observables = tuple(observables)
    tasks = []
    for tx in theta_x:
        for tz in theta_z:
            if engine == "exact":
                tasks.append((engine, (float(tx), float(tz), L, cycles, observables, ux_mode)))
            else:
                tasks.append((engine, (float(tx), float(tz), L, cycles, observables, tolerance, chi_cap)))
    workers = default_workers() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [_run_cell(t) for t in tasks]
    values = {name: np.full((theta_x.size, theta_z.size), np.nan) for name in observables}
    failures = {}
    for k, (cell, error) in enumerate(results):
        ix, iz = divmod(k, theta_z.size)
        if error is not None:
            failures[(ix, iz)] = error
            continue
        for name in observables:
            values[name][ix, iz] = cell[name]
    return PhaseGrid(theta_x, theta_z, values, L, cycles, 3, engine, failures)


# -- lifetime fits -------------------------------------------------------------


def oscillation_envelope(values: np.ndarray, period: int = 3) -> tuple[np.ndarray, np.ndarray]:
    """Per-period maximum of |x_n| and the step where it occurs."""
    values = np.abs(np.asarray(values, dtype=float))
    steps, peaks = [], []
    for start in range(0, values.size - period + 1, period):
        window = values[start : start + period]
        i = int(np.argmax(window))
        steps.append(start + i)
        peaks.append(window[i])
    return np.array(steps), np.array(peaks)


def fit_lifetime(
    values: np.ndarray, period: int = 3, rel_flat: float = 1e-9, theta_z: float | None = None
) -> LifetimeFit:
    """Fit A e^{-n/T} to the oscillation envelope by least squares on its logarithm.

    ``values`` is sampled every step starting at n = 0.  A non-decaying
    envelope raises :class:`FitDegenerate` carrying a fit with T = inf.
    """
    steps, peaks = oscillation_envelope(values, period)
    if steps.size < 4:
        raise ValueError("series must cover at least four oscillation periods")
    window = (int(steps[0]), int(steps[-1]))
    if np.any(peaks <= 0):
        raise FitDegenerate("envelope touches zero", LifetimeFit(math.inf, math.nan, math.nan, window, theta_z=theta_z))
    logs = np.log(peaks)
    fit = stats.linregress(steps, logs)
    residuals = logs - (fit.intercept + fit.slope * steps)
    if fit.slope >= -rel_flat:
        raise FitDegenerate(
            "envelope does not decay", LifetimeFit(math.inf, math.nan, math.exp(fit.intercept), window, residuals, theta_z)
        )
    T = -1.0 / fit.slope
    # error propagation from the slope
    stderr = fit.stderr / fit.slope**2
    return LifetimeFit(T, stderr, math.exp(fit.intercept), window, residuals, theta_z)


def lifetime_or_inf(values: np.ndarray) -> float:
    try:
        return fit_lifetime(values).T
    except FitDegenerate as exc:
        return exc.fit.T


# -- perturbative thermalization estimate ---------------------------------------


def predict_nt(theta_x: float, theta_z: float, L: int) -> float:
    """n_t = [log(1-η²) - log(1+η²-2η cos χ)] / log η².

    η = 1/sqrt(1 + 2Lδ²) with δ = θx/2, χ = 9θz/2.  Returns inf for θx = 0 and
    NaN when a logarithm argument is not positive.  The closed form is negative
    where cos χ is close to 1.
    """
    delta = theta_x / 2.0
    if delta == 0.0:
        return math.inf
    eta = 1.0 / math.sqrt(1.0 + 2.0 * L * delta**2)
    chi = 4.5 * theta_z
    a = 1.0 - eta**2
    b = 1.0 + eta**2 - 2.0 * eta * math.cos(chi)
    if a <= 0 or b <= 0:
        return math.nan
    return (math.log(a) - math.log(b)) / math.log(eta**2)


def thermalization_steps(theta_x: float, theta_z: float, L: int) -> float:
    """Integer part of :func:`predict_nt` (inf and NaN pass through)."""
    nt = predict_nt(theta_x, theta_z, L)
    return float(math.floor(nt)) if math.isfinite(nt) else nt


def predict_nt_derivative(theta_x: float, theta_z: float, L: int) -> float:
    """Analytic d n_t / d θz."""
    delta = theta_x / 2.0
    eta = 1.0 / math.sqrt(1.0 + 2.0 * L * delta**2)
    chi = 4.5 * theta_z
    b = 1.0 + eta**2 - 2.0 * eta * math.cos(chi)
    return -(2.0 * eta * math.sin(chi) * 4.5 / b) / math.log(eta**2)


def overlap_half_life(theta_x: float, theta_z: float, L: int, max_steps: int = 3000) -> float:
    """First step 3n at which the exact-engine overlap falls to 1/2 (inf if never)."""
    params = FloquetParams(L=L, theta_x=theta_x, theta_z=theta_z, steps=max_steps, measure_every=3)
    psi0 = init_state(L)
    result = evolve(params, {"overlap": lambda s: overlap(s, psi0)})
    below = np.flatnonzero(result.series["overlap"] <= 0.5)
    return float(result.steps[below[0]]) if below.size else math.inf


# -- dips ----------------------------------------------------------------------


def find_dips(values: np.ndarray, axis: np.ndarray, min_prominence: float = 0.0) -> list[float]:
    """Local minima of ``values`` along ``axis`` with parabolic sub-grid refinement.

    ``min_prominence`` drops minima shallower than that against the lower of
    their two neighbours.
    """
    values = np.asarray(values, dtype=float)
    axis = np.asarray(axis, dtype=float)
    if values.size < 5:
        raise ValueError("need at least five points to look for dips")
    dips = []
    for i in range(1, values.size - 1):
        left, mid, right = values[i - 1 : i + 2]
        if not (mid < left and mid < right):
            continue
        if min(left, right) - mid < min_prominence:
            continue
        h = axis[i + 1] - axis[i]
        curvature = left - 2 * mid + right
        offset = 0.5 * (left - right) / curvature if curvature > 0 else 0.0
        dips.append(float(axis[i] + np.clip(offset, -0.5, 0.5) * h))
    return dips


def grid_dips(grid: PhaseGrid, theta_x: float, observable: str = "overlap", min_prominence: float = 0.0) -> list[float]:
    return find_dips(grid.row(observable, theta_x), grid.theta_z, min_prominence)


# -- grid-level diagnostics ------------------------------------------------------


def level_set_cells(values: np.ndarray, level: float) -> np.ndarray:
    """Cells whose value sits on the other side of ``level`` from a 4-neighbour."""
    above = values > level
    mask = np.zeros_like(above)
    mask[1:, :] |= above[1:, :] != above[:-1, :]
    mask[:-1, :] |= above[1:, :] != above[:-1, :]
    mask[:, 1:] |= above[:, 1:] != above[:, :-1]
    mask[:, :-1] |= above[:, 1:] != above[:, :-1]
    return np.argwhere(mask)


def distance_to_level_set(values: np.ndarray, cell: tuple[int, int], level: float) -> int:
    """Chebyshev distance in cells from ``cell`` to the ``level`` contour."""
    cells = level_set_cells(values, level)
    if cells.size == 0:
        return np.iinfo(int).max
    return int(np.abs(cells - np.asarray(cell)).max(axis=1).min())


def top_decile_in_low_entropy_half(overlap_grid: np.ndarray, entropy_grid: np.ndarray) -> float:
    """Fraction of top-decile-overlap cells whose entropy is below the grid median."""
    o = overlap_grid.ravel()
    s = entropy_grid.ravel()
    top = o >= np.quantile(o, 0.9)
    return float(np.mean(s[top] <= np.median(s)))
