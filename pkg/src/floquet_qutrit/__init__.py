"""Simulation of a clean spin-1 chain under a ternary Floquet drive.

Exact statevector and MPS engines, observables (overlap, entanglement,
quantum Fisher information, spectra), (θx, θz) phase-diagram sweeps, and a
compiler from spin-1 couplings to native qudit gates.
"""

from .engine import EvolutionResult, FloquetEngine, FloquetParams, NormDriftError, evolve, floquet_step, init_state
from .observables import (
    QfiResult,
    Spectrum,
    TimeSeries,
    dft,
    half_chain_entropy,
    mean_magnetization,
    multipartite_bound,
    overlap,
    qfi,
    scaled_qfi,
    zz_correlation,
)
from .phase_diagram import FitDegenerate, LifetimeFit, PhaseGrid, find_dips, fit_lifetime, predict_nt, sweep

__all__ = [
    "EvolutionResult",
    "FitDegenerate",
    "FloquetEngine",
    "FloquetParams",
    "LifetimeFit",
    "NormDriftError",
    "PhaseGrid",
    "QfiResult",
    "Spectrum",
    "TimeSeries",
    "dft",
    "evolve",
    "find_dips",
    "fit_lifetime",
    "floquet_step",
    "half_chain_entropy",
    "init_state",
    "mean_magnetization",
    "multipartite_bound",
    "overlap",
    "predict_nt",
    "qfi",
    "scaled_qfi",
    "sweep",
    "zz_correlation",
]
