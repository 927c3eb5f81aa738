"""Compilation of spin-1 couplings into native qudit gates.

Each spin-1 site lives in a four-level ion encoding with basis (a, +, 0, -),
where |a⟩ is an auxiliary level.  The native entangling gate MS(θ) carries
unwanted local terms on the (+, 0) block; dressing it with diagonal Z gates
moves those phases onto |a⟩, which never couples to the qutrit levels.  Local
rotations then conjugate the remaining λ1⊗λ1 coupling into S^x⊗S^x or
S^z⊗S^z.

Alternatively the diagonal dressing can be dropped and tracked in software as
a :class:`PhaseLedger` by shifting the phases of later gates.

Gate sequences are listed in time order (first element acts first).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import spin_ops
from .spin_ops import QUDIT_DIM, QUDIT_LEVELS

TWO_PI = 2 * np.pi


class VerificationFailed(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (max residual {residual:.3e})")
        self.residual = residual


class NonDiagonalResidual(RuntimeError):
    """A tracked phase cannot be absorbed into the phase of a later gate."""


@dataclass(frozen=True)
class Gate:
    """One native operation.

    kind is "MS" (two sites), "R" (rotation R_k on one site, ``index`` = k)
    or "Z" (diagonal phase gate between ``levels``).
    """

    kind: str
    sites: tuple[int, ...]
    theta: float
    phi: float = 0.0
    index: int = 0
    levels: tuple[str, str] | None = None

    def matrix(self) -> np.ndarray:
        if self.kind == "MS":
            return spin_ops.ms_gate(self.theta, self.phi)
        if self.kind == "R":
            return spin_ops.qudit_rotation(self.index, self.theta, self.phi)
        if self.kind == "Z":
            return spin_ops.z_rotation(self.levels, self.theta)
        raise ValueError(f"unknown gate kind {self.kind!r}")

    def to_dict(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if v is not None}
        out["sites"] = list(self.sites)
        if self.levels is not None:
            out["levels"] = list(self.levels)
        if self.kind != "R":
            out.pop("index", None)
        return out


GateSequence = list[Gate]


def rot(site: int, k: int, theta: float, phi: float) -> Gate:
    return Gate("R", (site,), theta, phi, index=k)


def zgate(site: int, levels: tuple[str, str], theta: float) -> Gate:
    return Gate("Z", (site,), theta, levels=levels)


def ms(a: int, b: int, theta: float, phi: float = 0.0) -> Gate:
    return Gate("MS", (a, b), theta, phi)


# -- dense simulation ------------------------------------------------------------


def embed_gate(gate_matrix: np.ndarray, sites: tuple[int, ...], n_sites: int, dim: int = QUDIT_DIM) -> np.ndarray:
    """Full-register matrix of a gate on adjacent ``sites`` (ascending)."""
    lo = min(sites)
    if tuple(sites) != tuple(range(lo, lo + len(sites))):
        raise ValueError(f"gate sites {sites} must be adjacent and ascending")
    left = np.eye(dim**lo)
    right = np.eye(dim ** (n_sites - lo - len(sites)))
    return np.kron(np.kron(left, gate_matrix), right)


def circuit_unitary(circuit: GateSequence, n_sites: int) -> np.ndarray:
    u = np.eye(QUDIT_DIM**n_sites, dtype=complex)
    for gate in circuit:
        u = embed_gate(gate.matrix(), gate.sites, n_sites) @ u
    return u


def qutrit_indices(n_sites: int) -> np.ndarray:
    """Register indices whose every site sits in (+, 0, -)."""
    grids = np.meshgrid(*([np.arange(QUDIT_DIM)] * n_sites), indexing="ij")
    mask = np.ones((QUDIT_DIM,) * n_sites, dtype=bool)
    for g in grids:
        mask &= g > 0
    return np.flatnonzero(mask.reshape(-1))


def restrict_to_qutrits(u: np.ndarray, n_sites: int) -> np.ndarray:
    idx = qutrit_indices(n_sites)
    return u[np.ix_(idx, idx)]


def leakage(u: np.ndarray, n_sites: int) -> float:
    """Largest matrix element coupling the qutrit subspace to anything else."""
    idx = qutrit_indices(n_sites)
    rest = np.setdiff1d(np.arange(u.shape[0]), idx)
    if rest.size == 0:
        return 0.0
    return float(max(np.abs(u[np.ix_(rest, idx)]).max(), np.abs(u[np.ix_(idx, rest)]).max()))


def phase_aligned_residual(u: np.ndarray, target: np.ndarray) -> float:
    """max |u - c·target| with the global phase c fixed on the largest target entry."""
    k = np.unravel_index(np.argmax(np.abs(target)), target.shape)
    c = u[k] / target[k]
    c /= abs(c)
    return float(np.abs(u - c * target).max())


# -- auxiliary-level isolation ------------------------------------------------------------


def dressing(site: int, theta: float) -> GateSequence:
    """Z_{a+}(-θ) Z_{+0}(-θ/2) on one qudit, in time order."""
    return [zgate(site, ("+", "0"), -theta / 2.0), zgate(site, ("a", "+"), -theta)]


def dressed_ms(a: int, b: int, theta: float) -> GateSequence:
    return [ms(a, b, theta)] + dressing(a, theta) + dressing(b, theta)


@dataclass
class IsolationResult:
    sequence: GateSequence
    residual_ops: tuple[np.ndarray, np.ndarray]
    identity_residual: float
    aux_residual: float


def aux_isolation(theta: float, tol: float = 1e-10) -> IsolationResult:
    """Dress MS(θ) so that its local terms act only on the auxiliary level.

    Verifies D⊗D · MS(θ) = e^{iθ/2} (A⊗1)(1⊗A) exp(-iθ/2 λ1⊗λ1) with A
    diagonal and trivial on (+, 0, -).
    """
    seq = dressed_ms(0, 1, theta)
    dressed = circuit_unitary(seq, 2)
    l1 = spin_ops.embed_generator(spin_ops.gell_mann(1))
    coupling = spin_ops.expm_hermitian(np.kron(l1, l1), theta / 2.0)
    # A is whatever diagonal remains once the coupling and global phase are divided out
    remainder = dressed @ coupling.conj().T * np.exp(-0.5j * theta)
    # diagonal entries are a1[i] * a2[j]; normalize the split on the "+" level
    grid = np.diag(remainder).reshape(QUDIT_DIM, QUDIT_DIM)
    a1 = np.diag(grid[:, 1] / grid[1, 1])
    a2 = np.diag(grid[1, :])
    rebuilt = np.exp(0.5j * theta) * np.kron(a1, np.eye(QUDIT_DIM)) @ np.kron(np.eye(QUDIT_DIM), a2) @ coupling
    identity_residual = float(np.abs(dressed - rebuilt).max())
    aux_residual = float(max(np.abs(a[1:, 1:] - np.eye(3)).max() for a in (a1, a2)))
    if identity_residual > tol:
        raise VerificationFailed("dressed MS does not factor as e^{iθ/2} A1 A2 exp(-iθ/2 λ1⊗λ1)", identity_residual)
    if aux_residual > tol:
        raise VerificationFailed("residual local operators act on qutrit levels", aux_residual)
    return IsolationResult(seq, (a1, a2), identity_residual, aux_residual)


# -- spin-spin couplings ---------------------------------------------------------


def _basis_change(site: int, axis: str) -> tuple[GateSequence, GateSequence]:
    """Rotations V (and V†) with V λ1 V† equal to S^x or S^z on one qutrit.

    axis x: V = R_2(π/2, π/2).
    axis z: V = R_3(π, 0) R_1(-π/2, π/2); R_1 maps λ1 to λ3 = diag(1, -1, 0)
    and R_3(π, 0) swaps the 0 and - levels, turning λ3 into S^z.
    Returned as (V, V†) gate lists in time order.
    """
    half = np.pi / 2
    if axis == "x":
        return [rot(site, 2, half, half)], [rot(site, 2, half, 3 * half)]
    if axis == "z":
        v = [rot(site, 1, -half, half), rot(site, 3, np.pi, 0.0)]
        v_dag = [rot(site, 3, np.pi, np.pi), rot(site, 1, -half, 3 * half)]
        return v, v_dag
    raise ValueError(f"coupling axis must be 'x' or 'z', got {axis!r}")


def compile_coupling(axis: str, theta: float, sites: tuple[int, int] = (0, 1)) -> GateSequence:
    """Native circuit equal to exp(-iθ/2 S^a⊗S^a) on the qutrit subspace, up to global phase."""
    a, b = sites
    va, va_dag = _basis_change(a, axis)
    vb, vb_dag = _basis_change(b, axis)
    return va_dag + vb_dag + dressed_ms(a, b, theta) + va + vb


def verify_coupling(axis: str, theta: float, tol: float = 1e-9, circuit: GateSequence | None = None) -> dict:
    """Residuals of a compiled coupling against its target; raises on failure."""
    circuit = compile_coupling(axis, theta) if circuit is None else circuit
    u = circuit_unitary(circuit, 2)
    target = spin_ops.two_site_coupling(axis, theta)
    residual = phase_aligned_residual(restrict_to_qutrits(u, 2), target)
    leak = leakage(u, 2)
    if residual > tol:
        raise VerificationFailed(f"compiled {axis}{axis} coupling misses its target", residual)
    if leak > tol:
        raise VerificationFailed("compiled circuit leaks into the auxiliary level", leak)
    return {"axis": axis, "theta": theta, "subspace_residual": residual, "aux_leakage": leak}


def compile_kick(site: int, epsilon: float = 0.0) -> GateSequence:
    """The kick factor as native rotations: R_1(π-ε, 0) then R_3(π-ε, 0)."""
    return [rot(site, 1, np.pi - epsilon, 0.0), rot(site, 3, np.pi - epsilon, 0.0)]


def compile_floquet_cycle(L: int, theta_x: float, theta_z: float, epsilon: float = 0.0) -> GateSequence:
    circuit: GateSequence = []
    for axis, theta in (("x", theta_x), ("z", theta_z)):
        for bond in range(L - 1):
            circuit += compile_coupling(axis, theta, (bond, bond + 1))
    for site in range(L):
        circuit += compile_kick(site, epsilon)
    return circuit


# -- software phase tracking ---------------------------------------------------


@dataclass
class PhaseLedger:
    """Accumulated diagonal phase per site and level, stored mod 2π.

    ``phases[site][level]`` is α with the tracked operator diag(e^{iα}).
    """

    phases: dict[int, np.ndarray] = field(default_factory=dict)

    def get(self, site: int) -> np.ndarray:
        return self.phases.setdefault(site, np.zeros(QUDIT_DIM))

    def absorb(self, gate: Gate) -> None:
        i, j = (QUDIT_LEVELS.index(s) for s in gate.levels)
        alpha = self.get(gate.sites[0])
        alpha[i] += gate.theta / 2.0
        alpha[j] -= gate.theta / 2.0
        np.mod(alpha, TWO_PI, out=alpha)

    def is_empty(self) -> bool:
        return all(np.allclose(np.exp(1j * a), 1.0) for a in self.phases.values())

    def operator(self, n_sites: int) -> np.ndarray:
        """The tracked diagonal as a full-register matrix."""
        out = np.ones(1, dtype=complex)
        for site in range(n_sites):
            out = np.kron(out, np.exp(1j * self.phases.get(site, np.zeros(QUDIT_DIM))))
        return np.diag(out)

    def to_dict(self) -> dict:
        return {str(k): dict(zip(QUDIT_LEVELS, v.tolist())) for k, v in sorted(self.phases.items())}


_ROTATION_LEVELS = {1: (1, 2), 2: (1, 3), 3: (2, 3)}


def _wrap(x: float) -> float:
    return float(np.mod(x, TWO_PI))


def ledger_compile(circuit: GateSequence, tol: float = 1e-12) -> tuple[GateSequence, PhaseLedger]:
    """Replace explicit Z gates by a software phase ledger.

    A tracked diagonal D = diag(e^{iα}) is commuted through each later gate:
    G·D = D·G', where a rotation between levels (i, j) gets φ → φ + α_i - α_j.
    MS gates couple (+, 0) on both sites and absorb the shift only when both
    sites carry the same phase difference.  The returned circuit satisfies
    explicit = ledger.operator() @ compiled.
    """
    ledger = PhaseLedger()
    out: GateSequence = []
    for gate in circuit:
        if gate.kind == "Z":
            ledger.absorb(gate)
            continue
        if gate.kind == "R":
            i, j = _ROTATION_LEVELS[gate.index]
            alpha = ledger.get(gate.sites[0])
            out.append(replace(gate, phi=_wrap(gate.phi + alpha[i] - alpha[j])))
            continue
        # MS: both sites see the (+, 0) phase difference
        shifts = [ledger.get(s)[1] - ledger.get(s)[2] for s in gate.sites]
        gap = np.angle(np.exp(1j * (shifts[0] - shifts[1])))
        if abs(gap) > tol:
            raise NonDiagonalResidual(
                f"MS on sites {gate.sites} sees unequal (+,0) phase differences {shifts[0]:.6f}, {shifts[1]:.6f}"
            )
        out.append(replace(gate, phi=_wrap(gate.phi + shifts[0])))
    return out, ledger
