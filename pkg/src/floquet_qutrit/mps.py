"""Matrix-product-state evolution of the Floquet drive.

Finite chains use TEBD with sweeping gate application: every sweep applies
one layer of commuting bond gates while dragging the orthogonality center
from one end of the chain to the other, so the state stays in mixed canonical
form and each SVD yields the exact Schmidt spectrum of its bond.  The infinite
chain uses iTEBD on a two-site unit cell in right-canonical (B, S) form.

Site tensors have legs (left bond, physical, right bond).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import spin_ops
from .engine import FloquetParams
from .observables import QfiResult, entropy_from_schmidt
from .spin_ops import LEVELS

SCHMIDT_FLOOR = 1e-12


class ChiCapExceeded(RuntimeError):
    """The bond dimension needed to meet the truncation tolerance exceeds the cap."""

    def __init__(self, chi: int, cap: int, step: int | None = None):
        self.chi, self.cap, self.step = chi, cap, step
        where = "" if step is None else f" at step {step}"
        super().__init__(f"bond dimension {chi} exceeds cap {cap}{where}")


@dataclass
class TruncationPolicy:
    """Per-SVD truncation error and bond-dimension ceiling.

    ``tolerance`` bounds the 2-norm error of each truncation, so the discarded
    Schmidt weight per bond is at most ``tolerance**2``.  The bond dimension
    grows as needed; a bond that would need more than ``chi_cap`` values
    raises :class:`ChiCapExceeded`.
    """

    tolerance: float = 1e-6
    chi_cap: int = 600

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("truncation tolerance must be positive")
        if self.chi_cap < 1:
            raise ValueError("chi_cap must be at least 1")


def truncate_spectrum(s: np.ndarray, policy: TruncationPolicy) -> tuple[int, float]:
    """Smallest rank whose discarded weight (sum of s²) stays within tolerance².

    Returns (rank, discarded weight relative to the total weight).
    """
    weights = s**2
    total = weights.sum()
    # tail[k] = weight discarded when keeping the first k values
    tail = np.concatenate([np.cumsum(weights[::-1])[::-1], [0.0]]) / total
    keep = int(np.argmax(tail <= policy.tolerance**2))
    keep = max(keep, 1)
    # values at numerical noise level never help
    keep = min(keep, max(1, int(np.count_nonzero(s > SCHMIDT_FLOOR * s[0]))))
    if keep > policy.chi_cap:
        raise ChiCapExceeded(keep, policy.chi_cap)
    return keep, float(tail[keep])


def _split(theta: np.ndarray, policy: TruncationPolicy):
    """SVD of a (chi_l*3, 3*chi_r) matrix with truncation and renormalization."""
    try:
        u, s, vh = np.linalg.svd(theta, full_matrices=False)
    except np.linalg.LinAlgError:
        import scipy.linalg

        u, s, vh = scipy.linalg.svd(theta, full_matrices=False, lapack_driver="gesvd")
    keep, discarded = truncate_spectrum(s, policy)
    s = s[:keep] / np.linalg.norm(s[:keep])
    return u[:, :keep], s, vh[:keep], discarded


def gate_tensor(op: np.ndarray) -> np.ndarray:
    """Reshape a 9x9 two-site operator to legs (out1, out2, in1, in2)."""
    return op.reshape(3, 3, 3, 3)


@dataclass
class MpsState:
    """Open-chain MPS kept in mixed canonical form around ``center``."""

    tensors: list[np.ndarray]
    center: int = 0
    spectra: list[np.ndarray] = field(default_factory=list)

    @property
    def L(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> list[int]:
        return [t.shape[2] for t in self.tensors[:-1]]

    @property
    def max_chi(self) -> int:
        return max(self.bond_dims, default=1)

    def copy(self) -> "MpsState":
        return MpsState([t.copy() for t in self.tensors], self.center, [s.copy() for s in self.spectra])

    def bond_entropy(self, bond: int | None = None) -> float:
        """Entropy across ``bond`` (cut after site ``bond``); default is the half-chain cut."""
        bond = self.L // 2 - 1 if bond is None else bond
        return entropy_from_schmidt(self.spectra[bond])

    def to_statevector(self) -> np.ndarray:
        out = self.tensors[0]
        for t in self.tensors[1:]:
            out = np.tensordot(out, t, axes=([-1], [0]))
        return out.reshape(-1)


def product_mps(L: int, pattern: str | None = None) -> MpsState:
    pattern = "0" * L if pattern is None else pattern
    if len(pattern) != L:
        raise ValueError(f"pattern has {len(pattern)} symbols for L={L}")
    tensors = []
    for symbol in pattern:
        t = np.zeros((1, 3, 1), dtype=complex)
        t[0, LEVELS.index(symbol), 0] = 1.0
        tensors.append(t)
    return MpsState(tensors, center=0, spectra=[np.ones(1) for _ in range(L - 1)])


def mps_from_statevector(psi: np.ndarray, policy: TruncationPolicy | None = None) -> MpsState:
    """Left-to-right SVD decomposition; the center ends on the last site."""
    policy = policy or TruncationPolicy(tolerance=1e-14, chi_cap=10**6)
    L = int(round(np.log(psi.size) / np.log(3)))
    tensors, spectra = [], []
    rest = psi.reshape(1, -1)
    chi = 1
    for _ in range(L - 1):
        rest = rest.reshape(chi * 3, -1)
        u, s, vh, _ = _split(rest, policy)
        tensors.append(u.reshape(chi, 3, -1))
        spectra.append(s)
        chi = s.size
        rest = s[:, None] * vh
    tensors.append(rest.reshape(chi, 3, 1))
    return MpsState(tensors, center=L - 1, spectra=spectra)


def apply_single_site_mps(mps: MpsState, op: np.ndarray, site: int | None = None) -> None:
    """Apply a one-site operator in place (every site when ``site`` is None)."""
    sites = range(mps.L) if site is None else [site]
    for j in sites:
        mps.tensors[j] = np.einsum("ab,ibj->iaj", op, mps.tensors[j])


def apply_bond_gate(mps: MpsState, gate: np.ndarray, bond: int, direction: str, policy: TruncationPolicy) -> float:
    """Apply a two-site gate on (bond, bond + 1) and move the center across it.

    ``direction='right'`` needs the center on ``bond`` and leaves it on
    ``bond + 1``; ``'left'`` needs it on ``bond + 1`` and leaves it on ``bond``.
    Returns the discarded weight.
    """
    a, b = mps.tensors[bond], mps.tensors[bond + 1]
    chi_l, chi_r = a.shape[0], b.shape[2]
    theta = np.tensordot(a, b, axes=([2], [0]))  # l i j r
    theta = np.tensordot(gate_tensor(gate), theta, axes=([2, 3], [1, 2]))  # i j l r
    theta = theta.transpose(2, 0, 1, 3).reshape(chi_l * 3, 3 * chi_r)
    u, s, vh, discarded = _split(theta, policy)
    chi = s.size
    if direction == "right":
        mps.tensors[bond] = u.reshape(chi_l, 3, chi)
        mps.tensors[bond + 1] = (s[:, None] * vh).reshape(chi, 3, chi_r)
        mps.center = bond + 1
    else:
        mps.tensors[bond] = (u * s[None, :]).reshape(chi_l, 3, chi)
        mps.tensors[bond + 1] = vh.reshape(chi, 3, chi_r)
        mps.center = bond
    mps.spectra[bond] = s
    return discarded


def move_center(mps: MpsState, target: int) -> None:
    """QR-shift the orthogonality center to ``target``."""
    while mps.center < target:
        j = mps.center
        t = mps.tensors[j]
        q, r = np.linalg.qr(t.reshape(-1, t.shape[2]))
        mps.tensors[j] = q.reshape(t.shape[0], 3, -1)
        mps.tensors[j + 1] = np.tensordot(r, mps.tensors[j + 1], axes=([1], [0]))
        mps.center += 1
    while mps.center > target:
        j = mps.center
        t = mps.tensors[j]
        q, r = np.linalg.qr(t.reshape(t.shape[0], -1).T)
        mps.tensors[j] = q.T.reshape(-1, 3, t.shape[2])
        mps.tensors[j - 1] = np.tensordot(mps.tensors[j - 1], r.T, axes=([2], [0]))
        mps.center -= 1


def sweep_gates(mps: MpsState, gate: np.ndarray, policy: TruncationPolicy) -> float:
    """Apply ``gate`` on every bond in one sweep, starting from whichever end holds the center.

    The bond gates of one layer commute, so the sweep direction does not
    change the result.
    """
    if mps.center not in (0, mps.L - 1):
        move_center(mps, 0)
    discarded = 0.0
    if mps.center == 0:
        for bond in range(mps.L - 1):
            discarded += apply_bond_gate(mps, gate, bond, "right", policy)
    else:
        for bond in reversed(range(mps.L - 1)):
            discarded += apply_bond_gate(mps, gate, bond, "left", policy)
    return discarded


@dataclass
class StepDiagnostics:
    max_chi: int
    discarded: float


class FloquetGates:
    """Gate tables for one parameter set, shared by the finite and infinite engines."""

    def __init__(self, params: FloquetParams, trotter_substeps: int = 1):
        if trotter_substeps < 1:
            raise ValueError("trotter_substeps must be positive")
        self.substeps = trotter_substeps
        self.xx = spin_ops.two_site_coupling("x", params.theta_x / trotter_substeps)
        self.zz = spin_ops.two_site_coupling("z", params.theta_z)
        self.kick = spin_ops.kick_operator(params.epsilon)
        self.has_x = params.theta_x != 0.0
        self.has_z = params.theta_z != 0.0


def tebd_step(
    mps: MpsState,
    params: FloquetParams,
    policy: TruncationPolicy,
    trotter_substeps: int = 1,
    gates: FloquetGates | None = None,
) -> StepDiagnostics:
    """One Floquet cycle on a finite MPS, in place.

    U_x is applied as ``trotter_substeps`` sweeps of bond gates with angle
    θx/m each.  All S^x S^x bond terms commute, so any m reproduces U_x
    exactly up to truncation.
    """
    gates = gates or FloquetGates(params, trotter_substeps)
    discarded = 0.0
    if gates.has_x:
        for _ in range(gates.substeps):
            discarded += sweep_gates(mps, gates.xx, policy)
    if gates.has_z:
        discarded += sweep_gates(mps, gates.zz, policy)
    apply_single_site_mps(mps, gates.kick)
    return StepDiagnostics(max_chi=mps.max_chi, discarded=discarded)


# -- expectation values -------------------------------------------------------


def _transfer(env: np.ndarray, t: np.ndarray, op: np.ndarray | None) -> np.ndarray:
    """Advance a left environment (bra bond, ket bond) through one site."""
    ket = t if op is None else np.einsum("ab,ibj->iaj", op, t)
    tmp = np.tensordot(env, ket, axes=([1], [0]))  # bra_l, p, r
    return np.tensordot(t.conj(), tmp, axes=([0, 1], [0, 1]))


def mps_expectation(mps: MpsState, ops: dict[int, np.ndarray]) -> complex:
    """⟨ψ| Π_j ops[j] |ψ⟩ for a product of local operators keyed by site."""
    for site in ops:
        if not 0 <= site < mps.L:
            raise IndexError(f"site {site} out of range for L={mps.L}")
    env = np.ones((1, 1), dtype=complex)
    for j, t in enumerate(mps.tensors):
        env = _transfer(env, t, ops.get(j))
    return complex(env[0, 0])


def mps_norm(mps: MpsState) -> float:
    return float(np.sqrt(abs(mps_expectation(mps, {}))))


def mps_site_magnetizations(mps: MpsState) -> np.ndarray:
    """⟨S^z_j⟩ for every site, using the canonical form around the center."""
    sz = spin_ops.spin_matrix("z")
    out = np.empty(mps.L)
    work = mps.copy()
    move_center(work, 0)
    for j in range(work.L):
        move_center(work, j)
        t = work.tensors[j]
        out[j] = np.einsum("iaj,ab,ibj->", t.conj(), sz, t).real
    return out


def mps_mean_magnetization(mps: MpsState) -> float:
    return float(mps_site_magnetizations(mps).mean())


def mps_zz_correlation(mps: MpsState, i: int, j: int) -> float:
    sz = spin_ops.spin_matrix("z")
    return mps_expectation(mps, {i: sz, j: sz}).real


def mps_overlap(mps: MpsState, other: MpsState) -> float:
    env = np.ones((1, 1), dtype=complex)
    for a, b in zip(other.tensors, mps.tensors):
        tmp = np.tensordot(env, b, axes=([1], [0]))
        env = np.tensordot(a.conj(), tmp, axes=([0, 1], [0, 1]))
    return float(abs(env[0, 0]) ** 2)


def _collective_moments(mps: MpsState, op: np.ndarray) -> tuple[float, float]:
    """⟨J⟩ and ⟨J²⟩ for J = Σ_i op_i, via a bond-dimension-3 operator string.

    The environment index w tracks how many op insertions lie to the left
    (0, 1 or 2); J² = Σ_i op_i² + 2 Σ_{i<j} op_i op_j.
    """
    op2 = op @ op
    env = np.zeros((3, 1, 1), dtype=complex)
    env[0, 0, 0] = 1.0
    for t in mps.tensors:
        e0 = _transfer(env[0], t, None)
        e1 = _transfer(env[0], t, op)
        e2 = _transfer(env[0], t, op2)
        f1 = _transfer(env[1], t, None)
        f1op = _transfer(env[1], t, op)
        f2 = _transfer(env[2], t, None)
        new = np.empty((3,) + e0.shape, dtype=complex)
        new[0] = e0
        new[1] = e1 + f1
        new[2] = e2 + 2.0 * f1op + f2
        env = new
    return env[1, 0, 0].real, env[2, 0, 0].real


def mps_qfi(mps: MpsState) -> QfiResult:
    per_axis = {}
    for axis in ("x", "y", "z"):
        mean, second = _collective_moments(mps, spin_ops.spin_matrix(axis))
        per_axis[axis] = max(4.0 * (second - mean**2), 0.0)
    return QfiResult(per_axis=per_axis, L=mps.L)


def canonical_residuals(mps: MpsState) -> float:
    """Largest deviation from left (right) orthonormality left (right) of the center."""
    worst = 0.0
    for j, t in enumerate(mps.tensors):
        if j < mps.center:
            m = t.reshape(-1, t.shape[2])
            worst = max(worst, np.abs(m.conj().T @ m - np.eye(m.shape[1])).max())
        elif j > mps.center:
            m = t.reshape(t.shape[0], -1)
            worst = max(worst, np.abs(m @ m.conj().T - np.eye(m.shape[0])).max())
    return float(worst)


# -- infinite chain -----------------------------------------------------------


@dataclass
class InfiniteMps:
    """Two-site unit cell (A, B) in right-canonical form.

    ``spectra[i]`` holds the Schmidt values on the bond to the left of site i.
    """

    tensors: list[np.ndarray]
    spectra: list[np.ndarray]

    @property
    def max_chi(self) -> int:
        return max(s.size for s in self.spectra)

    def copy(self) -> "InfiniteMps":
        return InfiniteMps([t.copy() for t in self.tensors], [s.copy() for s in self.spectra])

    def bond_entropy(self, bond: int = 0) -> float:
        return entropy_from_schmidt(self.spectra[bond])


def product_imps(pattern: str = "00") -> InfiniteMps:
    if len(pattern) != 2:
        raise ValueError("unit cell holds exactly two sites")
    mps = product_mps(2, pattern)
    return InfiniteMps(mps.tensors, [np.ones(1), np.ones(1)])


def _itebd_bond(cell: InfiniteMps, gate: np.ndarray, i: int, policy: TruncationPolicy) -> float:
    j = (i + 1) % 2
    b_i, b_j = cell.tensors[i], cell.tensors[j]
    s_left = cell.spectra[i]
    chi_l, chi_r = b_i.shape[0], b_j.shape[2]
    theta = np.tensordot(b_i, b_j, axes=([2], [0]))
    theta = np.tensordot(gate_tensor(gate), theta, axes=([2, 3], [1, 2])).transpose(2, 0, 1, 3)
    x, y, z, discarded = _split((s_left[:, None, None, None] * theta).reshape(chi_l * 3, 3 * chi_r), policy)
    chi = y.size
    b_j_new = z.reshape(chi, 3, chi_r)
    # B_i = Θ B_j^† keeps right-canonical form without dividing by small Schmidt values
    b_i_new = np.tensordot(theta, b_j_new.conj(), axes=([2, 3], [1, 2]))
    cell.tensors[i] = b_i_new
    cell.tensors[j] = b_j_new
    cell.spectra[j] = y
    return discarded


def itebd_step(
    cell: InfiniteMps,
    params: FloquetParams,
    policy: TruncationPolicy,
    trotter_substeps: int = 1,
    gates: FloquetGates | None = None,
) -> StepDiagnostics:
    """One Floquet cycle of the translation-invariant chain, in place."""
    gates = gates or FloquetGates(params, trotter_substeps)
    discarded = 0.0
    layers = []
    if gates.has_x:
        layers += [gates.xx] * gates.substeps
    if gates.has_z:
        layers.append(gates.zz)
    for gate in layers:
        for i in (0, 1):
            discarded += _itebd_bond(cell, gate, i, policy)
    for i in (0, 1):
        cell.tensors[i] = np.einsum("ab,ibj->iaj", gates.kick, cell.tensors[i])
    return StepDiagnostics(max_chi=cell.max_chi, discarded=discarded)


def imps_site_expectation(cell: InfiniteMps, op: np.ndarray, site: int) -> complex:
    s = cell.spectra[site]
    t = s[:, None, None] * cell.tensors[site]
    return complex(np.einsum("iaj,ab,ibj->", t.conj(), op, t))


def imps_magnetization(cell: InfiniteMps) -> float:
    """⟨S^z⟩ averaged over the unit cell."""
    sz = spin_ops.spin_matrix("z")
    return float(np.mean([imps_site_expectation(cell, sz, i).real for i in (0, 1)]))
