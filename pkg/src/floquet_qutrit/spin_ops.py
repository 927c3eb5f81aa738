"""Single- and two-site operators for spin-1 (qutrit) chains.

Local basis order is (+, 0, -) for qutrits, i.e. index 0 carries m=+1,
index 1 carries m=0 and index 2 carries m=-1.  The four-level encoding used
for gate compilation prepends an auxiliary level: (a, +, 0, -).
"""

from __future__ import annotations

import re

import numpy as np

QUTRIT_DIM = 3
QUDIT_DIM = 4

LEVELS = ("+", "0", "-")
QUDIT_LEVELS = ("a", "+", "0", "-")

# S^z eigenvalue carried by each local basis index
MAGNETIC_NUMBERS = np.array([1.0, 0.0, -1.0])

_SQRT2 = np.sqrt(2.0)


def _offdiag(i: int, j: int, dim: int = QUTRIT_DIM) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric and antisymmetric generators coupling levels ``i`` and ``j``."""
    sym = np.zeros((dim, dim), dtype=complex)
    asym = np.zeros((dim, dim), dtype=complex)
    sym[i, j] = sym[j, i] = 1.0
    asym[i, j] = -1j
    asym[j, i] = 1j
    return sym, asym


def gell_mann(k: int) -> np.ndarray:
    """Return the ``k``-th Gell-Mann matrix in the (+, 0, -) basis.

    λ1, λ2 couple (+, 0); λ4, λ5 couple (+, -); λ6, λ7 couple (0, -).
    """
    if not 1 <= k <= 8:
        raise ValueError(f"Gell-Mann index must be in 1..8, got {k}")
    if k in (1, 2):
        return _offdiag(0, 1)[k - 1]
    if k in (4, 5):
        return _offdiag(0, 2)[k - 4]
    if k in (6, 7):
        return _offdiag(1, 2)[k - 6]
    if k == 3:
        return np.diag([1.0, -1.0, 0.0]).astype(complex)
    return np.diag([1.0, 1.0, -2.0]).astype(complex) / np.sqrt(3.0)


def spin_matrix(axis: str) -> np.ndarray:
    """Spin-1 matrix along ``axis`` in the S^z eigenbasis."""
    if axis == "z":
        return np.diag(MAGNETIC_NUMBERS).astype(complex)
    if axis == "x":
        return (gell_mann(1) + gell_mann(6)) / _SQRT2
    if axis == "y":
        return (gell_mann(2) + gell_mann(7)) / _SQRT2
    raise ValueError(f"unknown spin axis {axis!r}")


def expm_hermitian(generator: np.ndarray, angle: float) -> np.ndarray:
    """exp(-i * angle * generator) for Hermitian ``generator``, by eigendecomposition."""
    evals, evecs = np.linalg.eigh(generator)
    return (evecs * np.exp(-1j * angle * evals)) @ evecs.conj().T


_ROTATION_PAIRS = {1: (1, 2), 2: (4, 5), 3: (6, 7)}


def rotation(k: int, theta: float, phi: float) -> np.ndarray:
    """Native qutrit rotation R_k(θ, φ) = exp(-iθ/2 (cos φ λ_a + sin φ λ_b)).

    R_1 acts on (+, 0), R_2 on (+, -), R_3 on (0, -).
    """
    if k not in _ROTATION_PAIRS:
        raise ValueError(f"rotation index must be 1, 2 or 3, got {k}")
    a, b = _ROTATION_PAIRS[k]
    gen = np.cos(phi) * gell_mann(a) + np.sin(phi) * gell_mann(b)
    return expm_hermitian(gen, theta / 2.0)


def kick_operator(epsilon: float = 0.0) -> np.ndarray:
    """Single-site factor of the Z3 kick, exp(-i(π-ε)/2 λ6) exp(-i(π-ε)/2 λ1).

    The λ1 factor acts first.  At ε=0 the levels cycle 0 -> + -> - -> 0.
    """
    angle = (np.pi - epsilon) / 2.0
    return expm_hermitian(gell_mann(6), angle) @ expm_hermitian(gell_mann(1), angle)


def two_site_coupling(axis: str, theta: float) -> np.ndarray:
    """exp(-i θ/2 S^a ⊗ S^a) as a 9x9 matrix (site 1 is the major index)."""
    if axis not in ("x", "z"):
        raise ValueError(f"coupling axis must be 'x' or 'z', got {axis!r}")
    if axis == "z":
        m = MAGNETIC_NUMBERS
        return np.diag(np.exp(-0.5j * theta * np.outer(m, m).ravel()))
    s = spin_matrix("x")
    return expm_hermitian(np.kron(s, s), theta / 2.0)


def embed_qutrit(op: np.ndarray) -> np.ndarray:
    """Embed a 3x3 qutrit operator into the (a, +, 0, -) encoding, leaving |a⟩ fixed."""
    out = np.zeros((QUDIT_DIM, QUDIT_DIM), dtype=complex)
    out[0, 0] = 1.0
    out[1:, 1:] = op
    return out


def embed_generator(op: np.ndarray) -> np.ndarray:
    """Embed a qutrit generator with zero action on |a⟩."""
    out = np.zeros((QUDIT_DIM, QUDIT_DIM), dtype=complex)
    out[1:, 1:] = op
    return out


def qudit_rotation(k: int, theta: float, phi: float) -> np.ndarray:
    return embed_qutrit(rotation(k, theta, phi))


def z_rotation(levels: tuple[str, str], theta: float) -> np.ndarray:
    """Diagonal phase gate Z_ij(θ) on the four-level encoding.

    Level ``i`` picks up exp(+iθ/2) and level ``j`` picks up exp(-iθ/2),
    so Z_{+0}(θ) = diag(1, e^{iθ/2}, e^{-iθ/2}, 1).
    """
    i, j = (QUDIT_LEVELS.index(s) for s in levels)
    if i == j:
        raise ValueError("Z rotation needs two distinct levels")
    phases = np.zeros(QUDIT_DIM)
    phases[i] = theta / 2.0
    phases[j] = -theta / 2.0
    return np.diag(np.exp(1j * phases))


def ms_factors(theta: float, phi: float = 0.0) -> list[np.ndarray]:
    """The four commuting factors of MS(θ, φ) on two qudits (16x16).

    Returned as [global phase * identity, local term site 1, local term site 2,
    entangling term].  At φ=0 the coupling generator is λ1 ⊗ λ1.
    """
    sigma = embed_generator(np.cos(phi) * gell_mann(1) + np.sin(phi) * gell_mann(2))
    sq = sigma @ sigma
    eye = np.eye(QUDIT_DIM)
    return [
        np.exp(0.5j * theta) * np.eye(QUDIT_DIM**2),
        expm_hermitian(np.kron(sq, eye), theta / 4.0),
        expm_hermitian(np.kron(eye, sq), theta / 4.0),
        expm_hermitian(np.kron(sigma, sigma), theta / 2.0),
    ]


def ms_gate(theta: float, phi: float = 0.0) -> np.ndarray:
    """Native Mølmer-Sørensen gate MS(θ, φ) in the qudit encoding (16x16)."""
    out = np.eye(QUDIT_DIM**2, dtype=complex)
    for factor in ms_factors(theta, phi):
        out = out @ factor
    return out


def named_operator(name: str, theta: float = 0.0, phi: float = 0.0) -> np.ndarray:
    """Look up an operator by a short name; used by the ``ops dump`` command."""
    match = re.fullmatch(r"(?:lambda|gell_mann)(\d)", name)
    if match:
        return gell_mann(int(match.group(1)))
    table = {
        "sx": lambda: spin_matrix("x"),
        "sy": lambda: spin_matrix("y"),
        "sz": lambda: spin_matrix("z"),
        "r1": lambda: rotation(1, theta, phi),
        "r2": lambda: rotation(2, theta, phi),
        "r3": lambda: rotation(3, theta, phi),
        "kick": lambda: kick_operator(theta),
        "xx": lambda: two_site_coupling("x", theta),
        "zz": lambda: two_site_coupling("z", theta),
        "ms": lambda: ms_gate(theta, phi),
        "z_a+": lambda: z_rotation(("a", "+"), theta),
        "z_+0": lambda: z_rotation(("+", "0"), theta),
    }
    if name not in table:
        raise KeyError(f"unknown operator {name!r}; choose from {sorted(table)} or lambdaK")
    return table[name]()
