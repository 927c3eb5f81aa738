"""Reference implementations that share no code with the package.

Everything here is built from literal matrices, dense Kronecker products and
scipy's Padé matrix exponential.
"""

import numpy as np
from scipy.linalg import expm

R2 = np.sqrt(2.0)
SX = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex) / R2
SY = np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex) / R2
SZ = np.diag([1.0, 0.0, -1.0]).astype(complex)
L1 = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex)
L6 = np.array([[0, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=complex)


def site_op(op, j, L):
    mats = [np.eye(3)] * L
    mats[j] = op
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def bond_sum(op, L):
    return sum(site_op(op, j, L) @ site_op(op, j + 1, L) for j in range(L - 1))


def kick(eps):
    a = (np.pi - eps) / 2
    return expm(-1j * a * L6) @ expm(-1j * a * L1)


def floquet_unitary(L, theta_x, theta_z, eps=0.0):
    ux = expm(-0.5j * theta_x * bond_sum(SX, L))
    uz = expm(-0.5j * theta_z * bond_sum(SZ, L))
    p = np.array([[1.0 + 0j]])
    for _ in range(L):
        p = np.kron(p, kick(eps))
    return p @ uz @ ux


def zero_state(L):
    psi = np.zeros(3**L, dtype=complex)
    psi[(3**L - 1) // 2] = 1.0  # every digit equal to 1 -> |0...0>
    return psi


def reduced_density_entropy(psi, cut):
    m = psi.reshape(3**cut, -1)
    rho = m @ m.conj().T
    w = np.linalg.eigvalsh(rho)
    w = w[w > 1e-14]
    return float(-np.sum(w * np.log(w)))


def collective_variance(psi, op):
    L = int(round(np.log(psi.size) / np.log(3)))
    j = sum(site_op(op, k, L) for k in range(L))
    mean = np.vdot(psi, j @ psi).real
    return np.vdot(psi, j @ (j @ psi)).real - mean**2


def scaled_qfi(psi):
    L = int(round(np.log(psi.size) / np.log(3)))
    return sum(4 * collective_variance(psi, op) for op in (SX, SY, SZ)) / (8 * L)


def dft_direct(x):
    n = len(x)
    k = np.arange(n)
    return np.array([abs(np.sum(x * np.exp(-2j * np.pi * q * k / n))) / n for q in range(n)])
