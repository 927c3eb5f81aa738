import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floquet_qutrit import compiler as C
from floquet_qutrit import spin_ops
from floquet_qutrit.engine import FloquetParams, floquet_step, init_state

angles = st.floats(-np.pi, np.pi, allow_nan=False)


def test_z_plus_zero_from_rotations():
    # the written sequence R_1(π/2,-π/2) R_1(θ,0) R_1(π/2,π/2) read as time order (leftmost first)
    theta = 0.83
    seq = [C.rot(0, 1, np.pi / 2, -np.pi / 2), C.rot(0, 1, theta, 0.0), C.rot(0, 1, np.pi / 2, np.pi / 2)]
    u = C.circuit_unitary(seq, 1)
    np.testing.assert_allclose(u, spin_ops.z_rotation(("+", "0"), theta), atol=1e-14)


def test_z_plus_zero_operator_product_has_opposite_sign():
    theta = 0.83
    r = spin_ops.qudit_rotation
    product = r(1, np.pi / 2, -np.pi / 2) @ r(1, theta, 0.0) @ r(1, np.pi / 2, np.pi / 2)
    np.testing.assert_allclose(product, spin_ops.z_rotation(("+", "0"), -theta), atol=1e-14)


def test_aux_isolation_identity_at_zero():
    result = C.aux_isolation(0.0)
    for a in result.residual_ops:
        np.testing.assert_allclose(a, np.eye(4), atol=1e-14)
    np.testing.assert_allclose(C.circuit_unitary(result.sequence, 2), np.eye(16), atol=1e-14)


@given(theta=angles)
@settings(max_examples=30, deadline=None)
def test_aux_isolation_residual_ops_live_on_aux(theta):
    result = C.aux_isolation(theta)
    assert result.identity_residual < 1e-10
    for a in result.residual_ops:
        assert np.abs(a - np.diag(np.diag(a))).max() < 1e-14
        np.testing.assert_allclose(a[1:, 1:], np.eye(3), atol=1e-10)


def test_dressed_ms_on_qutrit_block():
    theta = 0.7
    u = C.circuit_unitary(C.dressed_ms(0, 1, theta), 2)
    l1 = spin_ops.gell_mann(1)
    target = spin_ops.expm_hermitian(np.kron(l1, l1), theta / 2)
    assert C.phase_aligned_residual(C.restrict_to_qutrits(u, 2), target) < 1e-10


@pytest.mark.parametrize("axis", "xz")
def test_coupling_zero_angle_is_identity(axis):
    u = C.circuit_unitary(C.compile_coupling(axis, 0.0), 2)
    assert C.phase_aligned_residual(C.restrict_to_qutrits(u, 2), np.eye(9)) < 1e-12


def test_zz_coupling_is_diagonal_on_qutrits():
    u = C.restrict_to_qutrits(C.circuit_unitary(C.compile_coupling("z", 1.0), 2), 2)
    assert np.abs(u - np.diag(np.diag(u))).max() < 1e-12
    m = np.array([1, 0, -1])
    phases = np.diag(u) / np.diag(u)[1]
    np.testing.assert_allclose(phases, np.exp(-0.5j * np.outer(m, m).ravel()), atol=1e-12)


def test_hundred_random_angles_both_axes():
    rng = np.random.default_rng(2024)
    for theta in rng.uniform(-2 * np.pi, 2 * np.pi, 100):
        for axis in "xz":
            report = C.verify_coupling(axis, theta)
            assert report["subspace_residual"] < 1e-9
            assert report["aux_leakage"] < 1e-12


def test_verify_coupling_rejects_wrong_circuit():
    with pytest.raises(C.VerificationFailed):
        C.verify_coupling("x", 0.5, circuit=C.compile_coupling("z", 0.5))


@pytest.mark.parametrize("L", [2, 3])
def test_compiled_cycle_matches_engine(L):
    tx, tz, eps = 0.37, 1.21, 0.05
    u = C.circuit_unitary(C.compile_floquet_cycle(L, tx, tz, eps), L)
    assert C.leakage(u, L) < 1e-12
    psi = init_state(L)
    compiled = C.restrict_to_qutrits(u, L) @ psi
    exact = floquet_step(psi, FloquetParams(L=L, theta_x=tx, theta_z=tz, epsilon=eps))
    phase = np.vdot(compiled, exact)
    phase /= abs(phase)
    assert np.abs(compiled * phase - exact).max() < 1e-8


def test_ledger_without_dressing_is_noop():
    circuit = [C.rot(0, 1, 0.4, 0.1), C.ms(0, 1, 0.3), C.rot(1, 3, 0.2, 1.0)]
    compiled, ledger = C.ledger_compile(circuit)
    assert compiled == circuit
    assert ledger.is_empty()


def test_ledger_single_dressed_ms():
    circuit = C.compile_coupling("x", 0.6)
    compiled, ledger = C.ledger_compile(circuit)
    assert all(g.kind != "Z" for g in compiled)
    explicit = C.circuit_unitary(circuit, 2)
    tracked = ledger.operator(2) @ C.circuit_unitary(compiled, 2)
    assert np.abs(explicit - tracked).max() < 1e-10
    assert C.phase_aligned_residual(C.restrict_to_qutrits(tracked, 2), C.restrict_to_qutrits(explicit, 2)) < 1e-10


def test_ledger_phases_add():
    theta = 0.45
    one = C.ledger_compile(C.dressed_ms(0, 1, theta))[1]
    two = C.ledger_compile(C.dressed_ms(0, 1, theta) + C.dressed_ms(0, 1, theta))[1]
    for site in (0, 1):
        np.testing.assert_allclose(np.exp(1j * two.get(site)), np.exp(2j * one.get(site)), atol=1e-12)


def test_ledger_rejects_unequal_ms_shift():
    circuit = [C.zgate(0, ("+", "0"), 0.3), C.ms(0, 1, 0.5)]
    with pytest.raises(C.NonDiagonalResidual):
        C.ledger_compile(circuit)


def _block_strategy():
    site = st.integers(0, 1)
    rotation = st.builds(lambda s, k, t, p: [C.rot(s, k, t, p)], site, st.integers(1, 3), angles, angles)
    # Z gates come in matched pairs so every later MS sees equal shifts on both sites
    levels = st.sampled_from([("a", "+"), ("+", "0"), ("0", "-"), ("a", "-")])
    zpair = st.builds(lambda lv, t: [C.zgate(0, lv, t), C.zgate(1, lv, t)], levels, angles)
    dressed = st.builds(lambda t: C.dressed_ms(0, 1, t), angles)
    return st.one_of(rotation, zpair, dressed)


@given(blocks=st.lists(_block_strategy(), min_size=1, max_size=6))
@settings(max_examples=60, deadline=None)
def test_ledger_equivalence_on_random_circuits(blocks):
    circuit = [g for block in blocks for g in block][:12]
    compiled, ledger = C.ledger_compile(circuit)
    explicit = C.circuit_unitary(circuit, 2)
    tracked = ledger.operator(2) @ C.circuit_unitary(compiled, 2)
    assert np.abs(explicit - tracked).max() < 1e-9


def test_gate_serialization():
    g = C.zgate(1, ("a", "+"), 0.2).to_dict()
    assert g["kind"] == "Z" and g["levels"] == ["a", "+"] and "index" not in g
    r = C.rot(0, 2, 0.1, 0.3).to_dict()
    assert r["index"] == 2 and r["sites"] == [0]
