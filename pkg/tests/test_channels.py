import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from qteleport.channels import (
    NOISELESS,
    GateEvent,
    QubitParams,
    amplitude_damping,
    apply,
    apply_kraus,
    apply_moment,
    cphase,
    decoherence,
    depolarizing,
    identity_gate,
    pure_dephasing,
    rotation,
    rotation_matrix,
    xy_rotation,
)
from qteleport.linalg import PAULIS, DensityMatrix, DomainError, ket, product_state, random_density_matrix, random_unitary

from .strategies import angles, density_matrices, pure

T1S = st.floats(min_value=1e-7, max_value=1e-4)
DURATIONS = st.floats(min_value=0.0, max_value=2e-6)


def _phase_equal(a, b, tol=1e-12):
    k = np.argmax(np.abs(b))
    phase = a.flat[k] / b.flat[k]
    return abs(abs(phase) - 1) < tol and np.allclose(a, phase * b, atol=tol)


@pytest.mark.parametrize("axis", ["x", "y", "z"])
@given(theta=angles)
def test_rotation_matches_matrix_exponential(axis, theta):
    assert np.allclose(rotation_matrix(axis, theta), expm(-0.5j * theta * PAULIS[axis.upper()]), atol=1e-12)


@given(theta=angles)
def test_minus_y_negates_angle(theta):
    assert np.allclose(rotation_matrix("-y", theta), rotation_matrix("y", -theta))


def test_rotation_examples():
    assert _phase_equal(rotation_matrix("y", math.pi) @ ket("0"), ket("1"))
    half = rotation_matrix("x", math.pi / 2)
    assert np.allclose(half @ half, rotation_matrix("x", math.pi), atol=1e-12)
    assert np.allclose(rotation_matrix("y", math.pi / 2) @ ket("0"), np.array([1, 1]) / math.sqrt(2))
    assert rotation("y", 1.0).duration == 12e-9
    with pytest.raises(DomainError):
        rotation_matrix("w", 1.0)


@given(phase=angles, theta=angles)
def test_xy_rotation_axis(phase, theta):
    n = math.cos(phase) * PAULIS["X"] + math.sin(phase) * PAULIS["Y"]
    assert np.allclose(xy_rotation(phase, theta).unitary, expm(-0.5j * theta * n), atol=1e-12)


def test_cphase_examples():
    u = cphase().unitary
    for label in ("00", "01", "10"):
        assert np.allclose(u @ ket(label), ket(label))
    assert np.allclose(u @ ket("11"), -ket("11"))
    assert np.allclose(u @ u, np.eye(4), atol=1e-12)


def test_gate_event_validation():
    with pytest.raises(DomainError):
        GateEvent(np.array([[1, 1], [0, 1]]))
    with pytest.raises(DomainError):
        GateEvent(np.eye(2), duration=-1e-9)
    with pytest.raises(DomainError):
        GateEvent(np.eye(4), targets=(0,))


def test_amplitude_damping_examples():
    assert np.allclose(amplitude_damping(0.0, 2e-6).operators[0], np.eye(2))
    ch = amplitude_damping(250e-9, 2.0e-6)
    p = ch.operators[1][0, 1].real ** 2
    assert abs(p - 0.1175030974154046) < 1e-12  # 1 - exp(-0.125)
    t1 = 3e-6
    out = apply_kraus(amplitude_damping(t1 * math.log(2), t1), DensityMatrix.basis("1"), (0,))
    assert np.allclose(out.matrix, np.diag([0.5, 0.5]), atol=1e-10)
    with pytest.raises(DomainError):
        amplitude_damping(1e-9, 0.0)


def test_pure_dephasing_examples():
    t1 = 2e-6
    ch = pure_dephasing(1e-6, t1, 2 * t1)
    assert np.allclose(ch.operators[0], np.eye(2)) and np.allclose(ch.operators[1], 0)
    t2 = 1.2e-6
    plus = pure((1, 1))
    out = apply_kraus(decoherence(t2, QubitParams(t1, t2)), plus, (0,))
    assert abs(abs(out.matrix[0, 1]) - math.exp(-1) / 2) < 1e-10
    diag = DensityMatrix(np.diag([0.3, 0.7]))
    assert np.allclose(apply_kraus(pure_dephasing(5e-7, t1, t2), diag, (0,)).matrix, diag.matrix)
    with pytest.raises(DomainError):
        pure_dephasing(1e-9, 1e-6, 2.1e-6)


@given(t1=T1S, ratio=st.floats(0.05, 2.0), duration=DURATIONS)
def test_decoherence_closed_form(t1, ratio, duration):
    t2 = ratio * t1
    rho = DensityMatrix(np.array([[0.25, 0.4 - 0.1j], [0.4 + 0.1j, 0.75]]))
    out = apply_kraus(decoherence(duration, QubitParams(t1, t2)), rho, (0,)).matrix
    assert abs(out[1, 1] - 0.75 * math.exp(-duration / t1)) < 1e-12
    assert abs(out[0, 1] - rho.matrix[0, 1] * math.exp(-duration / t2)) < 1e-12


@given(t1=T1S, ratio=st.floats(0.05, 2.0), duration=DURATIONS, p=st.floats(0, 1), n=st.integers(1, 2))
def test_kraus_completeness(t1, ratio, duration, p, n):
    for ch in (
        amplitude_damping(duration, t1),
        pure_dephasing(duration, t1, ratio * t1),
        decoherence(duration, QubitParams(t1, ratio * t1)),
        depolarizing(p, n),
    ):
        assert ch.completeness_error() <= 1e-10


def test_qubit_params_physicality():
    with pytest.raises(DomainError):
        QubitParams(1e-6, 2.5e-6)
    with pytest.raises(DomainError):
        QubitParams(0.0, 1e-6)
    assert QubitParams(2e-6, 4e-6).dephasing_rate == 0


def test_apply_identity_and_noiseless_limit(rng):
    rho = random_density_matrix(3, rng)
    assert np.allclose(apply(identity_gate(1, 0.0), rho, qubits=[QubitParams(1e-6, 1e-6)] * 3).matrix, rho.matrix)
    g = rotation("y", math.pi / 2, 1)
    out = apply(g, rho, qubits=[NOISELESS] * 3)
    u = np.kron(np.kron(np.eye(2), rotation_matrix("y", math.pi / 2)), np.eye(2))
    assert np.allclose(out.matrix, u @ rho.matrix @ u.conj().T, atol=1e-12)


def test_apply_dimension_mismatch():
    with pytest.raises(DomainError):
        apply(cphase((0, 1)), DensityMatrix.basis("000"), targets=(0,))
    with pytest.raises(DomainError):
        apply_kraus(depolarizing(0.1, 2), DensityMatrix.basis("000"), (0,))


def test_trace_preserved_random_gate_state_pairs(rng):
    qubits = [QubitParams(2.6e-6, 1.8e-6), QubitParams(2.4e-6, 1.4e-6), QubitParams(2.0e-6, 1.2e-6)]
    for _ in range(10_000):
        rho = random_density_matrix(1, rng) if _ % 2 else random_density_matrix(2, rng)
        n = rho.num_qubits
        if n == 2 and rng.random() < 0.5:
            g = GateEvent(random_unitary(4, rng), (0, 1), float(rng.uniform(0, 5e-8)))
        else:
            g = GateEvent(random_unitary(2, rng), (int(rng.integers(n)),), float(rng.uniform(0, 5e-8)))
        out = apply(g, rho, qubits=qubits[:n])
        assert abs(out.trace() - 1) < 1e-10


@given(rho=density_matrices(st.just(2)), duration=st.floats(1e-9, 1e-6), seed=st.integers(0, 10**6))
def test_dephasing_gates_never_increase_purity(rho, duration, seed):
    qubits = [QubitParams(math.inf, 1e-6), QubitParams(math.inf, 2e-6)]
    g = GateEvent(random_unitary(2, np.random.default_rng(seed)), (0,), duration)
    noisy = apply(g, rho, qubits=qubits)
    noisy.check()
    assert noisy.purity() <= rho.purity() + 1e-9


def test_purity_non_increasing_pure_inputs_with_damping(rng):
    qubits = [QubitParams(2.6e-6, 1.8e-6), QubitParams(2.4e-6, 1.4e-6)]
    for _ in range(1000):
        rho = random_density_matrix(2, rng, rank=1)
        g = GateEvent(random_unitary(2, rng), (0,), 20e-9)
        assert apply(g, rho, qubits=qubits).purity() <= rho.purity() + 1e-9


def test_amplitude_damping_purifies_mixed_states():
    # counterexample to a blanket purity bound: T1 decay pulls I/2 toward |0>
    out = apply(identity_gate(0, 1e-6), DensityMatrix.maximally_mixed(1), qubits=[QubitParams(2e-6, 2e-6)])
    assert out.purity() > 0.5 + 1e-3


@given(rho_a=density_matrices(st.just(1)), rho_b=density_matrices(st.just(2)), duration=DURATIONS, t1=T1S)
def test_damping_commutes_with_labeling(rho_a, rho_b, duration, t1):
    ch = amplitude_damping(duration, t1)
    joint = apply_kraus(ch, product_state(rho_a, rho_b), (0,))
    separate = product_state(apply_kraus(ch, rho_a, (0,)), rho_b)
    assert np.allclose(joint.matrix, separate.matrix, atol=1e-10)


def test_moment_shares_one_window():
    q = [QubitParams(2e-6, 1.5e-6)] * 2
    rho = DensityMatrix.basis("11")
    a, b = rotation("z", 0.3, 0), rotation("z", 0.5, 1)
    together = apply_moment([a, b], rho, q)
    # z rotations leave |11> invariant, so only one 12 ns decay window acts
    p1 = math.exp(-12e-9 / 2e-6)
    assert abs(together.matrix[3, 3].real - p1 * p1) < 1e-12
    with pytest.raises(DomainError):
        apply_moment([a, rotation("x", 0.1, 0)], rho, q)
