import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from qteleport.linalg import I2, PAULIS, SX, DensityMatrix, DomainError, haar_ket, projector, random_density_matrix, random_unitary
from qteleport.protocol import CANONICAL_INPUTS, Device, apply_correction, teleport_branches
from qteleport.readout import PHASE_PRESERVING, PHASE_SENSITIVE, binary_fidelity, confusion_matrix
from qteleport.tomography import (
    IDENTITY_CHI,
    SETTINGS,
    ChiMatrix,
    average_fidelity,
    chi_of_kraus,
    chi_of_unitary,
    error_budget,
    horodecki_process_from_state,
    horodecki_state_from_process,
    measurement_axis,
    misassignment_pauli_weights,
    process_fidelity,
    process_tomography,
    read_matrix,
    state_fidelity,
    state_from_probabilities,
    state_tomography,
    write_chi,
    write_density,
)

from .strategies import density_matrices, seeds

# pre-rotations written independently as matrix exponentials
PRE = {
    "identity": np.eye(2),
    "x_half": expm(-0.25j * math.pi * PAULIS["X"]),
    "y_half": expm(-0.25j * math.pi * PAULIS["Y"]),
    "x_pi": expm(-0.5j * math.pi * PAULIS["X"]),
}
PAULI = [PAULIS[k] for k in "IXYZ"]


def p0_exact(rho):
    m = rho.matrix if isinstance(rho, DensityMatrix) else rho
    return {s: float(np.real((PRE[s] @ m @ PRE[s].conj().T)[0, 0])) for s in SETTINGS}


def chi_action(chi, rho):
    return sum(chi[a, b] * PAULI[a] @ rho @ PAULI[b].conj().T for a in range(4) for b in range(4))


def random_kraus(rng, n_ops):
    # Stinespring: columns of a random isometry give a CPTP Kraus set
    u = random_unitary(2 * n_ops, rng)[:, :2]
    return [u[2 * k : 2 * k + 2, :] for k in range(n_ops)]


def test_settings_are_informationally_complete():
    a = np.array([measurement_axis(s) for s in SETTINGS])
    assert np.linalg.matrix_rank(a) == 3
    # independent: n = R^dag Z R as a Bloch vector
    for s in SETTINGS:
        z = PRE[s].conj().T @ PAULIS["Z"] @ PRE[s]
        n = [np.real(np.trace(z @ PAULIS[k])) / 2 for k in "XYZ"]
        assert np.allclose(measurement_axis(s), n, atol=1e-12)


def test_state_tomography_exact_examples():
    zero = state_from_probabilities(p0_exact(projector([1, 0])))
    assert np.allclose(zero.matrix, np.diag([1, 0]), atol=1e-12)
    mixed = state_from_probabilities(p0_exact(I2 / 2))
    assert np.allclose(mixed.matrix, I2 / 2, atol=1e-12)


@given(density_matrices(st.just(1)))
def test_linear_inversion_exact(rho):
    est = state_from_probabilities(p0_exact(rho))
    assert np.max(np.abs(est.matrix - rho.matrix)) < 1e-12


def test_state_tomography_errors():
    with pytest.raises(DomainError):
        state_tomography({"identity": (1, 0), "x_half": (1, 1), "y_half": (1, 1)})
    with pytest.raises(DomainError):
        state_tomography({s: (0, 0) if s == "x_pi" else (1, 1) for s in SETTINGS})


def test_shot_tomography_of_plus_state(rng):
    psi = np.array([1, 1]) / math.sqrt(2)
    n = 10**5
    counts = {}
    for s, p in p0_exact(projector(psi)).items():
        k = rng.binomial(n, p)
        counts[s] = (k, n - k)
    assert state_fidelity(state_tomography(counts), psi) > 0.995


def test_physical_projection_flag():
    counts = {"identity": (100, 0), "x_half": (100, 0), "y_half": (100, 0), "x_pi": (0, 100)}
    raw = state_tomography(counts)
    assert np.linalg.eigvalsh(raw.matrix).min() < -0.1
    fixed = state_tomography(counts, physical=True)
    fixed.check()


def test_process_tomography_examples():
    ins = [s.density() for s in CANONICAL_INPUTS]
    chi = process_tomography(ins)
    expected = np.zeros((4, 4))
    expected[0, 0] = 1
    assert np.allclose(chi.entries, expected, atol=1e-10)
    chi_x = process_tomography([DensityMatrix(SX @ r.matrix @ SX) for r in ins])
    assert abs(chi_x.entries[1, 1] - 1) < 1e-10
    dep = process_tomography([DensityMatrix(I2 / 2)] * 4)
    assert np.allclose(dep.entries, np.eye(4) / 4, atol=1e-10)


def test_process_tomography_recovers_random_channels(rng):
    ins = [s.density().matrix for s in CANONICAL_INPUTS]
    for _ in range(50):
        kraus = random_kraus(rng, int(rng.integers(1, 5)))
        outs = [DensityMatrix(sum(k @ r @ k.conj().T for k in kraus)) for r in ins]
        chi = process_tomography(outs)
        assert np.max(np.abs(chi.entries - chi_of_kraus(kraus).entries)) < 1e-10
        assert chi.is_hermitian() and chi.trace_preservation_error() < 1e-8
        probe = random_density_matrix(1, rng).matrix
        assert np.allclose(chi_action(chi.entries, probe), sum(k @ probe @ k.conj().T for k in kraus), atol=1e-10)


@given(st.floats(0, 1), seeds)
def test_state_fidelity_affine(lam, seed):
    r = np.random.default_rng(seed)
    a, b = random_density_matrix(1, r), random_density_matrix(1, r)
    psi = haar_ket(r)
    mix = DensityMatrix(lam * a.matrix + (1 - lam) * b.matrix)
    assert abs(state_fidelity(mix, psi) - (lam * state_fidelity(a, psi) + (1 - lam) * state_fidelity(b, psi))) < 1e-12


def test_state_fidelity_examples(rng):
    psi = haar_ket(rng)
    assert state_fidelity(DensityMatrix.from_ket(psi), psi) == pytest.approx(1, abs=1e-12)
    assert state_fidelity(DensityMatrix(I2 / 2), psi) == pytest.approx(0.5, abs=1e-12)
    perp = np.array([-psi[1].conj(), psi[0].conj()])
    assert state_fidelity(DensityMatrix.from_ket(perp), psi) == pytest.approx(0, abs=1e-12)
    with pytest.raises(DomainError):
        state_fidelity(DensityMatrix(I2 / 2), np.array([1, 1]))


def test_process_fidelity_examples():
    assert process_fidelity(IDENTITY_CHI) == pytest.approx(1)
    assert process_fidelity(chi_of_unitary(SX)) == pytest.approx(0, abs=1e-15)
    assert process_fidelity(ChiMatrix(np.eye(4) / 4)) == pytest.approx(0.25)


def test_horodecki_examples():
    assert horodecki_process_from_state(2 / 3) == pytest.approx(0.5)
    assert horodecki_process_from_state(1.0) == pytest.approx(1.0)
    assert horodecki_process_from_state(0.824) == pytest.approx(0.736)
    assert horodecki_state_from_process(horodecki_process_from_state(0.8)) == pytest.approx(0.8)
    with pytest.raises(DomainError):
        horodecki_process_from_state(0.9, d=1)


def _teleport_channel(device, rho):
    # all four outcomes corrected and summed: a trace-preserving linear map
    return sum(b.probability * apply_correction(b.q3, b.bell).matrix for b in teleport_branches(DensityMatrix(rho), device))


def test_horodecki_against_haar_average_of_simulated_channel(rng):
    dev = Device.reference()
    chi = process_tomography([DensityMatrix(_teleport_channel(dev, s.density().matrix)) for s in CANONICAL_INPUTS])
    fids = []
    for _ in range(2000):
        psi = haar_ket(rng)
        out = _teleport_channel(dev, projector(psi))
        fids.append(np.real(psi.conj() @ out @ psi))
    f_haar = float(np.mean(fids))
    assert abs(horodecki_process_from_state(f_haar) - process_fidelity(chi)) < 0.01
    # the six cardinal states are a 2-design, so the cardinal average is exact
    assert abs(average_fidelity(chi) - horodecki_state_from_process(process_fidelity(chi))) < 1e-10


def test_error_budget_perfect_and_errors():
    assert error_budget(np.eye(2), np.eye(4), "post_selected") == pytest.approx((1.0, 1.0))
    assert error_budget(np.eye(2), np.eye(4), "all_outcomes") == pytest.approx((1.0, 1.0))
    with pytest.raises(DomainError):
        error_budget(np.array([[0.9, 0.2], [0.1, 0.9]]), np.eye(4))
    with pytest.raises(DomainError):
        error_budget(np.eye(2), np.eye(3))
    with pytest.raises(DomainError):
        error_budget(np.eye(2), np.eye(4), scheme="two_outcomes")


@given(st.floats(0.5, 1.0), st.floats(0.5, 1.0), seeds)
def test_error_budget_closed_forms(c00, c11, seed):
    q3 = np.array([[c00, 1 - c00], [1 - c11, c11]])
    f = c00 + c11 - 1
    r = np.random.default_rng(seed)
    bell = r.dirichlet(np.ones(4) * 0.3, size=4) + 4 * np.eye(4)
    bell /= bell.sum(axis=1, keepdims=True)
    for scheme in ("post_selected", "all_outcomes"):
        for model in ("infidelity", "posterior"):
            w = misassignment_pauli_weights(bell, scheme, model)
            lim_ro, lim_bell = error_budget(q3, bell, scheme, model)
            assert lim_ro == pytest.approx((1 + f) / 2, abs=1e-12)
            assert lim_bell == pytest.approx((1 + f * (4 * w[0] - 1) / 3) / 2, abs=1e-12)


def test_pauli_weights_posterior_oracle():
    c = np.array(
        [[0.9, 0.05, 0.03, 0.02], [0.1, 0.8, 0.05, 0.05], [0.2, 0.05, 0.7, 0.05], [0.05, 0.05, 0.1, 0.8]]
    )
    w = misassignment_pauli_weights(c, "post_selected", "posterior")
    # kept shots carry label 00; a true label t leaves the Pauli t
    assert np.allclose(w, c[:, 0] / c[:, 0].sum())
    w = misassignment_pauli_weights(c, "post_selected", "infidelity")
    assert w[0] == pytest.approx(binary_fidelity(c))
    assert w.sum() == pytest.approx(1)


def test_error_budget_reference_values(reference_cfg):
    q3 = confusion_matrix(reference_cfg.readout_model("q3"), reference_cfg.q3_t1s())
    ps = confusion_matrix(reference_cfg.readout_model(PHASE_SENSITIVE), reference_cfg.bell_t1s())
    pp = confusion_matrix(reference_cfg.readout_model(PHASE_PRESERVING), reference_cfg.bell_t1s())
    lim_ro, post = error_budget(q3, ps, "post_selected")
    _, allo = error_budget(q3, pp, "all_outcomes")
    assert abs(lim_ro - 0.94) <= 0.01
    assert abs(post - 0.89) <= 0.015
    assert abs(allo - 0.82) <= 0.015


def test_chi_shot_noise_scaling(rng):
    kraus = random_kraus(np.random.default_rng(5), 2)
    ins = [s.density().matrix for s in CANONICAL_INPUTS]
    outs = [sum(k @ r @ k.conj().T for k in kraus) for r in ins]
    exact = process_tomography([DensityMatrix(o) for o in outs]).entries
    probs = [p0_exact(o) for o in outs]
    ns = np.array([10**3, 10**4, 10**5, 10**6])
    errs = []
    for n in ns:
        e = []
        for _ in range(40):
            est = []
            for p in probs:
                counts = {}
                for s in SETTINGS:
                    k = rng.binomial(n, p[s])
                    counts[s] = (k, n - k)
                est.append(state_tomography(counts))
            e.append(np.linalg.norm(process_tomography(est).entries - exact))
        errs.append(np.mean(e))
    slope = np.polyfit(np.log(ns), np.log(errs), 1)[0]
    assert abs(slope + 0.5) <= 0.1


def test_matrix_export_roundtrip(tmp_path, rng):
    chi = chi_of_kraus(random_kraus(rng, 3))
    path = tmp_path / "chi_00.txt"
    write_chi(path, chi, outcome="00")
    m, labels, meta = read_matrix(path)
    assert labels == ["I", "X", "Y", "Z"] and meta["kind"] == "chi" and meta["outcome"] == "00"
    assert np.allclose(m, chi.entries, atol=1e-8)
    rho = random_density_matrix(1, rng)
    write_density(tmp_path / "rho.txt", rho)
    m, labels, _ = read_matrix(tmp_path / "rho.txt")
    assert labels == ["0", "1"] and np.allclose(m, rho.matrix, atol=1e-8)
