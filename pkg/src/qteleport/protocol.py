"""Teleportation circuit in the CPHASE formulation.

Register order is (Q1, Q2, Q3) = qubits (0, 1, 2). Q1 carries the input,
(Q2, Q3) share the Bell pair and Q3 receives the teleported state.

Conventions fixed here (checked by the test-suite):

* Bell preparation ``[Ry(pi/2) Q2, Ry(pi/2) Q3] -> CPHASE(Q2,Q3) -> R-y(pi/2) Q3``
  produces |Phi-> = (|00> - |11>)/sqrt 2 on (Q2, Q3).
* Bell-basis transform ``Ry(pi/2) Q2 -> CPHASE(Q1,Q2) -> [R-y(pi/2) Q1, R-y(pi/2) Q2]``
  sends Phi-, Psi-, Phi+, Psi+ to 00, 01, 10, 11. A remap to Bell state r
  flips the sign of the final rotation on every qubit whose bit in r is 1,
  which equals an extra pi pulse; measured label m then means Bell label m XOR r.
* With the Phi- resource, Bell label k leaves Q3 in ``correction_for(k) |psi_in>``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .channels import (
    NOISELESS,
    SINGLE_QUBIT_GATE_TIME,
    QubitParams,
    apply,
    apply_moment,
    cphase,
    decohere_register,
    depolarizing,
    identity_gate,
    rotation,
    xy_rotation,
)
from .linalg import I2, SX, SY, SZ, DensityMatrix, DomainError, adjoint, ket, partial_trace, tensor

Q1, Q2, Q3 = 0, 1, 2
OUTCOMES = ("00", "01", "10", "11")
ZERO_PROBABILITY = 1e-12


class BellLabel(enum.Enum):
    PhiMinus = "00"
    PsiMinus = "01"
    PhiPlus = "10"
    PsiPlus = "11"

    @property
    def bits(self) -> str:
        return self.value

    @property
    def short(self) -> str:
        return {"00": "phim", "01": "psim", "10": "phip", "11": "psip"}[self.value]

    @classmethod
    def parse(cls, name: "str | BellLabel") -> "BellLabel":
        if isinstance(name, BellLabel):
            return name
        for label in cls:
            if name in (label.name, label.value, label.short):
                return label
        raise DomainError(f"unknown Bell label {name!r}")

    def ket(self) -> np.ndarray:
        s = 1 / math.sqrt(2)
        return {
            "00": s * (ket("00") - ket("11")),
            "01": s * (ket("01") - ket("10")),
            "10": s * (ket("00") + ket("11")),
            "11": s * (ket("01") + ket("10")),
        }[self.value]


def xor_label(a: str, b: str) -> str:
    return f"{int(a, 2) ^ int(b, 2):02b}"


def bell_label_for(measured: str, remap: BellLabel = BellLabel.PhiMinus) -> BellLabel:
    """Bell state that the transform with ``remap`` sends to ``measured``."""
    return BellLabel(xor_label(measured, remap.bits))


@dataclass(frozen=True)
class InputSpec:
    """Bloch angles of cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>."""

    theta: float
    phi: float = 0.0
    name: str = ""

    def ket(self) -> np.ndarray:
        return np.array(
            [math.cos(self.theta / 2), np.exp(1j * self.phi) * math.sin(self.theta / 2)], dtype=complex
        )

    def density(self) -> DensityMatrix:
        return DensityMatrix.from_ket(self.ket())


# |0>, |1>, (|0>+|1>)/sqrt2, (|0>-i|1>)/sqrt2
CANONICAL_INPUTS = (
    InputSpec(0.0, 0.0, "0"),
    InputSpec(math.pi, 0.0, "1"),
    InputSpec(math.pi / 2, 0.0, "+"),
    InputSpec(math.pi / 2, -math.pi / 2, "-i"),
)


@dataclass(frozen=True)
class Device:
    """Per-qubit coherence and gate timing of the three-qubit register."""

    qubits: tuple = (NOISELESS, NOISELESS, NOISELESS)
    single_qubit_time: float = SINGLE_QUBIT_GATE_TIME
    cphase_q1q2_time: float = 29.5e-9
    cphase_q2q3_time: float = 37.3e-9
    bell_depolarizing: float = 0.0
    readout_time: float = 250e-9
    q3_decoheres_during_readout: bool = True

    def __post_init__(self):
        if len(self.qubits) != 3:
            raise DomainError("device needs exactly three qubits")

    @classmethod
    def noiseless(cls) -> "Device":
        return cls()

    @classmethod
    def reference(cls, bell_depolarizing: float | None = None) -> "Device":
        dev = cls(
            qubits=(
                QubitParams(2.6e-6, 1.8e-6, 5.114e9, "Q1"),
                QubitParams(2.4e-6, 1.4e-6, 6.004e9, "Q2"),
                QubitParams(2.0e-6, 1.2e-6, 6.766e9, "Q3"),
            )
        )
        p = calibrate_bell_depolarizing(dev) if bell_depolarizing is None else bell_depolarizing
        return replace(dev, bell_depolarizing=p)


def ground_register() -> DensityMatrix:
    return DensityMatrix.basis("000")


def bell_pair_moments(device: Device) -> list[list]:
    t1q = device.single_qubit_time
    return [
        [rotation("y", math.pi / 2, Q2, t1q), rotation("y", math.pi / 2, Q3, t1q)],
        [cphase((Q2, Q3), device.cphase_q2q3_time)],
        [rotation("-y", math.pi / 2, Q3, t1q)],
    ]


def prepare_bell_pair(register: DensityMatrix, device: Device = Device()) -> DensityMatrix:
    """Entangle (Q2, Q3) into |Phi->, followed by the configured preparation error."""
    for moment in bell_pair_moments(device):
        register = apply_moment(moment, register, device.qubits)
    if device.bell_depolarizing > 0:
        register = apply(depolarizing(device.bell_depolarizing, 2), register, (Q2, Q3))
    return register


def bell_pair_fidelity(device: Device) -> float:
    rho23 = partial_trace(prepare_bell_pair(ground_register(), device), (Q2, Q3))
    psi = BellLabel.PhiMinus.ket()
    return float(np.real(psi.conj() @ rho23.matrix @ psi))


def calibrate_bell_depolarizing(device: Device, target: float = 0.93) -> float:
    """Depolarizing strength on (Q2,Q3) that brings the Bell fidelity to ``target``.

    Depolarizing is affine in the state: F(p) = (1 - p) F0 + p/4.
    """
    f0 = bell_pair_fidelity(replace(device, bell_depolarizing=0.0))
    if not 0.25 < target <= f0:
        raise DomainError(f"Bell fidelity {target} unreachable (noise-only fidelity {f0:.4f})")
    return (f0 - target) / (f0 - 0.25)


def input_gate(spec: InputSpec, device: Device = Device()):
    # R about the equatorial axis at phi + pi/2 takes |0> to cos|0> + e^{i phi} sin|1>.
    return xy_rotation(spec.phi + math.pi / 2, spec.theta, Q1, device.single_qubit_time)


def prepare_input(register: DensityMatrix, spec: InputSpec, device: Device = Device()) -> DensityMatrix:
    return apply(input_gate(spec, device), register, qubits=device.qubits)


def bell_transform_moments(device: Device, remap: BellLabel = BellLabel.PhiMinus) -> list[list]:
    t1q = device.single_qubit_time
    r1, r2 = (int(b) for b in remap.bits)
    return [
        [rotation("y", math.pi / 2, Q2, t1q)],
        [cphase((Q1, Q2), device.cphase_q1q2_time)],
        [
            rotation("y" if r1 else "-y", math.pi / 2, Q1, t1q),
            rotation("y" if r2 else "-y", math.pi / 2, Q2, t1q),
        ],
    ]


def bell_basis_transform(
    register: DensityMatrix, remap: BellLabel = BellLabel.PhiMinus, device: Device = Device()
) -> DensityMatrix:
    for moment in bell_transform_moments(device, remap):
        register = apply_moment(moment, register, device.qubits)
    return register


def bell_transform_unitary(remap: BellLabel = BellLabel.PhiMinus) -> np.ndarray:
    """Noiseless two-qubit unitary of the transform on (Q1, Q2)."""
    u = np.eye(4, dtype=complex)
    for moment in bell_transform_moments(Device(), remap):
        for g in moment:
            targets = tuple(t - Q1 for t in g.targets)
            if len(targets) == 2:
                full = g.unitary
            else:
                full = tensor(g.unitary, I2) if targets[0] == 0 else tensor(I2, g.unitary)
            u = full @ u
    return u


def joint_projector(outcome: str, num_qubits: int = 3) -> np.ndarray:
    if outcome not in OUTCOMES:
        raise DomainError(f"outcome must be one of {OUTCOMES}, got {outcome!r}")
    p = np.zeros(4)
    p[int(outcome, 2)] = 1
    return np.kron(np.diag(p), np.eye(2 ** (num_qubits - 2))).astype(complex)


def project_joint(register: DensityMatrix, outcome: str) -> tuple[float, DensityMatrix | None]:
    """Born probability of ``outcome`` on (Q1, Q2) and the normalised post-measurement state.

    Branches with probability below 1e-12 return ``(p, None)``.
    """
    proj = joint_projector(outcome, register.num_qubits)
    m = proj @ register.matrix @ proj
    p = float(np.real(np.trace(m)))
    if p < ZERO_PROBABILITY:
        return p, None
    return p, DensityMatrix(m / p)


_CORRECTIONS = {"00": I2, "01": SX, "10": SZ, "11": 1j * SY}


def correction_for(outcome: "str | BellLabel") -> np.ndarray:
    """Pauli that undoes the byproduct left on Q3 by Bell label ``outcome``."""
    bits = outcome.bits if isinstance(outcome, BellLabel) else outcome
    if bits not in _CORRECTIONS:
        raise DomainError(f"outcome must be one of {OUTCOMES}, got {outcome!r}")
    return _CORRECTIONS[bits].copy()


def apply_correction(rho3: DensityMatrix, bell: "str | BellLabel") -> DensityMatrix:
    c = correction_for(bell)
    return DensityMatrix(c @ rho3.matrix @ adjoint(c))


@dataclass(frozen=True)
class Branch:
    """One measured (Q1, Q2) label: its probability and Q3's uncorrected state."""

    measured: str
    bell: BellLabel
    probability: float
    q3: DensityMatrix | None


def register_before_measurement(
    rho_in: DensityMatrix, device: Device = Device(), remap: BellLabel = BellLabel.PhiMinus
) -> DensityMatrix:
    """Full register right before the joint readout, for an arbitrary Q1 input.

    Q1 sits in |0> during the Bell preparation, which local noise leaves
    untouched, so the input can be substituted after that step. The input
    preparation pulse is represented by its decoherence window.
    """
    pair = prepare_bell_pair(ground_register(), device)
    rho23 = partial_trace(pair, (Q2, Q3))
    register = DensityMatrix(tensor(rho_in.matrix, rho23.matrix))
    register = apply(identity_gate(Q1, device.single_qubit_time), register, qubits=device.qubits)
    return bell_basis_transform(register, remap, device)


def teleport_branches(
    rho_in: DensityMatrix, device: Device = Device(), remap: BellLabel = BellLabel.PhiMinus
) -> list[Branch]:
    """Exact outcome probabilities and conditional Q3 states for every measured label.

    Q3 additionally idles for the joint-readout window when the device says so.
    """
    register = register_before_measurement(rho_in, device, remap)
    branches = []
    for m in OUTCOMES:
        p, post = project_joint(register, m)
        q3 = None
        if post is not None:
            q3 = partial_trace(post, (Q3,))
            if device.q3_decoheres_during_readout:
                q3 = decohere_register(q3, device.readout_time, device.qubits[Q3:])
        branches.append(Branch(m, bell_label_for(m, remap), p, q3))
    return branches


def run_ideal_teleport(spec: InputSpec, outcome: "str | BellLabel", remap: BellLabel = BellLabel.PhiMinus) -> DensityMatrix:
    """Noiseless teleportation of ``spec`` for one measured label, correction applied."""
    register = prepare_bell_pair(ground_register())
    register = prepare_input(register, spec)
    register = bell_basis_transform(register, remap)
    measured = outcome if isinstance(outcome, str) else xor_label(outcome.bits, remap.bits)
    p, post = project_joint(register, measured)
    if post is None:
        raise DomainError(f"outcome {measured} has zero probability")
    q3 = partial_trace(post, (Q3,))
    return apply_correction(q3, bell_label_for(measured, remap))
