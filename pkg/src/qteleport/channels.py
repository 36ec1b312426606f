"""Gate unitaries, decoherence channels and their application to registers.

Gates are ideal unitaries followed by one decoherence window of the gate's
duration on every register qubit. Gates sharing a circuit moment share that
window (see :func:`apply_moment`).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .linalg import PAULIS, SZ, DensityMatrix, DomainError, adjoint, embed, tensor

SINGLE_QUBIT_GATE_TIME = 12e-9
COMPLETENESS_TOL = 1e-10
UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class QubitParams:
    """Coherence constants of one transmon; ``inf`` means no decay."""

    t1: float
    t2: float
    transition_frequency: float | None = None
    label: str = ""

    def __post_init__(self):
        if not self.t1 > 0 or not self.t2 > 0:
            raise DomainError(f"{self.label or 'qubit'}: t1 and t2 must be positive")
        if self.t2 > 2 * self.t1:
            raise DomainError(
                f"{self.label or 'qubit'}: t2={self.t2:g} exceeds 2*t1={2 * self.t1:g}"
            )

    @property
    def dephasing_rate(self) -> float:
        """Pure-dephasing rate 1/t2 - 1/(2 t1)."""
        return 1.0 / self.t2 - 0.5 / self.t1


NOISELESS = QubitParams(math.inf, math.inf, label="noiseless")


@dataclass(frozen=True)
class KrausChannel:
    operators: tuple
    label: str = ""

    def __post_init__(self):
        ops = tuple(np.array(k, dtype=complex) for k in self.operators)
        if not ops:
            raise DomainError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if any(k.shape != shape for k in ops) or shape[0] != shape[1]:
            raise DomainError("Kraus operators must be square and of equal size")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    @property
    def num_qubits(self) -> int:
        return int(round(math.log2(self.dim)))

    def completeness_error(self) -> float:
        s = sum(adjoint(k) @ k for k in self.operators)
        return float(np.max(np.abs(s - np.eye(self.dim))))

    def then(self, other: "KrausChannel") -> "KrausChannel":
        """Channel applying ``self`` first and ``other`` second."""
        if other.dim != self.dim:
            raise DomainError("cannot compose channels of different dimension")
        ops = [b @ a for a, b in itertools.product(self.operators, other.operators)]
        return KrausChannel(tuple(ops), f"{self.label}>{other.label}")


@dataclass(frozen=True)
class GateEvent:
    unitary: np.ndarray
    targets: tuple = (0,)
    duration: float = SINGLE_QUBIT_GATE_TIME
    label: str = ""

    def __post_init__(self):
        u = np.array(self.unitary, dtype=complex)
        u.setflags(write=False)
        object.__setattr__(self, "unitary", u)
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if u.shape != (2 ** len(self.targets),) * 2:
            raise DomainError(f"unitary shape {u.shape} does not fit targets {self.targets}")
        if np.max(np.abs(adjoint(u) @ u - np.eye(u.shape[0]))) > UNITARITY_TOL:
            raise DomainError(f"gate {self.label!r} is not unitary")
        if self.duration < 0:
            raise DomainError("gate duration must be non-negative")

    def on(self, *targets: int) -> "GateEvent":
        return GateEvent(self.unitary, targets, self.duration, self.label)


_AXES = {"x": (PAULIS["X"], 1.0), "y": (PAULIS["Y"], 1.0), "-y": (PAULIS["Y"], -1.0), "z": (PAULIS["Z"], 1.0)}


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    """exp(-i angle sigma_axis / 2); ``-y`` negates the angle."""
    try:
        sigma, sign = _AXES[axis]
    except KeyError:
        raise DomainError(f"unknown rotation axis {axis!r}") from None
    a = sign * angle / 2
    return math.cos(a) * np.eye(2) - 1j * math.sin(a) * sigma


def rotation(axis: str, angle: float, target: int = 0, duration: float = SINGLE_QUBIT_GATE_TIME) -> GateEvent:
    return GateEvent(rotation_matrix(axis, angle), (target,), duration, f"R{axis}({angle:.4g})")


def xy_rotation(axis_phase: float, angle: float, target: int = 0, duration: float = SINGLE_QUBIT_GATE_TIME) -> GateEvent:
    """Rotation about the equatorial axis (cos p, sin p, 0); p=0 is x, p=pi/2 is y."""
    n_sigma = math.cos(axis_phase) * PAULIS["X"] + math.sin(axis_phase) * PAULIS["Y"]
    u = math.cos(angle / 2) * np.eye(2) - 1j * math.sin(angle / 2) * n_sigma
    return GateEvent(u, (target,), duration, f"R[{axis_phase:.3g}]({angle:.4g})")


CPHASE_MATRIX = np.diag([1, 1, 1, -1]).astype(complex)


def cphase(targets: tuple = (0, 1), duration: float = 0.0) -> GateEvent:
    return GateEvent(CPHASE_MATRIX, targets, duration, "CPHASE")


def identity_gate(target: int = 0, duration: float = 0.0) -> GateEvent:
    return GateEvent(np.eye(2), (target,), duration, "I")


def amplitude_damping(duration: float, t1: float) -> KrausChannel:
    if not t1 > 0:
        raise DomainError("t1 must be positive")
    if duration < 0:
        raise DomainError("duration must be non-negative")
    p = -math.expm1(-duration / t1)
    k0 = np.array([[1, 0], [0, math.sqrt(1 - p)]], dtype=complex)
    k1 = np.array([[0, math.sqrt(p)], [0, 0]], dtype=complex)
    return KrausChannel((k0, k1), f"AD(p={p:.4g})")


def pure_dephasing(duration: float, t1: float, t2: float) -> KrausChannel:
    """Phase-flip channel supplying the coherence decay not covered by T1.

    Composed with :func:`amplitude_damping` over the same duration the
    off-diagonal element decays as exp(-duration/t2).
    """
    params = QubitParams(t1, t2)  # validates 0 < t2 <= 2 t1
    if duration < 0:
        raise DomainError("duration must be non-negative")
    flip = -0.5 * math.expm1(-params.dephasing_rate * duration)
    return KrausChannel(
        (math.sqrt(1 - flip) * np.eye(2), math.sqrt(flip) * SZ), f"PD(p={flip:.4g})"
    )


def decoherence(duration: float, params: QubitParams) -> KrausChannel:
    return amplitude_damping(duration, params.t1).then(pure_dephasing(duration, params.t1, params.t2))


def depolarizing(p: float, num_qubits: int = 1) -> KrausChannel:
    """rho -> (1 - p) rho + p I/d, written as a Pauli Kraus set."""
    d = 2**num_qubits
    if not 0 <= p <= d * d / (d * d - 1):
        raise DomainError(f"depolarizing strength {p} out of range")
    paulis = [tensor(*ps) for ps in itertools.product(PAULIS.values(), repeat=num_qubits)]
    w_rest = p / (d * d)
    ops = [math.sqrt(1 - p + w_rest) * paulis[0]] + [math.sqrt(w_rest) * m for m in paulis[1:]]
    return KrausChannel(tuple(ops), f"DEP{num_qubits}(p={p:.4g})")


def apply_kraus(channel: KrausChannel, rho: DensityMatrix, targets: Sequence[int]) -> DensityMatrix:
    n = rho.num_qubits
    if 2 ** len(targets) != channel.dim:
        raise DomainError(f"channel on {channel.num_qubits} qubit(s) given targets {tuple(targets)}")
    m = rho.matrix
    out = np.zeros_like(m)
    for k in channel.operators:
        kf = embed(k, tuple(targets), n)
        out += kf @ m @ adjoint(kf)
    return DensityMatrix(out)


def apply_unitary(u: np.ndarray, rho: DensityMatrix, targets: Sequence[int]) -> DensityMatrix:
    uf = embed(u, tuple(targets), rho.num_qubits)
    return DensityMatrix(uf @ rho.matrix @ adjoint(uf))


def decohere_register(rho: DensityMatrix, duration: float, qubits: Sequence[QubitParams]) -> DensityMatrix:
    """Idle decoherence of ``duration`` on every qubit of the register."""
    if len(qubits) != rho.num_qubits:
        raise DomainError(f"need {rho.num_qubits} qubit parameter sets, got {len(qubits)}")
    if duration == 0:
        return rho
    for q, params in enumerate(qubits):
        if math.isinf(params.t1) and params.dephasing_rate == 0:
            continue
        rho = apply_kraus(decoherence(duration, params), rho, (q,))
    return rho


Operation = Union[GateEvent, KrausChannel]


def apply(
    op: Operation,
    rho: DensityMatrix,
    targets: Sequence[int] | None = None,
    qubits: Sequence[QubitParams] | None = None,
) -> DensityMatrix:
    """Apply a gate (unitary plus register-wide decoherence) or a Kraus channel.

    ``qubits`` holds one :class:`QubitParams` per register qubit; ``None``
    makes gates noiseless.
    """
    if isinstance(op, KrausChannel):
        if targets is None:
            targets = tuple(range(op.num_qubits))
        return apply_kraus(op, rho, targets)
    targets = op.targets if targets is None else tuple(targets)
    if len(targets) != len(op.targets):
        raise DomainError(f"gate {op.label!r} acts on {len(op.targets)} qubit(s)")
    rho = apply_unitary(op.unitary, rho, targets)
    if qubits is not None:
        rho = decohere_register(rho, op.duration, qubits)
    return rho


def apply_moment(
    events: Sequence[GateEvent], rho: DensityMatrix, qubits: Sequence[QubitParams] | None = None
) -> DensityMatrix:
    """Apply gates on disjoint qubits concurrently; one shared decoherence window."""
    used = [t for e in events for t in e.targets]
    if len(used) != len(set(used)):
        raise DomainError("gates in one moment must act on disjoint qubits")
    for e in events:
        rho = apply_unitary(e.unitary, rho, e.targets)
    if qubits is not None and events:
        rho = decohere_register(rho, max(e.duration for e in events), qubits)
    return rho
