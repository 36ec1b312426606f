"""Linear-inversion state and process tomography, fidelities and the readout error budget.

Process matrices use the Pauli operator basis (I, X, Y, Z), normalised
as Tr(s_i s_j) = 2 delta_ij, with E(rho) = sum_mn chi_mn s_m rho s_n and
trace(chi) = 1 for trace-preserving maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .channels import rotation_matrix
from .linalg import PAULIS, DensityMatrix, DomainError, adjoint, projector
from .protocol import CANONICAL_INPUTS, InputSpec

PAULI_LABELS = ("I", "X", "Y", "Z")
PAULI_LIST = [PAULIS[k] for k in PAULI_LABELS]
SETTINGS = ("identity", "x_half", "y_half", "x_pi")

_PRE_ROTATIONS = {
    "identity": np.eye(2, dtype=complex),
    "x_half": rotation_matrix("x", math.pi / 2),
    "y_half": rotation_matrix("y", math.pi / 2),
    "x_pi": rotation_matrix("x", math.pi),
}


def pre_rotation(setting: str) -> np.ndarray:
    try:
        return _PRE_ROTATIONS[setting].copy()
    except KeyError:
        raise DomainError(f"unknown tomography setting {setting!r}") from None


def measurement_axis(setting: str) -> np.ndarray:
    """Bloch vector n with P(0) = (1 + n . r) / 2 after the pre-rotation."""
    r = pre_rotation(setting)
    e0 = adjoint(r) @ projector(np.array([1, 0])) @ r
    return np.real([np.trace(e0 @ PAULIS[k]) for k in "XYZ"])


def probability_zero(rho: DensityMatrix | np.ndarray, setting: str) -> float:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    r = pre_rotation(setting)
    return float(np.real((r @ m @ adjoint(r))[0, 0]))


def bloch_vector(rho: DensityMatrix | np.ndarray) -> np.ndarray:
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return np.real([np.trace(m @ PAULIS[k]) for k in "XYZ"])


def from_bloch(r: Sequence[float]) -> DensityMatrix:
    x, y, z = r
    return DensityMatrix(0.5 * (np.eye(2) + x * PAULIS["X"] + y * PAULIS["Y"] + z * PAULIS["Z"]))


def project_to_physical(rho: DensityMatrix) -> DensityMatrix:
    """Clip negative eigenvalues and renormalise."""
    w, v = np.linalg.eigh(0.5 * (rho.matrix + adjoint(rho.matrix)))
    w = np.clip(w, 0, None)
    m = (v * w) @ adjoint(v)
    return DensityMatrix(m / np.trace(m))


def state_from_probabilities(p0: Mapping[str, float], physical: bool = False) -> DensityMatrix:
    """Least-squares Bloch vector from per-setting P(0)."""
    missing = [s for s in SETTINGS if s not in p0]
    if missing:
        raise DomainError(f"missing tomography settings: {missing}")
    a = np.array([measurement_axis(s) for s in SETTINGS])
    b = np.array([2 * p0[s] - 1 for s in SETTINGS])
    r, *_ = np.linalg.lstsq(a, b, rcond=None)
    rho = from_bloch(r)
    return project_to_physical(rho) if physical else rho


def state_tomography(counts: Mapping[str, Sequence[int]], physical: bool = False) -> DensityMatrix:
    """Single-qubit state from ``{setting: (n0, n1)}`` counts by linear inversion."""
    p0 = {}
    for s in SETTINGS:
        if s not in counts:
            raise DomainError(f"missing tomography setting {s!r}")
        n0, n1 = counts[s]
        if n0 + n1 < 1:
            raise DomainError(f"setting {s!r} has no counts")
        p0[s] = n0 / (n0 + n1)
    return state_from_probabilities(p0, physical)


@dataclass(frozen=True)
class ChiMatrix:
    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=complex)
        if e.shape != (4, 4):
            raise DomainError("chi must be 4x4")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    def is_hermitian(self, tol: float = 1e-9) -> bool:
        return bool(np.max(np.abs(self.entries - adjoint(self.entries))) <= tol)

    def trace_preservation_error(self) -> float:
        s = sum(self.entries[m, n] * PAULI_LIST[n].conj().T @ PAULI_LIST[m] for m in range(4) for n in range(4))
        return float(np.max(np.abs(s - np.eye(2))))

    def apply(self, rho: DensityMatrix | np.ndarray) -> DensityMatrix:
        m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
        out = sum(self.entries[i, j] * PAULI_LIST[i] @ m @ PAULI_LIST[j].conj().T for i in range(4) for j in range(4))
        return DensityMatrix(out)


def chi_of_unitary(u: np.ndarray) -> ChiMatrix:
    c = np.array([np.trace(p.conj().T @ u) / 2 for p in PAULI_LIST])
    return ChiMatrix(np.outer(c, c.conj()))


def chi_of_kraus(kraus: Sequence[np.ndarray]) -> ChiMatrix:
    chi = np.zeros((4, 4), dtype=complex)
    for k in kraus:
        c = np.array([np.trace(p.conj().T @ k) / 2 for p in PAULI_LIST])
        chi += np.outer(c, c.conj())
    return ChiMatrix(chi)


IDENTITY_CHI = chi_of_unitary(np.eye(2))


def _chi_design(inputs: Sequence[np.ndarray]) -> np.ndarray:
    cols = []
    for m in range(4):
        for n in range(4):
            cols.append(np.concatenate([(PAULI_LIST[m] @ r @ PAULI_LIST[n].conj().T).ravel() for r in inputs]))
    return np.array(cols).T


def process_tomography(
    outputs: Sequence[DensityMatrix], inputs: Sequence[InputSpec | DensityMatrix] = CANONICAL_INPUTS
) -> ChiMatrix:
    """Chi matrix that maps each input state exactly to its measured output."""
    if len(outputs) != 4 or len(inputs) != 4:
        raise DomainError("process tomography needs four input/output pairs")
    rin = [(s.density() if isinstance(s, InputSpec) else s).matrix for s in inputs]
    rout = np.concatenate([(o.matrix if isinstance(o, DensityMatrix) else np.asarray(o)).ravel() for o in outputs])
    x = np.linalg.solve(_chi_design(rin), rout)
    return ChiMatrix(x.reshape(4, 4))


def state_fidelity(rho: DensityMatrix | np.ndarray, target: np.ndarray) -> float:
    """<psi|rho|psi> for a normalised pure target."""
    psi = np.asarray(target, dtype=complex).reshape(-1)
    if abs(np.linalg.norm(psi) - 1) > 1e-9:
        raise DomainError("target state must be normalised")
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return float(np.real(psi.conj() @ m @ psi))


def process_fidelity(chi: ChiMatrix, ideal: ChiMatrix = IDENTITY_CHI) -> float:
    a, b = chi.entries, ideal.entries
    return float(np.real(np.trace(a @ b)) / np.real(np.trace(a) * np.trace(b)))


def horodecki_process_from_state(avg_state_fidelity: float, d: int = 2) -> float:
    """Process fidelity implied by a Haar-averaged output-state fidelity."""
    if d < 2:
        raise DomainError("dimension must be at least 2")
    return (avg_state_fidelity * (d + 1) - 1) / d


def horodecki_state_from_process(process_fid: float, d: int = 2) -> float:
    return (process_fid * d + 1) / (d + 1)


def cardinal_states() -> list[np.ndarray]:
    s = 1 / math.sqrt(2)
    return [
        np.array([1, 0], dtype=complex),
        np.array([0, 1], dtype=complex),
        np.array([s, s], dtype=complex),
        np.array([s, -s], dtype=complex),
        np.array([s, 1j * s], dtype=complex),
        np.array([s, -1j * s], dtype=complex),
    ]


def average_fidelity(chi: ChiMatrix) -> float:
    """Haar-average output fidelity of a qubit channel (the six cardinal states form a 2-design)."""
    return float(np.mean([state_fidelity(chi.apply(projector(psi)), psi) for psi in cardinal_states()]))


# ---------------------------------------------------------------------------
# error budget
# ---------------------------------------------------------------------------


def _check_stochastic(c: np.ndarray, n: int, name: str) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if c.shape != (n, n) or np.any(c < -1e-12) or np.any(np.abs(c.sum(axis=1) - 1) > 1e-9):
        raise DomainError(f"{name} must be a row-stochastic {n}x{n} matrix")
    return c


def readout_degraded_estimate(rho: np.ndarray, q3_confusion: np.ndarray) -> DensityMatrix:
    """Linear-inversion estimate when every setting is read out through ``q3_confusion``."""
    c = np.asarray(q3_confusion)
    p0 = {}
    for s in SETTINGS:
        p = probability_zero(rho, s)
        p0[s] = c[0, 0] * p + c[1, 0] * (1 - p)
    return state_from_probabilities(p0)


def misassignment_pauli_weights(bell_confusion, scheme: str = "all_outcomes", model: str = "infidelity") -> np.ndarray:
    """Weights of the Pauli error (I, X, Z, iY order by Bell label bits) left after correction.

    A shot from Bell label t that is assigned label a gets the correction for a,
    leaving the Pauli labelled ``t XOR a``. ``scheme`` selects which assigned
    labels are kept: ``all_outcomes`` or ``post_selected`` (label 00 only).

    ``model="posterior"`` weighs errors by their exact share among kept shots
    under a uniform Bell prior. ``model="infidelity"`` keeps that error mix but
    sets the total error weight to the Bell-readout infidelity (one minus the
    binary fidelity for post-selection, one minus the mean diagonal otherwise).
    """
    c = _check_stochastic(bell_confusion, 4, "bell_confusion")
    w = np.zeros(4)
    kept = range(4) if scheme == "all_outcomes" else (0,)
    if scheme not in ("all_outcomes", "post_selected"):
        raise DomainError(f"unknown scheme {scheme!r}")
    for a in kept:
        for t in range(4):
            w[t ^ a] += 0.25 * c[t, a]
    if w.sum() <= 0:
        raise DomainError("no kept shots under this confusion matrix")
    w /= w.sum()
    if model == "posterior":
        return w
    if model != "infidelity":
        raise DomainError(f"unknown model {model!r}")
    if scheme == "all_outcomes":
        f = float(np.mean(np.diag(c)))
    else:
        f = float(c[0, 0] + np.mean(1 - c[1:, 0]) - 1)
    err = w[1:]
    err = err / err.sum() if err.sum() > 0 else np.full(3, 1 / 3)
    return np.concatenate([[f], (1 - f) * err])


_BELL_PAULIS = [PAULIS["I"], PAULIS["X"], PAULIS["Z"], PAULIS["Y"]]


def error_budget(
    q3_confusion,
    bell_confusion,
    scheme: str = "all_outcomes",
    model: str = "infidelity",
) -> tuple[float, float]:
    """Output-fidelity limits from readout errors alone.

    Returns ``(limit_readout, limit_with_bell_dephasing)`` averaged over the
    six cardinal input states.
    """
    q3 = _check_stochastic(q3_confusion, 2, "q3_confusion")
    w = misassignment_pauli_weights(bell_confusion, scheme, model)
    lim_ro, lim_bell = [], []
    for psi in cardinal_states():
        rho = projector(psi)
        lim_ro.append(state_fidelity(readout_degraded_estimate(rho, q3), psi))
        dephased = sum(wk * p @ rho @ p.conj().T for wk, p in zip(w, _BELL_PAULIS))
        lim_bell.append(state_fidelity(readout_degraded_estimate(dephased, q3), psi))
    return float(np.mean(lim_ro)), float(np.mean(lim_bell))


# ---------------------------------------------------------------------------
# structured-text export
# ---------------------------------------------------------------------------

MATRIX_HEADER = "# row col real imag"


def write_matrix(path, matrix: np.ndarray, labels: Sequence[str], kind: str, meta: Mapping[str, object] | None = None) -> None:
    """One ``row col real imag`` line per entry after ``#`` header lines."""
    m = np.asarray(matrix, dtype=complex)
    with open(path, "w") as fh:
        fh.write(f"# kind: {kind}\n")
        fh.write(f"# basis: {' '.join(labels)}\n")
        for k, v in (meta or {}).items():
            fh.write(f"# {k}: {v}\n")
        fh.write(MATRIX_HEADER + "\n")
        for i, a in enumerate(labels):
            for j, b in enumerate(labels):
                fh.write(f"{a} {b} {m[i, j].real:.9e} {m[i, j].imag:.9e}\n")


def read_matrix(path) -> tuple[np.ndarray, list[str], dict]:
    meta, rows = {}, []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("#"):
                if ":" in line:
                    k, v = line[1:].split(":", 1)
                    meta[k.strip()] = v.strip()
                continue
            if line:
                rows.append(line.split())
    labels = meta["basis"].split()
    idx = {k: i for i, k in enumerate(labels)}
    m = np.zeros((len(labels), len(labels)), dtype=complex)
    for a, b, re, im in rows:
        m[idx[a], idx[b]] = complex(float(re), float(im))
    return m, labels, meta


def write_chi(path, chi: ChiMatrix, **meta) -> None:
    write_matrix(path, chi.entries, PAULI_LABELS, "chi", meta)


def write_density(path, rho: DensityMatrix, **meta) -> None:
    write_matrix(path, rho.matrix, ("0", "1"), "density", meta)
