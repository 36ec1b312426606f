"""Dense complex-matrix helpers and the density-matrix state type.

Operators are plain ``numpy`` complex arrays. Qubit 0 is the leftmost tensor
factor and the leftmost bit of a computational label, so ``|b0 b1 b2>`` has
index ``4*b0 + 2*b1 + b2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 3

TRACE_TOL = 1e-10
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-9

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = {"I": I2, "X": SX, "Y": SY, "Z": SZ}


class DomainError(ValueError):
    """Raised when an operation receives arguments outside its domain."""


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product; the first argument is the high-order block."""
    if not ops:
        raise DomainError("tensor() needs at least one operand")
    return reduce(np.kron, (np.asarray(op, dtype=complex) for op in ops))


def adjoint(m: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(m)).T


def ket(label: str) -> np.ndarray:
    """Computational basis ket for a bit string such as ``"010"``."""
    if not label or any(c not in "01" for c in label):
        raise DomainError(f"invalid basis label {label!r}")
    vec = np.zeros(2 ** len(label), dtype=complex)
    vec[int(label, 2)] = 1.0
    return vec


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and bool(np.max(np.abs(m - adjoint(m)), initial=0.0) <= tol)


def eigenvalues_hermitian(m: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix in descending order."""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {m.shape}")
    if not is_hermitian(m, tol):
        raise DomainError("matrix is not Hermitian")
    return np.linalg.eigvalsh(0.5 * (m + adjoint(m)))[::-1]


def _num_qubits_for(dim: int) -> int:
    n = int(round(np.log2(dim))) if dim > 0 else -1
    if n < 1 or 2**n != dim:
        raise DomainError(f"dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True)
class DensityMatrix:
    """Trace-one PSD state over 1 to 3 qubits.

    Construction does not validate; call :meth:`check` (or use
    :meth:`validated`) where the physical invariants must hold.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError(f"density matrix must be square, got shape {m.shape}")
        n = _num_qubits_for(m.shape[0])
        if n > MAX_QUBITS:
            raise DomainError(f"at most {MAX_QUBITS} qubits supported, got {n}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def num_qubits(self) -> int:
        return _num_qubits_for(self.matrix.shape[0])

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_ket(cls, psi: np.ndarray) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        return cls(projector(psi / np.linalg.norm(psi)))

    @classmethod
    def basis(cls, label: str) -> "DensityMatrix":
        return cls(projector(ket(label)))

    @classmethod
    def maximally_mixed(cls, num_qubits: int) -> "DensityMatrix":
        d = 2**num_qubits
        return cls(np.eye(d, dtype=complex) / d)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def check(self) -> None:
        """Raise :class:`DomainError` unless trace, Hermiticity and PSD hold."""
        m = self.matrix
        if abs(np.trace(m) - 1.0) > TRACE_TOL:
            raise DomainError(f"trace {np.trace(m):.3g} differs from 1")
        if not is_hermitian(m):
            raise DomainError("density matrix is not Hermitian")
        if eigenvalues_hermitian(m)[-1] < -PSD_TOL:
            raise DomainError("density matrix has a negative eigenvalue")

    def validated(self) -> "DensityMatrix":
        self.check()
        return self


def product_state(*states: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(tensor(*(s.matrix for s in states)))


def partial_trace(rho: DensityMatrix | np.ndarray, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on the qubits in ``keep`` (kept in ascending order)."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    n = _num_qubits_for(m.shape[0])
    keep = sorted(set(keep))
    if not keep:
        raise DomainError("keep must name at least one qubit")
    if keep[0] < 0 or keep[-1] >= n:
        raise DomainError(f"qubit indices {keep} out of range for {n} qubits")
    traced = [q for q in range(n) if q not in keep]
    t = m.reshape([2] * (2 * n))
    # Trace out from the highest index down so remaining axis numbers stay valid.
    for q in reversed(traced):
        n_now = t.ndim // 2
        t = np.trace(t, axis1=q, axis2=q + n_now)
    d = 2 ** len(keep)
    return DensityMatrix(t.reshape(d, d))


def embed(op: np.ndarray, targets: Sequence[int], num_qubits: int) -> np.ndarray:
    """Full-register matrix of ``op`` acting on ``targets`` (in that order)."""
    op = np.asarray(op, dtype=complex)
    k = len(targets)
    if op.shape != (2**k, 2**k):
        raise DomainError(f"operator shape {op.shape} does not match {k} target(s)")
    if len(set(targets)) != k or min(targets) < 0 or max(targets) >= num_qubits:
        raise DomainError(f"invalid targets {targets} for {num_qubits} qubits")
    rest = [q for q in range(num_qubits) if q not in targets]
    full = tensor(op, np.eye(2 ** len(rest), dtype=complex)) if rest else op
    # full acts on qubit order (targets..., rest...); permute back to 0..n-1.
    order = list(targets) + rest
    perm = np.argsort(order)
    t = full.reshape([2] * (2 * num_qubits))
    t = t.transpose(list(perm) + [num_qubits + p for p in perm])
    return t.reshape(2**num_qubits, 2**num_qubits)


def random_density_matrix(num_qubits: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Ginibre-ensemble mixed state, handy for property checks."""
    d = 2**num_qubits
    g = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    m = g @ adjoint(g)
    return DensityMatrix(m / np.trace(m))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def haar_ket(rng: np.random.Generator, d: int = 2) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)
