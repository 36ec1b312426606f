"""Hypothesis strategies shared by the property tests."""

import numpy as np
from hypothesis import strategies as st

from qteleport.linalg import DensityMatrix, random_density_matrix

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@st.composite
def density_matrices(draw, num_qubits=st.integers(1, 3)):
    n = draw(num_qubits) if not isinstance(num_qubits, int) else num_qubits
    rank = draw(st.integers(1, 2**n))
    return random_density_matrix(n, np.random.default_rng(draw(seeds)), rank)


@st.composite
def complex_matrices(draw, dim=2):
    rng = np.random.default_rng(draw(seeds))
    return rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))


angles = st.floats(min_value=-2 * np.pi, max_value=2 * np.pi, allow_nan=False)


def pure(psi) -> DensityMatrix:
    return DensityMatrix.from_ket(np.asarray(psi, dtype=complex))
