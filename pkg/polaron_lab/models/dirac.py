from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True, eq=False)
class DiracAlgebra:
    """Dirac matrices in the standard representation, with γ5 and the spin generators S = (i/4) α×α."""

    alpha: Tuple[np.ndarray, np.ndarray, np.ndarray]
    beta: np.ndarray
    gamma5: np.ndarray
    spin: Tuple[np.ndarray, np.ndarray, np.ndarray]

    def alpha_dot(self, vector: Sequence[float]) -> np.ndarray:
        return sum(component * matrix for component, matrix in zip(vector, self.alpha))

    def spin_along(self, axis: Sequence[float]) -> np.ndarray:
        return sum(component * matrix for component, matrix in zip(axis, self.spin))

    @property
    def tau(self) -> np.ndarray:
        """α1 α2 β, the spinor part of the helicity-reversing reflection."""
        return self.alpha[0] @ self.alpha[1] @ self.beta


def _frozen(matrix: np.ndarray) -> np.ndarray:
    matrix = np.array(matrix, dtype=complex)
    matrix.setflags(write=False)
    return matrix


@lru_cache
def dirac_matrices() -> DiracAlgebra:
    zero = np.zeros((2, 2), dtype=complex)
    alpha = tuple(_frozen(np.block([[zero, sigma], [sigma, zero]])) for sigma in PAULI)
    beta = _frozen(np.diag([1, 1, -1, -1]))
    gamma5 = _frozen(-1j * alpha[0] @ alpha[1] @ alpha[2])
    # S_a = (i/4) ε_abc α_b α_c = (i/2) α_b α_c for cyclic (a, b, c)
    spin = tuple(
        _frozen(0.5j * alpha[(a + 1) % 3] @ alpha[(a + 2) % 3]) for a in range(3)
    )
    return DiracAlgebra(alpha=alpha, beta=beta, gamma5=gamma5, spin=spin)
