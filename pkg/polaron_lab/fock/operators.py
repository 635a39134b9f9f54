import logging
from dataclasses import dataclass
from itertools import product
from math import comb, factorial, sqrt
from typing import Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp

from polaron_lab.core.errors import DimensionMismatchError, HermiticityError, SymmetryError
from polaron_lab.fock.basis import FockBasis
from polaron_lab.fock.grid import ModeGrid

logger = logging.getLogger(__name__)

HERMITIAN_TOLERANCE = 1e-13


def hermiticity_defect(matrix) -> float:
    """max|A - A^H| relative to max|A|; zero for the zero matrix."""
    if sp.issparse(matrix):
        matrix = sp.csr_matrix(matrix)
        if matrix.nnz == 0:
            return 0.0
        scale = np.abs(matrix.data).max()
        difference = matrix - matrix.getH()
        defect = np.abs(difference.data).max() if difference.nnz else 0.0
    else:
        matrix = np.asarray(matrix)
        scale = np.abs(matrix).max() if matrix.size else 0.0
        defect = np.abs(matrix - matrix.conj().T).max() if matrix.size else 0.0
    return float(defect / scale) if scale > 0 else 0.0


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Sparse complex operator on the truncated Fock space, optionally with the spinor factor attached."""

    matrix: sp.csr_matrix
    hermitian: bool = False

    def __post_init__(self):
        matrix = sp.csr_matrix(self.matrix, dtype=complex)
        if matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatchError(f"operator must be square, got shape {matrix.shape}")
        matrix.sort_indices()
        object.__setattr__(self, "matrix", matrix)
        if self.hermitian:
            defect = hermiticity_defect(matrix)
            if defect > HERMITIAN_TOLERANCE:
                raise HermiticityError(f"operator flagged Hermitian has relative defect {defect:.3e}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def adjoint(self) -> "OperatorMatrix":
        return OperatorMatrix(self.matrix.getH().tocsr(), hermitian=self.hermitian)

    def with_spin(self, spin_matrix: Optional[np.ndarray] = None) -> "OperatorMatrix":
        """Attach the four-component spinor factor: spin_matrix (identity by default) ⊗ self."""
        if spin_matrix is None:
            spin_matrix = np.eye(4)
        spin_hermitian = np.array_equal(spin_matrix, np.conj(spin_matrix).T)
        return OperatorMatrix(
            sp.kron(sp.csr_matrix(spin_matrix), self.matrix, format="csr"),
            hermitian=self.hermitian and spin_hermitian,
        )

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            return OperatorMatrix(self.matrix @ other.matrix)
        return self.matrix @ other


@dataclass(frozen=True, eq=False)
class ModeAmplitude:
    """One-particle vector: a complex amplitude per (k-point, helicity) mode."""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=complex).ravel()
        if not np.all(np.isfinite(values)):
            raise ValueError("mode amplitudes must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def inner(self, other: "ModeAmplitude") -> complex:
        return complex(np.vdot(self.values, other.values))


def _amplitude_values(basis: FockBasis, f: Union[ModeAmplitude, Sequence[complex]]) -> np.ndarray:
    values = f.values if isinstance(f, ModeAmplitude) else np.asarray(f, dtype=complex).ravel()
    if values.size != basis.n_modes:
        raise DimensionMismatchError(f"amplitude has {values.size} entries, basis has {basis.n_modes} modes")
    return values


def _zero(basis: FockBasis) -> sp.csr_matrix:
    return sp.csr_matrix((len(basis), len(basis)), dtype=complex)


def annihilation(basis: FockBasis, f) -> OperatorMatrix:
    """a(f) = sum_i conj(f_i) a_i."""
    values = _amplitude_values(basis, f)
    matrix = _zero(basis)
    for mode in np.nonzero(values)[0]:
        matrix = matrix + np.conj(values[mode]) * basis.mode_annihilators[mode]
    return OperatorMatrix(matrix)


def creation(basis: FockBasis, f) -> OperatorMatrix:
    return annihilation(basis, f).adjoint()


def segal_field(basis: FockBasis, f) -> OperatorMatrix:
    lowering = annihilation(basis, f).matrix
    return OperatorMatrix((lowering + lowering.getH()) / np.sqrt(2.0), hermitian=True)


def dgamma_multiplier(basis: FockBasis, w) -> OperatorMatrix:
    """Second quantization of a multiplication operator: diagonal entries sum_i n_i w_i."""
    values = _amplitude_values(basis, w)
    diagonal = basis.occupations @ values
    return OperatorMatrix(sp.diags(diagonal, format="csr"), hermitian=bool(np.all(values.imag == 0)))


def number_operator(basis: FockBasis) -> OperatorMatrix:
    return dgamma_multiplier(basis, np.ones(basis.n_modes))


def vacuum_projector(basis: FockBasis) -> OperatorMatrix:
    dim = len(basis)
    projector = sp.csr_matrix(([1.0 + 0j], ([basis.vacuum_index], [basis.vacuum_index])), shape=(dim, dim))
    return OperatorMatrix(projector, hermitian=True)


def pointwise_annihilation(basis: FockBasis, mode: int) -> OperatorMatrix:
    """Discrete a_λ(k_i): the mode annihilator divided by the square root of the node weight."""
    if not 0 <= mode < basis.n_modes:
        raise IndexError(f"mode {mode} out of range for {basis.n_modes} modes")
    weight = basis.grid.mode_weights[mode]
    return OperatorMatrix(basis.mode_annihilators[mode] / np.sqrt(weight))


@dataclass(frozen=True, eq=False)
class OneParticleMap:
    """Grid-preserving one-particle unitary.

    Node a is sent to node permutation[a] and its helicity pair is rotated by blocks[a]:
    (u f)(permutation[a], λ) = sum_μ blocks[a][λ, μ] f(a, μ).
    """

    permutation: np.ndarray
    blocks: np.ndarray

    def __post_init__(self):
        permutation = np.array(self.permutation, dtype=np.int64)
        blocks = np.array(self.blocks, dtype=complex)
        n_points = permutation.size
        if sorted(permutation.tolist()) != list(range(n_points)):
            raise SymmetryError("one-particle map must permute the grid nodes")
        if blocks.shape != (n_points, 2, 2):
            raise DimensionMismatchError(f"expected helicity blocks of shape ({n_points}, 2, 2), got {blocks.shape}")
        gram = np.einsum("aji,ajk->aik", blocks.conj(), blocks)
        if not np.allclose(gram, np.eye(2), atol=1e-12):
            raise ValueError("helicity blocks must be unitary")
        permutation.setflags(write=False)
        blocks.setflags(write=False)
        object.__setattr__(self, "permutation", permutation)
        object.__setattr__(self, "blocks", blocks)

    @property
    def n_points(self) -> int:
        return self.permutation.size

    @classmethod
    def identity(cls, n_points: int) -> "OneParticleMap":
        return cls(np.arange(n_points), np.tile(np.eye(2), (n_points, 1, 1)))

    @classmethod
    def phase(cls, n_points: int, theta: float) -> "OneParticleMap":
        return cls(np.arange(n_points), np.tile(np.exp(1j * theta) * np.eye(2), (n_points, 1, 1)))

    @classmethod
    def from_transform(cls, grid: ModeGrid, transform: np.ndarray, blocks=None) -> "OneParticleMap":
        """Map induced by an orthogonal 3x3 transform of the nodes; raises if the grid is not preserved."""
        permutation = grid.permutation(transform)
        if blocks is None:
            blocks = np.tile(np.eye(2), (grid.n_points, 1, 1))
        return cls(permutation, blocks)

    def compose(self, other: "OneParticleMap") -> "OneParticleMap":
        """self ∘ other."""
        if other.n_points != self.n_points:
            raise DimensionMismatchError("cannot compose maps on different grids")
        permutation = self.permutation[other.permutation]
        blocks = np.einsum("aij,ajk->aik", self.blocks[other.permutation], other.blocks)
        return OneParticleMap(permutation, blocks)

    def adjoint(self) -> "OneParticleMap":
        inverse = np.empty_like(self.permutation)
        inverse[self.permutation] = np.arange(self.n_points)
        blocks = np.empty_like(self.blocks)
        blocks[self.permutation] = np.conj(np.transpose(self.blocks, (0, 2, 1)))
        return OneParticleMap(inverse, blocks)

    def mode_matrix(self) -> np.ndarray:
        matrix = np.zeros((2 * self.n_points, 2 * self.n_points), dtype=complex)
        for a, target in enumerate(self.permutation):
            matrix[2 * target:2 * target + 2, 2 * a:2 * a + 2] = self.blocks[a]
        return matrix

    def apply(self, f) -> np.ndarray:
        values = f.values if isinstance(f, ModeAmplitude) else np.asarray(f, dtype=complex)
        return self.mode_matrix() @ values


def _pair_expansion(n1: int, n2: int, block: np.ndarray):
    """Helicity-pair occupations (m1, m2) reached from (n1, n2) and their Fock amplitudes."""
    u11, u12 = complex(block[0, 0]), complex(block[0, 1])
    u21, u22 = complex(block[1, 0]), complex(block[1, 1])
    coefficients = {}
    for j in range(n1 + 1):
        for l in range(n2 + 1):
            m1 = j + l
            key = (m1, n1 + n2 - m1)
            term = comb(n1, j) * comb(n2, l) * u11 ** j * u21 ** (n1 - j) * u12 ** l * u22 ** (n2 - l)
            coefficients[key] = coefficients.get(key, 0j) + term
    norm = sqrt(factorial(n1) * factorial(n2))
    return [
        (m1, m2, value * sqrt(factorial(m1) * factorial(m2)) / norm)
        for (m1, m2), value in sorted(coefficients.items())
        if abs(value) > 1e-15
    ]


def gamma_functor(basis: FockBasis, u: OneParticleMap) -> OperatorMatrix:
    """Second quantization Γ(u): Γ(u) a†(f) Γ(u)† = a†(u f), Γ(u) vacuum = vacuum."""
    n_points = basis.grid.n_points
    if u.n_points != n_points:
        raise DimensionMismatchError(f"one-particle map acts on {u.n_points} nodes, grid has {n_points}")
    rows, cols, values = [], [], []
    for source, occupation in enumerate(basis.occupations):
        pairs = occupation.reshape(n_points, 2)
        occupied = np.nonzero(pairs.sum(axis=1))[0]
        expansions = [_pair_expansion(int(pairs[a, 0]), int(pairs[a, 1]), u.blocks[a]) for a in occupied]
        for choice in product(*expansions):
            target = [0] * basis.n_modes
            amplitude = 1.0 + 0j
            for a, (m1, m2, coefficient) in zip(occupied, choice):
                node = u.permutation[a]
                target[2 * node] = m1
                target[2 * node + 1] = m2
                amplitude *= coefficient
            rows.append(basis.index[tuple(target)])
            cols.append(source)
            values.append(amplitude)
    dim = len(basis)
    return OperatorMatrix(sp.csr_matrix((values, (rows, cols)), shape=(dim, dim), dtype=complex))
