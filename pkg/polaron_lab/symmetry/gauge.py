import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.sparse as sp

from polaron_lab.core.errors import DimensionMismatchError
from polaron_lab.fock.basis import FockBasis
from polaron_lab.fock.operators import OneParticleMap, OperatorMatrix, gamma_functor
from polaron_lab.models.polarization import PolarizationField

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GaugeUnitary:
    """U(e <- e') = Γ(u1) Γ(u2): u2 flips helicity 2 on the flip set, u1 rotates each helicity pair by θ(k)."""

    source: PolarizationField
    target: PolarizationField
    theta: np.ndarray
    flip_set: Tuple[int, ...]
    one_particle: OneParticleMap
    fock: OperatorMatrix

    @property
    def matrix(self) -> OperatorMatrix:
        return self.fock.with_spin()

    def conjugate(self, H) -> sp.csr_matrix:
        """U H U† for an operator on C^4 ⊗ Fock."""
        H = H.matrix if isinstance(H, OperatorMatrix) else sp.csr_matrix(H)
        unitary = self.matrix.matrix
        return (unitary @ H @ unitary.getH()).tocsr()


def helicity_rotation(cos_theta: np.ndarray, sin_theta: np.ndarray) -> np.ndarray:
    blocks = np.zeros((cos_theta.size, 2, 2), dtype=complex)
    blocks[:, 0, 0] = cos_theta
    blocks[:, 0, 1] = -sin_theta
    blocks[:, 1, 0] = sin_theta
    blocks[:, 1, 1] = cos_theta
    return blocks


def gauge_one_particle(grid, target: PolarizationField, source: PolarizationField):
    """One-particle data of U(target <- source): angles, flip set and the composed map u1 ∘ u2."""
    target.validate(grid)
    source.validate(grid)
    flips = target.handedness(grid) != source.handedness(grid)
    signs = np.where(flips, -1.0, 1.0)
    flipped = source.vectors.copy()
    flipped[:, 1] *= signs[:, None]
    cos_theta = np.einsum("ad,ad->a", target.vectors[:, 0], flipped[:, 0])
    sin_theta = -np.einsum("ad,ad->a", target.vectors[:, 0], flipped[:, 1])
    theta = np.mod(np.arctan2(sin_theta, cos_theta), 2.0 * np.pi)

    identity = np.arange(grid.n_points)
    u2 = OneParticleMap(identity, np.array([np.diag([1.0, sign]) for sign in signs]))
    u1 = OneParticleMap(identity, helicity_rotation(np.cos(theta), np.sin(theta)))
    return theta, tuple(int(a) for a in np.nonzero(flips)[0]), u1.compose(u2)


def gauge_unitary(basis: FockBasis, e: PolarizationField, e_prime: PolarizationField) -> GaugeUnitary:
    """Unitary U(e <- e') mapping the Hamiltonian built from e' onto the one built from e."""
    if e.n_points != basis.grid.n_points or e_prime.n_points != basis.grid.n_points:
        raise DimensionMismatchError("polarization fields must live on the basis grid")
    theta, flip_set, one_particle = gauge_one_particle(basis.grid, e, e_prime)
    fock = gamma_functor(basis, one_particle)
    logger.info(f"Gauge unitary {e_prime.kind} -> {e.kind}: {len(flip_set)} flipped k-points")
    return GaugeUnitary(
        source=e_prime,
        target=e,
        theta=theta,
        flip_set=flip_set,
        one_particle=one_particle,
        fock=fock,
    )
