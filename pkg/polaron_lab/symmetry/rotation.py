import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from polaron_lab.core.errors import SymmetryError
from polaron_lab.fock.basis import FockBasis
from polaron_lab.fock.grid import AZIMUTHAL, rotation_about
from polaron_lab.fock.operators import OneParticleMap, OperatorMatrix, gamma_functor
from polaron_lab.models.polarization import PolarizationField, transported_polarization
from polaron_lab.symmetry.gauge import gauge_one_particle
from polaron_lab.symmetry.spinor import spinor_rotation

logger = logging.getLogger(__name__)


def node_map(basis: FockBasis, transform: np.ndarray) -> OneParticleMap:
    """Photon part of the lift of T: node a goes to the node at T^{-1} k_a, helicities untouched."""
    return OneParticleMap.from_transform(basis.grid, np.asarray(transform).T)


def symmetry_unitary(basis: FockBasis, transform: np.ndarray, photon_map: Optional[OneParticleMap] = None) -> OperatorMatrix:
    """u_T ⊗ Γ(π_T); conjugation sends H(p; e) to H(T^{-1} p; e') with e'(k) = T^{-1} e(T k)."""
    photon_map = photon_map or node_map(basis, transform)
    fock = gamma_functor(basis, photon_map)
    return OperatorMatrix(sp.kron(sp.csr_matrix(spinor_rotation(transform)), fock.matrix, format="csr"))


def is_parallel(p: Sequence[float], axis: np.ndarray, atol: float = 1e-12) -> bool:
    p = np.asarray(p, dtype=float)
    return bool(np.linalg.norm(np.cross(p, axis)) <= atol * max(1.0, np.linalg.norm(p)))


@dataclass(frozen=True, eq=False)
class RotationOperator:
    angle: float
    order: int
    transform: np.ndarray
    matrix: OperatorMatrix
    gauge_corrected: bool


def rotation_operator(
    basis: FockBasis,
    angle: float,
    polarization: Optional[PolarizationField] = None,
    p: Optional[Sequence[float]] = None,
) -> RotationOperator:
    """Discrete rotation R_φ about the grid axis: spin part exp(iφ S_axis), photon part the node rotation.

    When the polarization is not equivariant under the rotation the gauge unitary back to it is
    composed in, so R_φ commutes with the Hamiltonian built from `polarization`.
    """
    grid = basis.grid
    if not grid.has_tag(AZIMUTHAL):
        raise SymmetryError("grid carries no azimuthal symmetry")
    if p is not None and not is_parallel(p, grid.axis):
        raise SymmetryError(f"total momentum {list(p)} is not parallel to the grid axis")
    # Spin part exp(iφ S_axis) is the lift of the rotation by -φ
    transform = rotation_about(grid.axis, -angle)
    photon_map = node_map(basis, transform)
    gauge_corrected = False
    if polarization is not None:
        transported = transported_polarization(polarization, grid, transform)
        if np.abs(transported.vectors - polarization.vectors).max() > 1e-12:
            _, _, correction = gauge_one_particle(grid, polarization, transported)
            photon_map = correction.compose(photon_map)
            gauge_corrected = True
    matrix = symmetry_unitary(basis, transform, photon_map=photon_map)
    return RotationOperator(
        angle=float(angle),
        order=grid.n_azimuthal,
        transform=transform,
        matrix=matrix,
        gauge_corrected=gauge_corrected,
    )
