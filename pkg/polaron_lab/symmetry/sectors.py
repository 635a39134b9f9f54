import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from polaron_lab.core.errors import SectorError, SymmetryError
from polaron_lab.fock.grid import REFLECTION_K2, REFLECTION_K2_MATRIX
from polaron_lab.fock.operators import OneParticleMap, OperatorMatrix, gamma_functor
from polaron_lab.models.dirac import dirac_matrices
from polaron_lab.models.polaron import PolaronModel, assemble
from polaron_lab.schemas.reports import CheckReport
from polaron_lab.spectral.clusters import DEFAULT_CLUSTER_TOL, degeneracy_clusters
from polaron_lab.symmetry.rotation import RotationOperator, is_parallel

logger = logging.getLogger(__name__)

EVEN_DEGENERACY = "eigenvalue clusters have even multiplicity on reflection-symmetric grids with p along the axis"


def _dense(H) -> np.ndarray:
    if isinstance(H, OperatorMatrix):
        return H.toarray()
    if hasattr(H, "matrix") and isinstance(H.matrix, OperatorMatrix):
        return H.matrix.toarray()
    return H.toarray() if sp.issparse(H) else np.asarray(H, dtype=complex)


def sector_labels(order: int) -> Tuple[float, ...]:
    """Half-odd integers z in (-order/2, order/2): one representative per eigenphase e^{2πiz/order}."""
    return tuple(-order / 2.0 + 0.5 + j for j in range(order))


@dataclass(frozen=True, eq=False)
class SectorDecomposition:
    rotation_order: int
    labels: Tuple[float, ...]
    bases: Tuple[np.ndarray, ...]
    block_spectra: Tuple[np.ndarray, ...]
    block_residuals: Tuple[np.ndarray, ...]
    full_spectrum: np.ndarray
    scale: float
    commutant_residual: float
    cross_residual: float
    union_residual: float

    def index_of(self, label: float) -> int:
        return self.labels.index(label)

    def projector(self, label: float) -> OperatorMatrix:
        basis = self.bases[self.index_of(label)]
        return OperatorMatrix(basis @ basis.conj().T, hermitian=True)

    @property
    def dimensions(self) -> Dict[float, int]:
        return {label: basis.shape[1] for label, basis in zip(self.labels, self.bases)}


def sector_decompose(H, rotation: RotationOperator, tol: float = 1e-10) -> SectorDecomposition:
    """Block-diagonalize H along the eigenspaces of the discrete rotation."""
    hamiltonian = _dense(H)
    rotation_matrix = rotation.matrix.toarray()
    order = rotation.order
    dim = hamiltonian.shape[0]
    full_spectrum = scipy.linalg.eigvalsh(hamiltonian)
    scale = max(float(np.abs(full_spectrum).max()), 1.0)

    commutant = float(np.abs(hamiltonian @ rotation_matrix - rotation_matrix @ hamiltonian).max())
    if commutant > tol * scale:
        raise SectorError(f"rotation does not commute with H (residual {commutant:.2e}, scale {scale:.3e})")
    powers = [np.eye(dim, dtype=complex)]
    for _ in range(order):
        powers.append(rotation_matrix @ powers[-1])
    if np.abs(powers[order] + np.eye(dim)).max() > 1e-10:
        raise SectorError(f"R^{order} is not -1; the angle does not match the rotation order")

    labels = sector_labels(order)
    step = 2.0 * np.pi / order
    bases = []
    for label in labels:
        projector = sum(np.exp(-1j * step * label * j) * powers[j] for j in range(order)) / order
        bases.append(scipy.linalg.orth(projector, rcond=1e-8))
    if sum(basis.shape[1] for basis in bases) != dim:
        raise SectorError("sector dimensions do not add up to the full dimension")

    stacked = np.hstack(bases)
    blocked = stacked.conj().T @ hamiltonian @ stacked
    mask = np.ones_like(blocked, dtype=bool)
    spectra, residuals = [], []
    start = 0
    for basis in bases:
        stop = start + basis.shape[1]
        mask[start:stop, start:stop] = False
        start, block = stop, blocked[start:stop, start:stop]
        if not block.size:
            spectra.append(np.zeros(0))
            residuals.append(np.zeros(0))
            continue
        values, vectors = scipy.linalg.eigh(0.5 * (block + block.conj().T))
        lifted = basis @ vectors
        spectra.append(values)
        residuals.append(np.linalg.norm(hamiltonian @ lifted - lifted * values, axis=0))
    cross = float(np.abs(blocked[mask]).max()) if mask.any() else 0.0
    union = np.sort(np.concatenate(spectra))
    union_residual = float(np.abs(union - full_spectrum).max())
    logger.info(
        f"Sector decomposition of order {order}: dims {[basis.shape[1] for basis in bases]}, "
        f"cross residual {cross:.2e}"
    )
    return SectorDecomposition(
        rotation_order=order,
        labels=labels,
        bases=tuple(bases),
        block_spectra=tuple(spectra),
        block_residuals=tuple(residuals),
        full_spectrum=full_spectrum,
        scale=scale,
        commutant_residual=commutant,
        cross_residual=cross,
        union_residual=union_residual,
    )


def reflection_unitary(model: PolaronModel) -> OperatorMatrix:
    """Υ = τ ⊗ Γ(ν): ν reflects k2 and flips the sign of helicity 1."""
    grid = model.grid
    blocks = np.tile(np.diag([-1.0, 1.0]), (grid.n_points, 1, 1))
    nu = OneParticleMap.from_transform(grid, REFLECTION_K2_MATRIX, blocks=blocks)
    fock = gamma_functor(model.basis, nu)
    return OperatorMatrix(sp.kron(sp.csr_matrix(dirac_matrices().tau), fock.matrix, format="csr"))


def kramers_pairing(
    model: PolaronModel,
    decomposition: SectorDecomposition,
    H=None,
    n_clusters: int = 12,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
    tol: float = 1e-10,
) -> CheckReport:
    """Υ commutes with H and exchanges sectors z and -z, which forces even multiplicities."""
    grid = model.grid
    if not grid.has_tag(REFLECTION_K2):
        raise SymmetryError("k2-reflection is not a symmetry of the grid")
    if not is_parallel(model.p, grid.axis):
        raise SymmetryError(f"total momentum {model.p.tolist()} is not parallel to the grid axis")
    if abs(grid.axis[1]) > 1e-12:
        raise SymmetryError("the rotation axis must lie in the k2 = 0 plane")
    hamiltonian = _dense(H if H is not None else assemble(model))
    scale = decomposition.scale
    upsilon = reflection_unitary(model).toarray()

    commutation = float(np.abs(upsilon @ hamiltonian @ upsilon.conj().T - hamiltonian).max())
    square = float(np.abs(upsilon @ upsilon + np.eye(upsilon.shape[0])).max())
    leakage = 0.0
    spectral_mismatch = 0.0
    for label, basis, spectrum in zip(decomposition.labels, decomposition.bases, decomposition.block_spectra):
        partner = decomposition.index_of(-label)
        partner_basis = decomposition.bases[partner]
        image = upsilon @ basis
        leakage = max(leakage, float(np.abs(image - partner_basis @ (partner_basis.conj().T @ image)).max()))
        partner_spectrum = decomposition.block_spectra[partner]
        if spectrum.size != partner_spectrum.size:
            spectral_mismatch = np.inf
        elif spectrum.size:
            spectral_mismatch = max(spectral_mismatch, float(np.abs(spectrum - partner_spectrum).max()))

    multiplicities = degeneracy_clusters(decomposition.full_spectrum.tolist(), cluster_tol)[:n_clusters]
    odd = [size for size in multiplicities if size % 2]
    slack = min(
        tol * scale - commutation,
        1e-10 - leakage,
        1e-9 * scale - spectral_mismatch,
    )
    details = {
        "commutation_residual": commutation,
        "square_plus_identity": square,
        "sector_leakage": leakage,
        "block_spectrum_mismatch": spectral_mismatch,
        "multiplicities": multiplicities,
        "odd_clusters": len(odd),
        "scale": scale,
    }
    report = CheckReport.from_slack("kramers_pairing", EVEN_DEGENERACY, slack, 0.0, details)
    if odd:
        report = report.model_copy(update={"status": "fail"})
    logger.info(f"Kramers pairing: {report.status}, multiplicities {multiplicities}")
    return report
