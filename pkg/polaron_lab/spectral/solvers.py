import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from polaron_lab.core.config import get_settings
from polaron_lab.core.errors import SpectrumError
from polaron_lab.fock.operators import OperatorMatrix, hermiticity_defect
from polaron_lab.schemas.reports import CheckReport
from polaron_lab.schemas.solver import SolverSettings
from polaron_lab.spectral.clusters import DEFAULT_CLUSTER_TOL, cluster_ids, degeneracy_clusters

logger = logging.getLogger(__name__)

HERMITIAN_INPUT_TOLERANCE = 1e-12
_TINY = np.finfo(float).tiny


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    eigenvalues: np.ndarray
    residuals: np.ndarray
    multiplicities: List[int]
    solver: str
    iterations: int
    seed: Optional[int] = None
    converged: bool = True
    norm_estimate: float = 0.0
    eigenvectors: Optional[np.ndarray] = None
    history: Tuple[float, ...] = field(default_factory=tuple)
    cluster_tol: float = DEFAULT_CLUSTER_TOL

    @property
    def lowest(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals)) if self.residuals.size else 0.0

    def cluster_ids(self) -> List[int]:
        return cluster_ids(self.eigenvalues.tolist(), self.cluster_tol)

    def ground_space(self) -> Tuple[float, np.ndarray]:
        """Lowest eigenvalue and an orthonormal basis of its cluster."""
        if self.eigenvectors is None:
            raise SpectrumError("spectrum was computed without eigenvectors")
        ids = self.cluster_ids()
        count = ids.count(0)
        return self.lowest, self.eigenvectors[:, :count]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "residuals": self.residuals.tolist(),
            "multiplicities": list(self.multiplicities),
            "cluster_ids": self.cluster_ids(),
            "solver": self.solver,
            "iterations": self.iterations,
            "seed": self.seed,
            "converged": self.converged,
            "norm_estimate": self.norm_estimate,
        }


def _as_csr(H) -> sp.csr_matrix:
    if isinstance(H, OperatorMatrix):
        return H.matrix
    if hasattr(H, "matrix") and isinstance(getattr(H, "matrix"), OperatorMatrix):
        return H.matrix.matrix
    return sp.csr_matrix(H, dtype=complex)


def _require_hermitian(matrix: sp.csr_matrix):
    defect = hermiticity_defect(matrix)
    if defect > HERMITIAN_INPUT_TOLERANCE:
        raise SpectrumError(f"input is not Hermitian (relative defect {defect:.3e})")


def dense_spectrum(
    H,
    n_eigs: Optional[int] = None,
    threshold: Optional[int] = None,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
    with_vectors: bool = True,
) -> SpectrumResult:
    """Full (or lowest n_eigs) spectrum by dense Hermitian diagonalization."""
    matrix = _as_csr(H)
    dim = matrix.shape[0]
    threshold = threshold or get_settings().dense_threshold
    if dim > threshold:
        raise SpectrumError(f"dimension {dim} exceeds the dense threshold {threshold}")
    _require_hermitian(matrix)
    dense = matrix.toarray()
    if n_eigs is None or n_eigs >= dim:
        values, vectors = scipy.linalg.eigh(dense)
        norm = float(np.abs(values).max()) if dim else 0.0
    else:
        values, vectors = scipy.linalg.eigh(dense, subset_by_index=[0, n_eigs - 1])
        norm = float(np.abs(dense).sum(axis=1).max())
    residuals = np.linalg.norm(dense @ vectors - vectors * values, axis=0) / max(norm, _TINY)
    return SpectrumResult(
        eigenvalues=values,
        residuals=residuals,
        multiplicities=degeneracy_clusters(values.tolist(), cluster_tol),
        solver="dense",
        iterations=1,
        norm_estimate=norm,
        eigenvectors=vectors if with_vectors else None,
        cluster_tol=cluster_tol,
    )


def _orthonormalize(block: np.ndarray, basis: np.ndarray, drop_tol: float = 1e-10) -> np.ndarray:
    """Classical Gram-Schmidt applied twice against `basis` and the accepted columns; tiny columns are dropped."""
    accepted: List[np.ndarray] = []
    for column in block.T:
        original = np.linalg.norm(column)
        if original == 0.0:
            continue
        vector = column.copy()
        for _ in range(2):
            if basis.shape[1]:
                vector -= basis @ (basis.conj().T @ vector)
            for previous in accepted:
                vector -= previous * np.vdot(previous, vector)
        norm = np.linalg.norm(vector)
        if norm > drop_tol * original:
            accepted.append(vector / norm)
    if not accepted:
        return np.empty((block.shape[0], 0), dtype=complex)
    return np.stack(accepted, axis=1)


def krylov_lowest(
    H,
    n_eigs: int = 1,
    tol: float = 1e-10,
    max_iter: int = 500,
    seed: int = 0,
    block_size: int = 2,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
) -> SpectrumResult:
    """Lowest eigenpairs by block Lanczos with full reorthogonalization and explicit Rayleigh-Ritz.

    Residuals ||H y - θ y|| are evaluated exactly from stored H-images of the Krylov basis and
    measured relative to the 1-norm of H, an upper bound on its spectral norm for Hermitian H.
    """
    if n_eigs < 1:
        raise ValueError(f"n_eigs must be >= 1, got {n_eigs}")
    matrix = _as_csr(H)
    _require_hermitian(matrix)
    dim = matrix.shape[0]
    n_eigs = min(n_eigs, dim)
    width = min(max(block_size, 1), dim)
    capacity = min(dim, width * (max_iter + 1))

    rng = np.random.default_rng(seed)
    block = rng.standard_normal((dim, width)) + 1j * rng.standard_normal((dim, width))
    basis = np.zeros((dim, capacity), dtype=complex)
    images = np.zeros((dim, capacity), dtype=complex)
    projected = np.zeros((capacity, capacity), dtype=complex)
    size = 0
    history: List[float] = []
    norm_estimate = max(float(spla.norm(matrix, 1)), _TINY)
    converged = False
    ritz_values = np.zeros(0)
    ritz_vectors = np.zeros((dim, 0), dtype=complex)
    residuals = np.full(n_eigs, np.inf)
    iteration = 0

    for iteration in range(1, max_iter + 1):
        block = _orthonormalize(block, basis[:, :size])
        block = block[:, : capacity - size]
        if block.shape[1] == 0:
            break
        image = matrix @ block
        new = slice(size, size + block.shape[1])
        basis[:, new] = block
        images[:, new] = image
        size = new.stop
        projected[: size, new] = basis[:, :size].conj().T @ image
        projected[new, : size] = projected[: size, new].conj().T
        projected[new, new] = 0.5 * (projected[new, new] + projected[new, new].conj().T)

        theta, coefficients = scipy.linalg.eigh(projected[:size, :size])
        count = min(n_eigs, size)
        ritz_values = theta[:count]
        ritz_vectors = basis[:, :size] @ coefficients[:, :count]
        ritz_images = images[:, :size] @ coefficients[:, :count]
        residuals = np.linalg.norm(ritz_images - ritz_vectors * ritz_values, axis=0) / norm_estimate
        history.append(float(theta[0]))
        if count == n_eigs and np.all(residuals <= tol):
            converged = True
            break
        if size >= capacity:
            break
        block = image

    if not converged:
        logger.warning(
            f"Krylov solver stopped after {iteration} iterations without reaching tol={tol:.1e} "
            f"(max residual {np.max(residuals):.3e})"
        )
    return SpectrumResult(
        eigenvalues=np.asarray(ritz_values, dtype=float),
        residuals=np.asarray(residuals, dtype=float),
        multiplicities=degeneracy_clusters(np.asarray(ritz_values).tolist(), cluster_tol),
        solver="krylov",
        iterations=iteration,
        seed=seed,
        converged=converged,
        norm_estimate=norm_estimate,
        eigenvectors=ritz_vectors,
        history=tuple(history),
        cluster_tol=cluster_tol,
    )


def lowest_spectrum(H, n_eigs: int = 1, settings: Optional[SolverSettings] = None) -> SpectrumResult:
    """Dispatch to the dense oracle below the threshold (method auto) or to the Krylov solver."""
    settings = settings or SolverSettings()
    matrix = _as_csr(H)
    threshold = settings.dense_threshold or get_settings().dense_threshold
    method = settings.method
    if method == "auto":
        method = "dense" if matrix.shape[0] <= threshold else "krylov"
    if method == "dense":
        return dense_spectrum(matrix, n_eigs=n_eigs, threshold=threshold, cluster_tol=settings.cluster_tol)
    return krylov_lowest(
        matrix,
        n_eigs=n_eigs,
        tol=settings.tol,
        max_iter=settings.max_iter,
        seed=settings.seed,
        block_size=settings.block_size,
        cluster_tol=settings.cluster_tol,
    )


ORACLE_AGREEMENT = "Krylov eigenvalues agree with the dense spectrum to 1e-8 (1 + |lambda|)"


def oracle_agreement(H, n_eigs: int = 1, settings: Optional[SolverSettings] = None) -> CheckReport:
    """Cross-check of the Krylov solver against the dense oracle on the same matrix."""
    settings = settings or SolverSettings()
    matrix = _as_csr(H)
    reference = dense_spectrum(matrix, n_eigs=n_eigs, threshold=matrix.shape[0], with_vectors=False)
    result = krylov_lowest(
        matrix,
        n_eigs=n_eigs,
        tol=settings.tol,
        max_iter=settings.max_iter,
        seed=settings.seed,
        block_size=settings.block_size,
        cluster_tol=settings.cluster_tol,
    )
    count = min(result.eigenvalues.size, reference.eigenvalues.size)
    dense_values = reference.eigenvalues[:count]
    slacks = 1e-8 * (1.0 + np.abs(dense_values)) - np.abs(result.eigenvalues[:count] - dense_values)
    details = {
        "dense": dense_values,
        "krylov": result.eigenvalues[:count],
        "iterations": result.iterations,
        "converged": result.converged,
    }
    report = CheckReport.from_slack("oracle_agreement", ORACLE_AGREEMENT, float(slacks.min()), 0.0, details)
    if not result.converged:
        report = report.model_copy(update={"status": "fail"})
    return report
