import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from polaron_lab.lab.energy import EnergyLab
from polaron_lab.models.polaron import PolaronModel
from polaron_lab.schemas.reports import CheckReport, PhotonBoundsReport, PullThroughReport
from polaron_lab.schemas.solver import CheckTolerances, SolverSettings

logger = logging.getLogger(__name__)

PULL_THROUGH = "(H(p-k) - E(p) + omega_m(k)) a(k) Phi = (q / sqrt 2) alpha.g(k) Phi for a ground state Phi"
PHOTON_BOUNDS = "<N> is dominated by the resolvent sum and the vacuum overlap is at least 1 - <N>"


def _spectral_norm(matrix: np.ndarray) -> float:
    if matrix.size == 0:
        return 0.0
    return float(np.linalg.norm(matrix, 2))


class _PullThrough:
    """Residuals of the pull-through identity on the ground space of H_m(p), one per mode."""

    def __init__(self, lab: EnergyLab, p: np.ndarray):
        self.lab = lab
        self.p = p
        model = lab.model
        basis = model.basis
        self.energy, self.vectors = lab.ground_space(lab.point(p=p))
        self.protected = np.tile(basis.protected_mask(), 4)
        self._spin_identity = sp.identity(4, dtype=complex, format="csr")
        self._fock_identity = sp.identity(len(basis), dtype=complex, format="csr")
        self._shifted: Dict[int, sp.csr_matrix] = {}

    def shifted_hamiltonian(self, node: int) -> sp.csr_matrix:
        if node not in self._shifted:
            k = self.lab.model.grid.points[node]
            self._shifted[node] = self.lab.hamiltonian(self.lab.point(p=self.p - k))
        return self._shifted[node]

    def lowered(self, mode: int) -> np.ndarray:
        annihilator = self.lab.model.basis.mode_annihilators[mode]
        return sp.kron(self._spin_identity, annihilator, format="csr") @ self.vectors

    def source(self, mode: int) -> np.ndarray:
        spin = self.lab.terms.dirac.alpha_dot(self.lab.terms.couplings[:, mode])
        return sp.kron(sp.csr_matrix(spin), self._fock_identity, format="csr") @ self.vectors

    def residual(self, mode: int) -> Tuple[np.ndarray, float]:
        """Residual matrix R_i acting on the ground space, and the coupling norm |g_i|."""
        model = self.lab.model
        node = mode // 2
        omega = float(model.photon_dispersion(model.grid.norms[node]))
        lowered = self.lowered(mode)
        image = self.shifted_hamiltonian(node) @ lowered + (omega - self.energy) * lowered
        coupling = model.q / np.sqrt(2.0)
        residual = image - coupling * self.source(mode)
        return residual, float(np.linalg.norm(self.lab.terms.couplings[:, mode]))

    def split(self, residual: np.ndarray) -> Tuple[float, float]:
        return _spectral_norm(residual[self.protected]), _spectral_norm(residual[~self.protected])


def pull_through_residual(
    model: PolaronModel,
    p: Optional[Sequence[float]] = None,
    modes: Optional[Sequence[int]] = None,
    solver: Optional[SolverSettings] = None,
    lab: Optional[EnergyLab] = None,
    threshold: float = 1e-6,
) -> PullThroughReport:
    """Per-mode residual of the pull-through identity for a_λ(k) = a_i / sqrt(w_i).

    Components with total occupation below n_max form the protected residual; the truncation
    ceiling is reported on its own. Residuals are suprema over the ground eigenspace.
    """
    lab = lab or EnergyLab(model, solver)
    p = np.array(model.p if p is None else p, dtype=float)
    grid = model.grid
    modes = range(grid.n_modes) if modes is None else modes
    pull = _PullThrough(lab, p)

    protected: List[float] = []
    ceiling: List[float] = []
    for mode in modes:
        residual, _ = pull.residual(mode)
        inner, outer = pull.split(residual)
        scale = 1.0 / np.sqrt(grid.mode_weights[mode])
        protected.append(inner * scale)
        ceiling.append(outer * scale)

    max_protected = max(protected, default=0.0)
    max_ceiling = max(ceiling, default=0.0)
    verdict = CheckReport.from_slack(
        "pull_through",
        PULL_THROUGH,
        threshold - max_protected,
        0.0,
        {"threshold": threshold, "max_ceiling": max_ceiling, "n_max": model.n_max},
    )
    logger.info(
        f"Pull-through at n_max={model.n_max}: protected {max_protected:.3e}, ceiling {max_ceiling:.3e}"
    )
    return PullThroughReport(
        p=tuple(float(component) for component in p),
        n_max=model.n_max,
        ground_degeneracy=pull.vectors.shape[1],
        protected_residuals=protected,
        ceiling_residuals=ceiling,
        max_protected=max_protected,
        max_ceiling=max_ceiling,
        verdict=verdict,
    )


def pull_through_sweep(
    models: Sequence[PolaronModel],
    p: Optional[Sequence[float]] = None,
    solver: Optional[SolverSettings] = None,
    threshold: float = 1e-6,
) -> CheckReport:
    """Pull-through residuals over increasing n_max: protected part below threshold, ceiling part decreasing.

    Ceiling changes smaller than the threshold count as indistinguishable from equality.
    """
    models = sorted(models, key=lambda model: model.n_max)
    reports = [pull_through_residual(model, p=p, solver=solver, threshold=threshold) for model in models]
    parts = [(f"protected_n{report.n_max}", threshold - report.max_protected, 0.0) for report in reports]
    ceilings = [report.max_ceiling for report in reports]
    decrease = min((a - b for a, b in zip(ceilings[:-1], ceilings[1:])), default=None)
    if decrease is not None:
        parts.append(("ceiling_decrease", decrease, threshold))
    details = {
        "n_max": [report.n_max for report in reports],
        "max_protected": [report.max_protected for report in reports],
        "max_ceiling": ceilings,
    }
    return CheckReport.from_parts(
        "pull_through_sweep", PULL_THROUGH, parts, details, strict_slack=decrease, floor=threshold
    )


def photon_bounds(
    model: PolaronModel,
    p: Optional[Sequence[float]] = None,
    solver: Optional[SolverSettings] = None,
    tolerances: Optional[CheckTolerances] = None,
    lab: Optional[EnergyLab] = None,
) -> PhotonBoundsReport:
    """Photon number of the ground space against the resolvent sum, and the vacuum overlap bound.

    Each mode contributes ((q / sqrt 2)|g_i| + ||R_i||)^2 / (E(p - k_i) - E(p) + omega_m(k_i))^2,
    where R_i is the pull-through residual on the truncated space.
    """
    tolerances = tolerances or CheckTolerances()
    lab = lab or EnergyLab(model, solver)
    p = np.array(model.p if p is None else p, dtype=float)
    grid = model.grid
    pull = _PullThrough(lab, p)
    vectors = pull.vectors

    number = lab.terms.number @ vectors
    photon_number = float(np.linalg.eigvalsh(vectors.conj().T @ number).max())
    vacuum = np.zeros(vectors.shape[0], dtype=bool)
    vacuum[[spin * len(model.basis) + model.basis.vacuum_index for spin in range(4)]] = True
    vacuum_part = vectors.conj().T[:, vacuum] @ vectors[vacuum]
    vacuum_overlap = float(np.linalg.eigvalsh(vacuum_part).min())
    overlap_slack = float(np.linalg.eigvalsh(vacuum_part + vectors.conj().T @ number).min()) - 1.0

    denominators = np.array(
        [lab.energy(lab.point(p=p - k)) - pull.energy for k in grid.points]
    ) + model.photon_dispersion(grid.norms)
    details = {"E": pull.energy, "ground_degeneracy": vectors.shape[1]}
    if np.any(denominators <= 0.0):
        verdict = CheckReport.hypothesis_not_satisfied(
            "photon_bounds", PHOTON_BOUNDS, "E(p - k) - E(p) + omega_m(k) is not positive at every node", details
        )
        bound = float("inf")
    else:
        bound = 0.0
        coupling = abs(model.q) / np.sqrt(2.0)
        for mode in range(grid.n_modes):
            residual, g_norm = pull.residual(mode)
            bound += (coupling * g_norm + _spectral_norm(residual)) ** 2 / denominators[mode // 2] ** 2
        tolerance = tolerances.bound(lab.scale)
        details.update({"photon_number": photon_number, "vacuum_overlap": vacuum_overlap})
        verdict = CheckReport.from_parts(
            "photon_bounds",
            PHOTON_BOUNDS,
            [("photon_number", bound - photon_number, tolerance), ("vacuum_overlap", overlap_slack, 1e-9)],
            details,
        )
    logger.info(f"Photon bounds: <N> {photon_number:.6g} <= {bound:.6g}, vacuum overlap {vacuum_overlap:.6g}")
    return PhotonBoundsReport(
        p=tuple(float(component) for component in p),
        photon_number=photon_number,
        photon_bound=bound,
        vacuum_overlap=vacuum_overlap,
        overlap_slack=overlap_slack,
        verdict=verdict,
    )
