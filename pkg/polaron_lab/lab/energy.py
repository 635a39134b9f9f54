import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from polaron_lab.core.errors import SolverError
from polaron_lab.models.polaron import PolaronModel, PolaronTerms
from polaron_lab.schemas.reports import EnergySample
from polaron_lab.schemas.solver import SolverSettings
from polaron_lab.spectral.solvers import SpectrumResult, lowest_spectrum

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ParameterPoint:
    p: Tuple[float, float, float]
    M: float
    q: float
    m: float

    @property
    def momentum(self) -> np.ndarray:
        return np.array(self.p)

    def key(self) -> Tuple[float, ...]:
        return tuple(round(value, 12) + 0.0 for value in (*self.p, self.M, self.q, self.m))


class EnergyLab:
    """Ground energies E_m(p, M, q) of one discretization with cached spectra.

    All parameter points share the basis and the parameter-independent Hamiltonian terms.
    """

    def __init__(self, model: PolaronModel, solver: Optional[SolverSettings] = None):
        self.model = model
        self.solver = solver or SolverSettings()
        self.terms = PolaronTerms.from_model(model)
        self._spectra: Dict[Tuple[float, ...], SpectrumResult] = {}

    def point(self, p: Optional[Sequence[float]] = None, M=None, q=None, m=None) -> ParameterPoint:
        model = self.model
        momentum = model.p if p is None else np.asarray(p, dtype=float)
        return ParameterPoint(
            p=tuple(float(component) for component in momentum),
            M=float(model.M if M is None else M),
            q=float(model.q if q is None else q),
            m=float(model.m if m is None else m),
        )

    def hamiltonian(self, point: ParameterPoint) -> sp.csr_matrix:
        return self.terms.hamiltonian(point.p, point.M, point.m, point.q)

    @property
    def scale(self) -> float:
        """Spectral norm estimate of H at the model point (row-sum bound, at least 1)."""
        matrix = self.hamiltonian(self.point())
        return max(float(abs(matrix).sum(axis=1).max()), 1.0)

    def spectrum(self, point: ParameterPoint, n_eigs: int = 1) -> SpectrumResult:
        key = point.key()
        cached = self._spectra.get(key)
        if cached is not None and cached.eigenvalues.size >= n_eigs:
            return cached
        result = lowest_spectrum(self.hamiltonian(point), n_eigs=n_eigs, settings=self.solver)
        if not result.converged:
            logger.warning(f"Solver did not converge at {point}")
        self._spectra[key] = result
        return result

    def energy(self, point: ParameterPoint) -> float:
        result = self.spectrum(point)
        if not result.converged:
            raise SolverError(f"ground energy at {point} did not converge (residual {result.max_residual:.2e})")
        return result.lowest

    def ground_space(self, point: ParameterPoint, n_eigs: int = 8) -> Tuple[float, np.ndarray]:
        """Lowest eigenvalue and an orthonormal basis of its (numerically) degenerate eigenspace."""
        n_eigs = min(n_eigs, self.terms.dim)
        result = self.spectrum(point, n_eigs=n_eigs)
        energy, vectors = result.ground_space()
        if vectors.shape[1] == result.eigenvalues.size and n_eigs < self.terms.dim:
            return self.ground_space(point, n_eigs=2 * n_eigs)
        return energy, vectors

    def sample(self, point: ParameterPoint) -> EnergySample:
        result = self.spectrum(point)
        return EnergySample(
            p=point.p,
            M=point.M,
            q=point.q,
            m=point.m,
            energy=result.lowest,
            residual=float(result.residuals[0]),
            iterations=result.iterations,
            solver=result.solver,
            converged=result.converged,
        )


@dataclass
class EnergySurface:
    base_model: PolaronModel
    axis_spec: str
    samples: List[EnergySample] = field(default_factory=list)
    flagged: bool = False

    def energy(self, point: ParameterPoint) -> float:
        for sample in self.samples:
            if ParameterPoint(sample.p, sample.M, sample.q, sample.m).key() == point.key():
                return sample.energy
        raise KeyError(f"parameter point {point} was not sampled")

    def points(self) -> List[ParameterPoint]:
        return [ParameterPoint(sample.p, sample.M, sample.q, sample.m) for sample in self.samples]


def ground_energy(model: PolaronModel, solver: Optional[SolverSettings] = None) -> float:
    lab = EnergyLab(model, solver)
    return lab.energy(lab.point())


def momentum_line(lab: EnergyLab, direction: Sequence[float], values: Iterable[float]) -> List[ParameterPoint]:
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    return [lab.point(p=value * direction) for value in values]


def parameter_line(lab: EnergyLab, name: str, values: Iterable[float]) -> List[ParameterPoint]:
    if name not in ("M", "q", "m"):
        raise ValueError(f"unknown scan parameter {name!r}")
    return [lab.point(**{name: value}) for value in values]


def scan(
    model: PolaronModel,
    points: Iterable[ParameterPoint],
    solver: Optional[SolverSettings] = None,
    lab: Optional[EnergyLab] = None,
    axis_spec: str = "custom",
) -> EnergySurface:
    """Ground energy at every parameter point; samples sorted by parameter, failures flag the surface."""
    lab = lab or EnergyLab(model, solver)
    surface = EnergySurface(base_model=model, axis_spec=axis_spec)
    for point in sorted(set(points), key=ParameterPoint.key):
        sample = lab.sample(point)
        if not sample.converged:
            surface.flagged = True
        surface.samples.append(sample)
    logger.info(f"Scanned {len(surface.samples)} points along {axis_spec}, flagged={surface.flagged}")
    return surface
