import logging
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from polaron_lab.core.errors import DimensionMismatchError
from polaron_lab.fock.basis import FockBasis, build_fock_basis
from polaron_lab.fock.grid import ModeGrid
from polaron_lab.fock.operators import (
    ModeAmplitude,
    OperatorMatrix,
    dgamma_multiplier,
    number_operator,
    segal_field,
)
from polaron_lab.models.cutoff import CutoffProfile
from polaron_lab.models.dirac import dirac_matrices
from polaron_lab.models.polarization import PolarizationField, make_polarization

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PolaronModel:
    """Parameters of the fibre Hamiltonian at total momentum p together with its discretization."""

    p: np.ndarray
    M: float
    m: float
    q: float
    basis: FockBasis
    cutoff: CutoffProfile
    polarization: PolarizationField

    def __post_init__(self):
        p = np.array(self.p, dtype=float)
        if p.shape != (3,) or not np.all(np.isfinite(p)):
            raise ValueError(f"total momentum must be a finite 3-vector, got {self.p!r}")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)
        for name in ("M", "m", "q"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.m < 0.0:
            raise ValueError(f"photon mass parameter m must be >= 0, got {self.m}")
        self.polarization.validate(self.grid)

    @classmethod
    def create(
        cls,
        grid: ModeGrid,
        n_max: int,
        cutoff: CutoffProfile,
        p: Sequence[float] = (0.0, 0.0, 0.0),
        M: float = 1.0,
        m: float = 0.0,
        q: float = 0.0,
        polarization: Optional[PolarizationField] = None,
        max_states: Optional[int] = None,
    ) -> "PolaronModel":
        basis = build_fock_basis(grid, n_max, max_states=max_states)
        if polarization is None:
            polarization = make_polarization("xy", grid)
        return cls(p=p, M=M, m=m, q=q, basis=basis, cutoff=cutoff, polarization=polarization)

    @property
    def grid(self) -> ModeGrid:
        return self.basis.grid

    @property
    def n_max(self) -> int:
        return self.basis.n_max

    @property
    def dim(self) -> int:
        return 4 * len(self.basis)

    def with_params(self, **changes) -> "PolaronModel":
        return replace(self, **changes)

    def photon_dispersion(self, norms) -> np.ndarray:
        """ω_m(k) = (1 + m)|k| + m."""
        return (1.0 + self.m) * np.asarray(norms, dtype=float) + self.m


def coupling_table(grid: ModeGrid, cutoff: CutoffProfile, polarization: PolarizationField) -> np.ndarray:
    """Real array g[j, 2a + λ - 1] = sqrt(w_a) |k_a|^{-1/2} ρ(k_a) e_j^(λ)(k_a)."""
    if polarization.n_points != grid.n_points:
        raise DimensionMismatchError("polarization and grid disagree on the number of k-points")
    radial = np.sqrt(grid.weights) * grid.norms ** -0.5 * cutoff(grid.norms)
    vectors = polarization.vectors * radial[:, None, None]
    return vectors.reshape(grid.n_modes, 3).T.copy()


def coupling_amplitudes(model: PolaronModel) -> Tuple[ModeAmplitude, ModeAmplitude, ModeAmplitude]:
    table = coupling_table(model.grid, model.cutoff, model.polarization)
    return tuple(ModeAmplitude(row) for row in table)


class PolaronTerms:
    """Parameter-independent pieces of H; any (p, M, m, q) is a linear recombination of them."""

    def __init__(self, basis: FockBasis, cutoff: CutoffProfile, polarization: PolarizationField):
        self.basis = basis
        self.cutoff = cutoff
        self.polarization = polarization
        grid = basis.grid
        dirac = dirac_matrices()
        fock_identity = sp.identity(len(basis), dtype=complex, format="csr")
        self.couplings = coupling_table(grid, cutoff, polarization)
        self.spin_identity = sp.kron(sp.identity(4), fock_identity, format="csr")
        self.field_energy = dgamma_multiplier(basis, grid.mode_norms).with_spin().matrix
        self.number = number_operator(basis).with_spin().matrix
        self.recoil = sum(
            sp.kron(dirac.alpha[j], dgamma_multiplier(basis, grid.mode_points[:, j]).matrix, format="csr")
            for j in range(3)
        )
        self.interaction = sum(
            sp.kron(dirac.alpha[j], segal_field(basis, self.couplings[j]).matrix, format="csr")
            for j in range(3)
        )
        self._fock_identity = fock_identity
        self.dirac = dirac

    @classmethod
    def from_model(cls, model: PolaronModel) -> "PolaronTerms":
        return cls(model.basis, model.cutoff, model.polarization)

    @property
    def dim(self) -> int:
        return self.spin_identity.shape[0]

    def spinor_part(self, p: Sequence[float], M: float) -> sp.csr_matrix:
        spin = self.dirac.alpha_dot(p) + M * self.dirac.beta
        return sp.kron(sp.csr_matrix(spin), self._fock_identity, format="csr")

    def hamiltonian(self, p: Sequence[float], M: float, m: float, q: float) -> sp.csr_matrix:
        matrix = (
            self.spinor_part(p, M)
            + (1.0 + m) * self.field_energy
            + m * self.number
            - self.recoil
            - q * self.interaction
        )
        return matrix.tocsr()


@dataclass(frozen=True, eq=False)
class PolaronHamiltonian:
    model: PolaronModel
    matrix: OperatorMatrix

    @property
    def dim(self) -> int:
        return self.matrix.dim


def assemble(model: PolaronModel, terms: Optional[PolaronTerms] = None) -> PolaronHamiltonian:
    """H = α·p + Mβ + dΓ(ω_m) - α·dΓ(k) - q α·Φ_S(g) on C^4 ⊗ Fock."""
    terms = terms or PolaronTerms.from_model(model)
    try:
        matrix = OperatorMatrix(terms.hamiltonian(model.p, model.M, model.m, model.q), hermitian=True)
    except Exception as exc:
        logger.error(f"Hamiltonian assembly failed: {exc}")
        raise
    logger.info(f"Assembled H(p={model.p.tolist()}) with dim {matrix.dim}, {matrix.nnz} non-zeros")
    return PolaronHamiltonian(model=model, matrix=matrix)
