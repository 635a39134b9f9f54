"""Checks of the proven properties of the ground energy E_m(p, M, q)."""

import logging
from itertools import combinations
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from polaron_lab.core.config import get_settings
from polaron_lab.core.errors import PolarizationError, SymmetryError
from polaron_lab.fock.grid import INVERSION
from polaron_lab.fock.operators import OperatorMatrix
from polaron_lab.lab.energy import EnergyLab, EnergySurface, ParameterPoint
from polaron_lab.models.dirac import dirac_matrices
from polaron_lab.models.polarization import PolarizationField, make_polarization, transported_polarization
from polaron_lab.models.polaron import PolaronModel, PolaronTerms
from polaron_lab.schemas.reports import CheckReport
from polaron_lab.schemas.solver import CheckTolerances, SolverSettings
from polaron_lab.spectral.solvers import dense_spectrum
from polaron_lab.symmetry.gauge import gauge_unitary
from polaron_lab.symmetry.rotation import node_map, symmetry_unitary

logger = logging.getLogger(__name__)

CONCAVITY = "E is concave in (p, M, q)"
LIPSCHITZ = "|E(p, M) - E(p', M')| <= sqrt(|p - p'|^2 + (M - M')^2)"
MASS_REFLECTION = "E(p, M) = E(p, -M) <= E(p, 0) through conjugation with gamma5"
INVERSE_ENERGY = "E(p) <= E(0), strictly for p != 0"
MASS_MONOTONE = "E_m(p) is non-decreasing in m and tends to E_0(p) as m -> 0"
ROTATION_SYMMETRY = "E(T p) = E(p) for grid symmetries T; E non-increasing in |p| along rays"
GAUGE_EQUIVALENCE = "the Hamiltonian and its spectrum do not depend on the polarization vectors"

Segment = Tuple[ParameterPoint, ParameterPoint]


def midpoint(a: ParameterPoint, b: ParameterPoint) -> ParameterPoint:
    return ParameterPoint(
        p=tuple(0.5 * (x + y) for x, y in zip(a.p, b.p)),
        M=0.5 * (a.M + b.M),
        q=0.5 * (a.q + b.q),
        m=a.m,
    )


def random_segments(
    lab: EnergyLab,
    count: int,
    seed: int = 0,
    p_radius: float = 0.5,
    mass_range: Tuple[float, float] = (0.5, 1.5),
    coupling_range: Tuple[float, float] = (0.0, 0.6),
) -> List[Segment]:
    """Random segments in (p, M, q) at the model's m, with endpoints drawn from a box around the origin."""
    rng = np.random.default_rng(seed)

    def draw() -> ParameterPoint:
        return lab.point(
            p=rng.uniform(-p_radius, p_radius, size=3),
            M=rng.uniform(*mass_range),
            q=rng.uniform(*coupling_range),
        )

    return [(draw(), draw()) for _ in range(count)]


def segment_points(segments: Iterable[Segment]) -> List[ParameterPoint]:
    points = []
    for a, b in segments:
        points.extend([a, b, midpoint(a, b)])
    return points


def _surface_energy(surface: EnergySurface, point: ParameterPoint) -> float:
    try:
        return surface.energy(point)
    except KeyError as exc:
        raise ValueError(f"point {point} is not sampled on the surface") from exc


def check_concavity(
    surface: EnergySurface,
    segments: Sequence[Segment],
    scale: float,
    tolerances: Optional[CheckTolerances] = None,
) -> CheckReport:
    tolerances = tolerances or CheckTolerances()
    slacks = []
    for a, b in segments:
        middle = _surface_energy(surface, midpoint(a, b))
        slacks.append(middle - 0.5 * (_surface_energy(surface, a) + _surface_energy(surface, b)))
    worst = min(slacks) if slacks else None
    return CheckReport.from_slack(
        "concavity",
        CONCAVITY,
        worst,
        tolerances.bound(scale),
        {"segments": len(slacks), "scale": scale},
    )


def check_lipschitz(surface: EnergySurface, scale: float, tolerances: Optional[CheckTolerances] = None) -> CheckReport:
    tolerances = tolerances or CheckTolerances()
    if len(surface.samples) < 2:
        raise ValueError("Lipschitz check needs at least two samples")
    worst = None
    pairs = 0
    for x, y in combinations(surface.samples, 2):
        if x.q != y.q or x.m != y.m:
            continue
        distance = np.sqrt(np.sum((np.array(x.p) - np.array(y.p)) ** 2) + (x.M - y.M) ** 2)
        slack = distance - abs(x.energy - y.energy)
        worst = slack if worst is None else min(worst, slack)
        pairs += 1
    return CheckReport.from_slack(
        "lipschitz", LIPSCHITZ, worst, tolerances.bound(scale), {"pairs": pairs, "scale": scale}
    )


def check_mass_reflection(
    model: PolaronModel,
    solver: Optional[SolverSettings] = None,
    tolerances: Optional[CheckTolerances] = None,
    lab: Optional[EnergyLab] = None,
) -> CheckReport:
    tolerances = tolerances or CheckTolerances()
    lab = lab or EnergyLab(model, solver)
    scale = lab.scale
    reflection = sp.kron(sp.csr_matrix(dirac_matrices().gamma5), sp.identity(len(model.basis)), format="csr")
    positive = lab.point()
    negative = lab.point(M=-model.M)
    massless = lab.point(M=0.0)
    conjugated = reflection @ lab.hamiltonian(positive) @ reflection.getH()
    difference = conjugated - lab.hamiltonian(negative)
    identity_residual = float(np.abs(difference.data).max()) if difference.nnz else 0.0

    energy = lab.energy(positive)
    reflected = lab.energy(negative)
    zero_mass = lab.energy(massless)
    tolerance = tolerances.bound(scale)
    return CheckReport.from_parts(
        "mass_reflection",
        MASS_REFLECTION,
        [
            ("matrix_identity", -identity_residual, 1e-12 * scale),
            ("reflection_equality", -abs(energy - reflected), tolerance),
            ("below_massless", zero_mass - energy, tolerance),
        ],
        {"E_M": energy, "E_minus_M": reflected, "E_0": zero_mass, "identity_residual": identity_residual},
    )


def check_inverse_energy(
    surface: EnergySurface,
    scale: float,
    tolerances: Optional[CheckTolerances] = None,
) -> CheckReport:
    tolerances = tolerances or CheckTolerances()
    grid = surface.base_model.grid
    if not grid.has_tag(INVERSION):
        return CheckReport.hypothesis_not_satisfied(
            "inverse_energy", INVERSE_ENERGY, "grid is not symmetric under k -> -k"
        )
    origins = {}
    for sample in surface.samples:
        if not any(sample.p):
            origins[(sample.M, sample.q, sample.m)] = sample.energy
    slacks = []
    for sample in surface.samples:
        if not any(sample.p):
            continue
        group = (sample.M, sample.q, sample.m)
        if group not in origins:
            raise ValueError(f"surface lacks the p = 0 sample for M={sample.M}, q={sample.q}, m={sample.m}")
        slacks.append(origins[group] - sample.energy)
    if not origins:
        raise ValueError("surface lacks a p = 0 sample")
    worst = min(slacks) if slacks else 0.0
    return CheckReport.from_slack(
        "inverse_energy",
        INVERSE_ENERGY,
        worst,
        tolerances.bound(scale),
        {"samples": len(slacks), "scale": scale, "strictness_floor": tolerances.floor(scale)},
        strict_slack=min(slacks) if slacks else None,
        floor=tolerances.floor(scale),
    )


def check_mass_monotone(
    model: PolaronModel,
    m_values: Sequence[float],
    solver: Optional[SolverSettings] = None,
    tolerances: Optional[CheckTolerances] = None,
    lab: Optional[EnergyLab] = None,
) -> CheckReport:
    """Monotonicity in m plus the massless-limit bound E_m - E_0 <= m <Φ0, (dΓ(|k|) + N) Φ0>."""
    tolerances = tolerances or CheckTolerances()
    masses = sorted(set(float(value) for value in m_values))
    if 0.0 not in masses:
        raise ValueError("mass list must include m = 0")
    lab = lab or EnergyLab(model, solver)
    scale = lab.scale
    tolerance = tolerances.bound(scale)
    energies = [lab.energy(lab.point(m=mass)) for mass in masses]
    if len(masses) == 1:
        return CheckReport.from_slack(
            "mass_monotone", MASS_MONOTONE, None, tolerance, {"masses": masses, "energies": energies}
        )

    monotone = min(upper - lower for lower, upper in zip(energies[:-1], energies[1:]))
    _, vectors = lab.ground_space(lab.point(m=0.0))
    field_cost = lab.terms.field_energy + lab.terms.number
    cost = float(np.linalg.eigvalsh(vectors.conj().T @ (field_cost @ vectors)).min())
    limit = min(energies[0] + mass * cost - energy for mass, energy in zip(masses, energies))
    return CheckReport.from_parts(
        "mass_monotone",
        MASS_MONOTONE,
        [("monotone", monotone, tolerance), ("massless_limit", limit, tolerance)],
        {"masses": masses, "energies": energies, "limit_slope": cost},
    )


def _ray_points(lab: EnergyLab) -> List[ParameterPoint]:
    p = lab.model.p
    if np.linalg.norm(p) > 0.0:
        return [lab.point(p=t * p) for t in (0.0, 0.5, 1.0, 1.5, 2.0)]
    axis = lab.model.grid.axis
    return [lab.point(p=s * axis) for s in (0.0, 0.25, 0.5, 0.75, 1.0)]


def check_rotation_symmetry(
    model: PolaronModel,
    rotations: Optional[Sequence[np.ndarray]] = None,
    solver: Optional[SolverSettings] = None,
    tolerances: Optional[CheckTolerances] = None,
    lab: Optional[EnergyLab] = None,
) -> CheckReport:
    """Lift each grid symmetry T to u_T ⊗ Γ(T) and compare with the Hamiltonian at T^{-1} p.

    The lift produces the transported polarization; the gauge unitary brings it back, so the
    energies at p and T^{-1} p must agree.
    """
    tolerances = tolerances or CheckTolerances()
    lab = lab or EnergyLab(model, solver)
    grid, basis = model.grid, model.basis
    rotations = grid.symmetry_group() if rotations is None else rotations
    scale = lab.scale
    base = lab.point()
    hamiltonian = lab.hamiltonian(base)
    energy = lab.energy(base)

    lift_residual = gauge_residual = energy_gap = 0.0
    for transform in rotations:
        transform = np.asarray(transform, dtype=float)
        try:
            photon_map = node_map(basis, transform)
        except SymmetryError as exc:
            logger.error(f"Transform is not a grid symmetry: {exc.detail}")
            raise
        unitary = symmetry_unitary(basis, transform, photon_map=photon_map).matrix
        conjugated = unitary @ hamiltonian @ unitary.getH()
        pulled_back = transform.T @ model.p
        transported = transported_polarization(model.polarization, grid, transform)
        expected = PolaronTerms(basis, model.cutoff, transported).hamiltonian(pulled_back, model.M, model.m, model.q)
        lift_residual = max(lift_residual, _max_abs(conjugated - expected))

        gauge = gauge_unitary(basis, model.polarization, transported)
        regauged = gauge.conjugate(expected)
        gauge_residual = max(gauge_residual, _max_abs(regauged - lab.hamiltonian(lab.point(p=pulled_back))))
        energy_gap = max(energy_gap, abs(lab.energy(lab.point(p=transform @ model.p)) - energy))

    parts = [
        ("lift_identity", -lift_residual, 1e-10 * scale),
        ("gauge_closure", -gauge_residual, 1e-10 * scale),
        ("energy_equality", -energy_gap, 1e-9 * scale),
    ]
    details = {"group_elements": len(rotations), "scale": scale}
    if grid.has_tag(INVERSION):
        ray = [lab.energy(point) for point in _ray_points(lab)]
        parts.append(("ray_monotone", min(a - b for a, b in zip(ray[:-1], ray[1:])), tolerances.bound(scale)))
        details["ray_energies"] = ray
    report = CheckReport.from_parts("rotation_symmetry", ROTATION_SYMMETRY, parts, details)
    logger.info(f"Rotation symmetry over {len(rotations)} elements: {report.status}")
    return report


def _max_abs(matrix) -> float:
    matrix = sp.csr_matrix(matrix)
    return float(np.abs(matrix.data).max()) if matrix.nnz else 0.0


def default_alternative_polarization(
    polarization: PolarizationField, grid, axis: Sequence[float] = (1.0, 0.0, 0.0)
) -> PolarizationField:
    """The polarization compared against in gauge checks: axis kind for xy fields, xy otherwise."""
    if polarization.kind == "xy":
        return make_polarization("axis", grid, axis=axis)
    return make_polarization("xy", grid)


def check_gauge_equivalence(
    model: PolaronModel,
    alternative: PolarizationField,
    third: Optional[PolarizationField] = None,
    lab: Optional[EnergyLab] = None,
) -> CheckReport:
    """Conjugation identity, spectral equality, chain rule and inverse rule of the gauge unitaries."""
    lab = lab or EnergyLab(model)
    basis = model.basis
    scale = lab.scale
    hamiltonian = lab.hamiltonian(lab.point())
    primed = PolaronTerms(basis, model.cutoff, alternative).hamiltonian(model.p, model.M, model.m, model.q)
    forward = gauge_unitary(basis, model.polarization, alternative)
    conjugation = _max_abs(forward.conjugate(primed) - hamiltonian)

    parts = [("conjugation", -conjugation, 1e-11 * scale)]
    details = {"conjugation_residual": conjugation, "flip_set_size": len(forward.flip_set), "scale": scale}
    if lab.terms.dim <= (lab.solver.dense_threshold or get_settings().dense_threshold):
        spectrum = dense_spectrum(OperatorMatrix(hamiltonian), with_vectors=False).eigenvalues
        primed_spectrum = dense_spectrum(OperatorMatrix(primed), with_vectors=False).eigenvalues
        mismatch = float(np.abs(spectrum - primed_spectrum).max())
        parts.append(("spectra", -mismatch, 1e-9 * scale))
        details["spectrum_mismatch"] = mismatch

    backward = gauge_unitary(basis, alternative, model.polarization)
    inverse = _max_abs(forward.fock.matrix.getH() - backward.fock.matrix)
    parts.append(("inverse_rule", -inverse, 1e-12))
    if third is None:
        try:
            third = make_polarization("axis", model.grid, axis=np.ones(3) / np.sqrt(3.0))
        except PolarizationError:
            third = None
    if third is not None:
        outer = gauge_unitary(basis, model.polarization, third)
        inner = gauge_unitary(basis, third, alternative)
        chain = _max_abs(outer.fock.matrix @ inner.fock.matrix - forward.fock.matrix)
        parts.append(("chain_rule", -chain, 1e-12))
        details["chain_residual"] = chain
    report = CheckReport.from_parts("gauge_equivalence", GAUGE_EQUIVALENCE, parts, details)
    logger.info(f"Gauge equivalence {model.polarization.kind} <- {alternative.kind}: {report.status}")
    return report
