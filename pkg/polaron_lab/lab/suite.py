"""Runs the named checks of one configuration against a shared energy cache."""

import logging
from contextlib import nullcontext
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from polaron_lab.fock.grid import AZIMUTHAL, REFLECTION_K2
from polaron_lab.lab.dispersion import dispersion_report, essential_gap_sweep, ir_criterion
from polaron_lab.lab.energy import EnergyLab, scan
from polaron_lab.lab.properties import (
    check_concavity,
    check_gauge_equivalence,
    check_inverse_energy,
    check_lipschitz,
    check_mass_monotone,
    check_mass_reflection,
    check_rotation_symmetry,
    default_alternative_polarization,
    random_segments,
    segment_points,
)
from polaron_lab.lab.pull_through import photon_bounds, pull_through_sweep
from polaron_lab.models.polaron import PolaronModel, assemble
from polaron_lab.schemas.reports import FAIL, CheckReport
from polaron_lab.schemas.run_config import RunConfig
from polaron_lab.spectral.solvers import ORACLE_AGREEMENT, oracle_agreement
from polaron_lab.symmetry.rotation import is_parallel, rotation_operator
from polaron_lab.symmetry.sectors import EVEN_DEGENERACY, kramers_pairing, sector_decompose

logger = logging.getLogger(__name__)


class CheckSuite:
    """Each check is a method returning one or more reports; all share the base model and its cache."""

    def __init__(self, config: RunConfig, model: Optional[PolaronModel] = None):
        self.config = config
        self.model = model or config.build_model()
        self.solver = config.solver_settings()
        self.tolerances = config.tolerances()
        self.lab = EnergyLab(self.model, self.solver)
        self._dispersion = None

    @property
    def runners(self) -> Dict[str, Callable[[], List[CheckReport]]]:
        return {
            "oracle": self.oracle,
            "concavity": self.concavity,
            "lipschitz": self.lipschitz,
            "mass_reflection": self.mass_reflection,
            "inverse_energy": self.inverse_energy,
            "mass_monotone": self.mass_monotone,
            "rotation_symmetry": self.rotation_symmetry,
            "dispersion": self.dispersion,
            "ir_criterion": self.ir_criterion,
            "essential_gap": self.essential_gap,
            "pull_through": self.pull_through,
            "photon_bounds": self.photon_bounds,
            "gauge_equivalence": self.gauge_equivalence,
            "kramers_pairing": self.kramers_pairing,
        }

    def run(self, names: Sequence[str], session=None) -> List[CheckReport]:
        reports: List[CheckReport] = []
        for name in names:
            with session.stage(name) if session is not None else nullcontext():
                produced = self.runners[name]()
            for report in produced:
                if report.status == FAIL:
                    logger.warning(f"Check {report.name} failed: worst slack {report.worst_slack}")
                else:
                    logger.info(f"Check {report.name}: {report.status}")
            reports.extend(produced)
        return reports

    def _rng(self, offset: int) -> np.random.Generator:
        return np.random.default_rng(self.config.solver_seed + offset)

    def oracle(self) -> List[CheckReport]:
        """Krylov against dense on oracle_instances seeded random points with q uniform in [0, 1]."""
        rng = self._rng(101)
        points = [
            self.lab.point(p=rng.uniform(-0.5, 0.5, size=3), M=rng.uniform(0.5, 1.5), q=rng.uniform(0.0, 1.0))
            for _ in range(self.config.oracle_instances)
        ]
        reports = [oracle_agreement(self.lab.hamiltonian(point), n_eigs=2, settings=self.solver) for point in points]
        parts = [(f"instance_{i}", report.worst_slack, 0.0) for i, report in enumerate(reports)]
        failing = [i for i, report in enumerate(reports) if report.status == FAIL]
        details = {
            "instances": [
                dict(report.details, p=point.p, M=point.M, q=point.q) for point, report in zip(points, reports)
            ],
            "failing_instances": failing,
        }
        report = CheckReport.from_parts("oracle_agreement", ORACLE_AGREEMENT, parts, details)
        if failing:
            report = report.model_copy(update={"status": FAIL})
        return [report]

    def concavity(self) -> List[CheckReport]:
        segments = random_segments(self.lab, self.config.concavity_segments, seed=self.config.solver_seed)
        surface = scan(self.model, segment_points(segments), lab=self.lab, axis_spec="segments")
        return [check_concavity(surface, segments, self.lab.scale, self.tolerances)]

    def lipschitz(self) -> List[CheckReport]:
        rng = self._rng(202)
        points = [
            self.lab.point(p=rng.uniform(-0.5, 0.5, size=3), M=rng.uniform(0.5, 1.5))
            for _ in range(self.config.lipschitz_points)
        ]
        surface = scan(self.model, points, lab=self.lab, axis_spec="lipschitz")
        return [check_lipschitz(surface, self.lab.scale, self.tolerances)]

    def mass_reflection(self) -> List[CheckReport]:
        return [check_mass_reflection(self.model, tolerances=self.tolerances, lab=self.lab)]

    def inverse_energy(self) -> List[CheckReport]:
        direction = np.asarray(self.config.scan_direction, dtype=float)
        direction = direction / np.linalg.norm(direction)
        points = [self.lab.point(p=np.zeros(3))]
        for t in (0.25, 0.5, 1.0):
            points.extend([self.lab.point(p=t * direction), self.lab.point(p=-t * direction)])
        if np.linalg.norm(self.model.p) > 0.0:
            points.append(self.lab.point())
        surface = scan(self.model, points, lab=self.lab, axis_spec="inverse_energy")
        return [check_inverse_energy(surface, self.lab.scale, self.tolerances)]

    def mass_monotone(self) -> List[CheckReport]:
        return [check_mass_monotone(self.model, self.config.mass_values, tolerances=self.tolerances, lab=self.lab)]

    def rotation_symmetry(self) -> List[CheckReport]:
        return [check_rotation_symmetry(self.model, tolerances=self.tolerances, lab=self.lab)]

    def _dispersion_at(self, p):
        return dispersion_report(self.model, p=p, P=self.config.dispersion_P, tolerances=self.tolerances, lab=self.lab)

    def dispersion(self) -> List[CheckReport]:
        if self._dispersion is None:
            self._dispersion = self._dispersion_at(None)
        reports = [self._dispersion.verdict]
        if np.linalg.norm(self.model.p) > 0.0:
            at_origin = self._dispersion_at(np.zeros(3)).verdict
            reports.append(at_origin.model_copy(update={"name": "dispersion_p0"}))
        return reports

    def ir_criterion(self) -> List[CheckReport]:
        if self._dispersion is None:
            self._dispersion = self._dispersion_at(None)
        report = ir_criterion(
            self.model, dispersion=self._dispersion, couplings=self.config.ir_couplings, lab=self.lab
        )
        return [report.verdict]

    def essential_gap(self) -> List[CheckReport]:
        return [essential_gap_sweep(self.config.refinement_models(), solver=self.solver, tolerances=self.tolerances)]

    def pull_through(self) -> List[CheckReport]:
        return [
            pull_through_sweep(
                self.config.pull_through_models(), solver=self.solver, threshold=self.config.pull_through_threshold
            )
        ]

    def photon_bounds(self) -> List[CheckReport]:
        return [photon_bounds(self.model, tolerances=self.tolerances, lab=self.lab).verdict]

    def gauge_equivalence(self) -> List[CheckReport]:
        alternative = default_alternative_polarization(
            self.model.polarization, self.model.grid, axis=self.config.gauge_axis
        )
        return [check_gauge_equivalence(self.model, alternative, lab=self.lab)]

    def kramers_pairing(self) -> List[CheckReport]:
        grid = self.model.grid
        symmetric = grid.has_tag(REFLECTION_K2) and grid.has_tag(AZIMUTHAL)
        if not symmetric or not is_parallel(self.model.p, grid.axis) or abs(grid.axis[1]) > 1e-12:
            return [
                CheckReport.hypothesis_not_satisfied(
                    "kramers_pairing",
                    EVEN_DEGENERACY,
                    "needs a rotation and k2-reflection symmetric grid, an axis in the k2 = 0 plane and p along the axis",
                )
            ]
        hamiltonian = assemble(self.model, terms=self.lab.terms)
        rotation = rotation_operator(
            self.model.basis, 2.0 * np.pi / grid.n_azimuthal, self.model.polarization, p=self.model.p
        )
        decomposition = sector_decompose(hamiltonian.matrix, rotation)
        return [
            kramers_pairing(
                self.model,
                decomposition,
                H=hamiltonian.matrix,
                n_clusters=self.config.degeneracy_clusters,
                cluster_tol=self.config.cluster_tol,
            )
        ]


def run_checks(config: RunConfig, names: Sequence[str], session=None) -> List[CheckReport]:
    if not names:
        return []
    return CheckSuite(config).run(names, session=session)
