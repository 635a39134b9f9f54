import logging
from io import StringIO
from pathlib import Path
from typing import List, Literal, Optional, Tuple

import numpy as np
from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from polaron_lab.core.config import get_settings
from polaron_lab.core.errors import ConfigError
from polaron_lab.fock.grid import ModeGrid, build_cylindrical_grid, build_point_grid
from polaron_lab.models.cutoff import CutoffProfile
from polaron_lab.models.polarization import PolarizationField, make_polarization
from polaron_lab.models.polaron import PolaronModel
from polaron_lab.schemas.solver import CheckTolerances, SolverSettings

logger = logging.getLogger(__name__)

Vector3 = Tuple[float, float, float]

CHECK_NAMES = (
    "oracle",
    "concavity",
    "lipschitz",
    "mass_reflection",
    "inverse_energy",
    "mass_monotone",
    "rotation_symmetry",
    "dispersion",
    "ir_criterion",
    "essential_gap",
    "pull_through",
    "photon_bounds",
    "gauge_equivalence",
    "kramers_pairing",
)


def _split(value):
    if isinstance(value, str):
        return value.replace(",", " ").split()
    return value


class RunConfig(BaseModel):
    """One run of the lab: `key = value` lines, vectors and lists separated by whitespace."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    # model
    p: Vector3 = (0.0, 0.0, 0.0)
    M: float = 1.0
    m: float = Field(default=0.0, ge=0.0)
    q: float = 0.0

    # discretization
    grid_n_radial: int = Field(default=1, ge=1)
    grid_n_polar: int = Field(default=1, ge=1)
    grid_n_azimuthal: int = Field(default=4, ge=2)
    grid_k_min: float = Field(default=0.5, gt=0.0)
    grid_k_max: float = Field(default=1.5, gt=0.0)
    grid_axis: Vector3 = (0.0, 0.0, 1.0)
    n_max: int = Field(default=3, ge=0)

    cutoff: Literal["sharp", "exponential"] = "sharp"
    cutoff_kappa: float = 0.5
    cutoff_lambda: float = 2.0
    cutoff_decay: float = 1.0

    polarization: Literal["xy", "axis"] = "xy"
    polarization_axis: Optional[Vector3] = None
    gauge_axis: Vector3 = (1.0, 0.0, 0.0)

    # solver and tolerances
    solver_method: Literal["auto", "dense", "krylov"] = "auto"
    solver_tol: float = Field(default=1e-10, gt=0.0)
    solver_max_iter: int = Field(default=500, ge=1)
    solver_seed: int = 0
    solver_block_size: int = Field(default=2, ge=1)
    dense_threshold: Optional[int] = Field(default=None, ge=1)
    cluster_tol: float = Field(default=1e-7, gt=0.0)
    atol: float = Field(default=1e-9, ge=0.0)
    rtol: float = Field(default=1e-8, ge=0.0)
    strictness: float = Field(default=1e-10, ge=0.0)

    # checks
    checks: List[str] = ["all"]
    oracle_instances: int = Field(default=20, ge=1)
    concavity_segments: int = Field(default=30, ge=0)
    lipschitz_points: int = Field(default=12, ge=2)
    mass_values: List[float] = [0.0, 0.1, 0.3]
    dispersion_P: float = Field(default=1.0, gt=0.0)
    ir_couplings: List[float] = [0.1, 0.2, 0.4]
    essential_gap_m: float = Field(default=0.2, gt=0.0)
    essential_gap_refinements: int = Field(default=3, ge=1)
    pull_through_n_max: List[int] = [1, 2, 3]
    pull_through_point: Vector3 = (0.6, 0.0, 0.8)
    pull_through_weight: float = Field(default=1.0, gt=0.0)
    pull_through_threshold: float = Field(default=1e-6, gt=0.0)
    degeneracy_clusters: int = Field(default=12, ge=1)

    # scan
    scan_parameter: Literal["p", "M", "q", "m"] = "p"
    scan_direction: Vector3 = (0.0, 0.0, 1.0)
    scan_start: float = 0.0
    scan_stop: float = 1.0
    scan_points: int = Field(default=11, ge=2)

    solve_n_eigs: int = Field(default=6, ge=1)
    output_dir: Optional[str] = None

    source_text: str = Field(default="", exclude=True)

    @field_validator(
        "p", "grid_axis", "polarization_axis", "gauge_axis", "pull_through_point", "scan_direction", mode="before"
    )
    @classmethod
    def parse_vector(cls, value):
        if value is None or (isinstance(value, str) and not value.strip()):
            return None
        return _split(value)

    @field_validator("checks", "mass_values", "ir_couplings", "pull_through_n_max", mode="before")
    @classmethod
    def parse_list(cls, value):
        return _split(value)

    @field_validator("checks")
    @classmethod
    def known_checks(cls, value: List[str]) -> List[str]:
        unknown = [name for name in value if name != "all" and name not in CHECK_NAMES]
        if unknown:
            raise ValueError(f"unknown checks {unknown}; known: all, {', '.join(CHECK_NAMES)}")
        return value

    @model_validator(mode="after")
    def check_ranges(self):
        if self.grid_k_max <= self.grid_k_min:
            raise ValueError(f"grid_k_max ({self.grid_k_max}) must exceed grid_k_min ({self.grid_k_min})")
        for name in ("grid_axis", "scan_direction"):
            if np.linalg.norm(getattr(self, name)) == 0.0:
                raise ValueError(f"{name} must be non-zero")
        return self

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.parse_text(text, source=str(path))

    @classmethod
    def parse_text(cls, text: str, source: str = "<text>") -> "RunConfig":
        values = dotenv_values(stream=StringIO(text))
        missing = [key for key, value in values.items() if value is None]
        if missing:
            raise ConfigError(f"{source}: keys without a value: {missing}")
        if "source_text" in values:
            raise ConfigError(f"{source}: source_text is not a configuration key")
        try:
            config = cls(**values, source_text=text)
        except ValidationError as exc:
            raise ConfigError(f"{source}: invalid configuration\n{exc}") from exc
        logger.info(f"Loaded config from {source}")
        return config

    @property
    def output_path(self) -> Path:
        return Path(self.output_dir or get_settings().output_dir)

    def selected_checks(self, which: Optional[str] = None) -> List[str]:
        names = self.checks if which is None else _split(which)
        if "all" in names:
            return list(CHECK_NAMES)
        unknown = [name for name in names if name not in CHECK_NAMES]
        if unknown:
            raise ConfigError(f"unknown checks {unknown}")
        return list(names)

    def build_grid(self, k_min: Optional[float] = None) -> ModeGrid:
        return build_cylindrical_grid(
            self.grid_n_radial,
            self.grid_n_polar,
            self.grid_n_azimuthal,
            self.grid_k_min if k_min is None else k_min,
            self.grid_k_max,
            axis=self.grid_axis,
        )

    def build_cutoff(self) -> CutoffProfile:
        if self.cutoff == "sharp":
            return CutoffProfile.sharp(self.cutoff_kappa, self.cutoff_lambda)
        return CutoffProfile.exponential(self.cutoff_decay)

    def build_polarization(self, grid: ModeGrid) -> PolarizationField:
        return make_polarization(self.polarization, grid, axis=self.polarization_axis)

    def build_model(self, grid: Optional[ModeGrid] = None, n_max: Optional[int] = None, **changes) -> PolaronModel:
        grid = grid or self.build_grid()
        params = {"p": self.p, "M": self.M, "m": self.m, "q": self.q}
        params.update(changes)
        return PolaronModel.create(
            grid,
            self.n_max if n_max is None else n_max,
            self.build_cutoff(),
            polarization=self.build_polarization(grid),
            **params,
        )

    def pull_through_models(self) -> List[PolaronModel]:
        """The single-node family: one k-point, n_max from pull_through_n_max."""
        grid = build_point_grid([self.pull_through_point], [self.pull_through_weight], axis=self.grid_axis)
        return [self.build_model(grid=grid, n_max=n_max) for n_max in sorted(set(self.pull_through_n_max))]

    def refinement_models(self) -> List[PolaronModel]:
        """Essential-gap family: k_min halved at each refinement, photon mass essential_gap_m."""
        return [
            self.build_model(grid=self.build_grid(k_min=self.grid_k_min / 2 ** level), m=self.essential_gap_m)
            for level in range(self.essential_gap_refinements)
        ]

    def solver_settings(self) -> SolverSettings:
        return SolverSettings(
            method=self.solver_method,
            tol=self.solver_tol,
            max_iter=self.solver_max_iter,
            seed=self.solver_seed,
            block_size=self.solver_block_size,
            dense_threshold=self.dense_threshold,
            cluster_tol=self.cluster_tol,
        )

    def tolerances(self) -> CheckTolerances:
        return CheckTolerances(atol=self.atol, rtol=self.rtol, strictness=self.strictness)
