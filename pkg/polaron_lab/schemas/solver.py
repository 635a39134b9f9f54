from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from polaron_lab.spectral.clusters import DEFAULT_CLUSTER_TOL


class SolverSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: Literal["auto", "dense", "krylov"] = "auto"
    tol: float = Field(default=1e-10, gt=0.0)
    max_iter: int = Field(default=500, ge=1)
    seed: int = 0
    block_size: int = Field(default=2, ge=1)
    # None falls back to LabSettings.dense_threshold
    dense_threshold: Optional[int] = Field(default=None, ge=1)
    cluster_tol: float = Field(default=DEFAULT_CLUSTER_TOL, gt=0.0)


class CheckTolerances(BaseModel):
    """Bound checks accept violations up to atol + rtol·scale; strict inequalities need strictness·scale."""

    model_config = ConfigDict(frozen=True)

    atol: float = Field(default=1e-9, ge=0.0)
    rtol: float = Field(default=1e-8, ge=0.0)
    strictness: float = Field(default=1e-10, ge=0.0)

    def bound(self, scale: float) -> float:
        return self.atol + self.rtol * scale

    def floor(self, scale: float) -> float:
        return self.strictness * scale
