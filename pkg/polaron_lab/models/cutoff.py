from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator


class CutoffProfile(BaseModel):
    """Rotation-invariant coupling form factor ρ(|k|).

    sharp: indicator of kappa < |k| < lam.
    exponential: |k| exp(-decay |k|).
    """

    model_config = ConfigDict(frozen=True)

    kind: Literal["sharp", "exponential"] = "sharp"
    kappa: Optional[float] = None
    lam: Optional[float] = None
    decay: Optional[float] = None

    @model_validator(mode="after")
    def check_parameters(self):
        if self.kind == "sharp":
            if self.kappa is None or self.lam is None:
                raise ValueError("sharp cutoff needs kappa and lam")
            if not 0.0 <= self.kappa < self.lam:
                raise ValueError(f"sharp cutoff needs 0 <= kappa < lam, got kappa={self.kappa}, lam={self.lam}")
        else:
            if self.decay is None or self.decay <= 0.0:
                raise ValueError(f"exponential cutoff needs decay > 0, got {self.decay}")
        return self

    @classmethod
    def sharp(cls, kappa: float, lam: float) -> "CutoffProfile":
        return cls(kind="sharp", kappa=kappa, lam=lam)

    @classmethod
    def exponential(cls, decay: float) -> "CutoffProfile":
        return cls(kind="exponential", decay=decay)

    def __call__(self, norms) -> np.ndarray:
        norms = np.asarray(norms, dtype=float)
        if self.kind == "sharp":
            return ((norms > self.kappa) & (norms < self.lam)).astype(float)
        return norms * np.exp(-self.decay * norms)
