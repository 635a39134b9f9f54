import math
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, computed_field

PASS = "pass"
FAIL = "fail"
HYPOTHESIS_NOT_SATISFIED = "hypothesis not satisfied"
INDISTINGUISHABLE = "indistinguishable from equality"

Status = Literal["pass", "fail", "hypothesis not satisfied", "indistinguishable from equality"]
Vector3 = Tuple[float, float, float]


def to_jsonable(value: Any) -> Any:
    """Plain Python data for JSON: numpy scalars and arrays unpacked, non-finite floats as None."""
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, complex):
        return [to_jsonable(value.real), to_jsonable(value.imag)]
    return value


class CheckReport(BaseModel):
    """Verdict of one numerical check."""

    model_config = ConfigDict(frozen=True)

    name: str
    anchor: str
    status: Status
    worst_slack: Optional[float] = None
    tolerance: Optional[float] = None
    details: Dict[str, Any] = {}

    @computed_field
    @property
    def passed(self) -> bool:
        return self.status != FAIL

    @classmethod
    def from_slack(
        cls,
        name: str,
        anchor: str,
        worst_slack: Optional[float],
        tolerance: float,
        details: Optional[Dict[str, Any]] = None,
        strict_slack: Optional[float] = None,
        floor: Optional[float] = None,
    ) -> "CheckReport":
        """Bound holds when worst_slack >= -tolerance; a strict inequality additionally needs strict_slack > floor."""
        if worst_slack is not None and worst_slack < -tolerance:
            status = FAIL
        elif strict_slack is not None and floor is not None and strict_slack <= floor:
            status = INDISTINGUISHABLE
        else:
            status = PASS
        return cls(
            name=name,
            anchor=anchor,
            status=status,
            worst_slack=worst_slack,
            tolerance=tolerance,
            details=to_jsonable(details or {}),
        )

    @classmethod
    def from_parts(
        cls,
        name: str,
        anchor: str,
        parts: List[Tuple[str, float, float]],
        details: Optional[Dict[str, Any]] = None,
        strict_slack: Optional[float] = None,
        floor: Optional[float] = None,
    ) -> "CheckReport":
        """Combine (label, slack, tolerance) triples; the report fails if any slack is below -tolerance."""
        if not parts:
            return cls.from_slack(name, anchor, None, 0.0, details, strict_slack, floor)
        failing = [label for label, slack, tolerance in parts if slack < -tolerance]
        label, worst, tolerance = min(parts, key=lambda part: part[1] + part[2])
        payload = dict(details or {})
        payload["parts"] = {part_label: {"slack": slack, "tolerance": tol} for part_label, slack, tol in parts}
        if failing:
            payload["failing"] = failing
            status = FAIL
        elif strict_slack is not None and floor is not None and strict_slack <= floor:
            status = INDISTINGUISHABLE
        else:
            status = PASS
        return cls(
            name=name,
            anchor=anchor,
            status=status,
            worst_slack=worst,
            tolerance=tolerance,
            details=to_jsonable(payload),
        )

    @classmethod
    def hypothesis_not_satisfied(cls, name: str, anchor: str, reason: str, details=None) -> "CheckReport":
        payload = {"reason": reason}
        payload.update(details or {})
        return cls(name=name, anchor=anchor, status=HYPOTHESIS_NOT_SATISFIED, details=to_jsonable(payload))


class EnergySample(BaseModel):
    model_config = ConfigDict(frozen=True)

    p: Vector3
    M: float
    q: float
    m: float
    energy: float
    residual: float
    iterations: int
    solver: str
    converged: bool = True


class DispersionEntry(BaseModel):
    k: Vector3
    norm_k: float
    regime: str
    gap: float
    bound: Optional[float] = None
    slack: Optional[float] = None
    upper_slack: float


class DispersionReport(BaseModel):
    p: Vector3
    energy: float
    massless_energy: float
    hypothesis_satisfied: bool
    b_m: Optional[float] = None
    a_m: Optional[float] = None
    P: Optional[float] = None
    entries: List[DispersionEntry] = []
    verdict: CheckReport

    def gaps(self) -> np.ndarray:
        return np.array([entry.gap for entry in self.entries])


class IRCriterionReport(BaseModel):
    p: Vector3
    q: float
    value: float
    per_helicity_value: float
    proof_form_value: float
    unit_value: float
    q0: Optional[float] = None
    passes: bool
    integrand: List[float] = []
    coupling_scan: Dict[str, float] = {}
    verdict: CheckReport


class EssentialGapReport(BaseModel):
    p: Vector3
    m: float
    value: float
    lower: float
    upper: float
    k_floor: float
    minimizing_k: Vector3
    verdict: CheckReport


class PullThroughReport(BaseModel):
    p: Vector3
    n_max: int
    ground_degeneracy: int
    protected_residuals: List[float]
    ceiling_residuals: List[float]
    max_protected: float
    max_ceiling: float
    verdict: CheckReport


class PhotonBoundsReport(BaseModel):
    p: Vector3
    photon_number: float
    photon_bound: float
    vacuum_overlap: float
    overlap_slack: float
    verdict: CheckReport
