import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from polaron_lab.core.errors import DimensionMismatchError, PolarizationError
from polaron_lab.fock.grid import ModeGrid

logger = logging.getLogger(__name__)

SINGULAR_TOLERANCE = 1e-12
ORTHONORMAL_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class PolarizationField:
    """Two real transverse unit vectors per k-point; vectors[a, λ-1] is e^(λ)(k_a)."""

    kind: str
    vectors: np.ndarray
    axis: Optional[np.ndarray] = None

    def __post_init__(self):
        vectors = np.array(self.vectors, dtype=float)
        if vectors.ndim != 3 or vectors.shape[1:] != (2, 3):
            raise DimensionMismatchError(f"polarization vectors must have shape (K, 2, 3), got {vectors.shape}")
        vectors.setflags(write=False)
        object.__setattr__(self, "vectors", vectors)

    @property
    def n_points(self) -> int:
        return self.vectors.shape[0]

    def transversality_residual(self, grid: ModeGrid) -> float:
        directions = grid.points / grid.norms[:, None]
        return float(np.abs(np.einsum("ald,ad->al", self.vectors, directions)).max())

    def orthonormality_residual(self) -> float:
        gram = np.einsum("ald,amd->alm", self.vectors, self.vectors)
        return float(np.abs(gram - np.eye(2)).max())

    def handedness(self, grid: ModeGrid) -> np.ndarray:
        """sign((k̂ ∧ e1) · e2) per k-point: +1 for right-handed pairs."""
        directions = grid.points / grid.norms[:, None]
        orientation = np.einsum("ad,ad->a", np.cross(directions, self.vectors[:, 0]), self.vectors[:, 1])
        return np.where(orientation >= 0.0, 1.0, -1.0)

    def validate(self, grid: ModeGrid) -> "PolarizationField":
        if self.n_points != grid.n_points:
            raise DimensionMismatchError(f"polarization covers {self.n_points} k-points, grid has {grid.n_points}")
        transversality = self.transversality_residual(grid)
        orthonormality = self.orthonormality_residual()
        if transversality > ORTHONORMAL_TOLERANCE or orthonormality > ORTHONORMAL_TOLERANCE:
            raise PolarizationError(
                f"{self.kind} polarization is not transverse-orthonormal "
                f"(transversality {transversality:.2e}, orthonormality {orthonormality:.2e})"
            )
        return self


def _right_handed(grid: ModeGrid, first: np.ndarray) -> np.ndarray:
    directions = grid.points / grid.norms[:, None]
    return np.stack([first, np.cross(directions, first)], axis=1)


def make_polarization(kind: str, grid: ModeGrid, axis: Optional[Sequence[float]] = None) -> PolarizationField:
    """Polarization vectors of kind "xy" (e1 ∝ (k2, -k1, 0)) or "axis" (e1 ∝ k ∧ j), with e2 = k̂ ∧ e1."""
    points = grid.points
    if kind == "xy":
        transverse = np.hypot(points[:, 0], points[:, 1])
        singular = np.nonzero(transverse <= SINGULAR_TOLERANCE * grid.norms)[0]
        if singular.size:
            node = points[singular[0]]
            raise PolarizationError(f"xy polarization is singular at node {node.tolist()} (k1 = k2 = 0)", node=node)
        first = np.stack([points[:, 1], -points[:, 0], np.zeros(grid.n_points)], axis=1) / transverse[:, None]
        field_axis = None
    elif kind == "axis":
        field_axis = np.asarray(grid.axis if axis is None else axis, dtype=float)
        field_axis = field_axis / np.linalg.norm(field_axis)
        crossed = np.cross(points, field_axis)
        lengths = np.linalg.norm(crossed, axis=1)
        singular = np.nonzero(lengths <= SINGULAR_TOLERANCE * grid.norms)[0]
        if singular.size:
            node = points[singular[0]]
            raise PolarizationError(f"axis polarization is singular at node {node.tolist()} (k parallel to j)", node=node)
        first = crossed / lengths[:, None]
    else:
        raise PolarizationError(f"unknown polarization kind {kind!r}")
    field = PolarizationField(kind=kind, vectors=_right_handed(grid, first), axis=field_axis)
    return field.validate(grid)


def custom_polarization(grid: ModeGrid, vectors) -> PolarizationField:
    return PolarizationField(kind="custom", vectors=vectors).validate(grid)


def transported_polarization(field: PolarizationField, grid: ModeGrid, transform: np.ndarray) -> PolarizationField:
    """e'(k) = T^{-1} e(T k): the polarization seen after conjugating with the lift of T."""
    transform = np.asarray(transform, dtype=float)
    permutation = grid.permutation(transform)
    # T^{-1} = T^T for orthogonal T; row-vector form v @ T applies T^T
    vectors = field.vectors[permutation] @ transform
    return custom_polarization(grid, vectors)
