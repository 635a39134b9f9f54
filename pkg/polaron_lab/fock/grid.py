import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.transform import Rotation

from polaron_lab.core.errors import GridError, SymmetryError

logger = logging.getLogger(__name__)

INVERSION = "inversion"
AZIMUTHAL = "azimuthal"
REFLECTION_K2 = "reflection_k2"
KNOWN_TAGS = (INVERSION, AZIMUTHAL, REFLECTION_K2)

# Reflection (k1, k2, k3) -> (k1, -k2, k3) in lab coordinates
REFLECTION_K2_MATRIX = np.diag([1.0, -1.0, 1.0])


def rotation_about(axis: Sequence[float], angle: float) -> np.ndarray:
    """Proper rotation by `angle` (right-hand rule) about `axis`."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    return Rotation.from_rotvec(axis * angle).as_matrix()


def _unit(vector: Sequence[float], name: str) -> np.ndarray:
    vector = np.asarray(vector, dtype=float)
    if vector.shape != (3,) or not np.all(np.isfinite(vector)):
        raise GridError(f"{name} must be a finite 3-vector, got {vector!r}")
    norm = np.linalg.norm(vector)
    if norm == 0.0:
        raise GridError(f"{name} must be non-zero")
    return vector / norm


def _frame(axis: np.ndarray):
    """Right-handed frame (u, v, axis); v is the lab y-axis whenever axis is orthogonal to it."""
    if abs(axis[1]) <= 1e-12:
        v = np.array([0.0, 1.0, 0.0])
    else:
        helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 0.0, 1.0])
        v = np.cross(axis, helper)
        v /= np.linalg.norm(v)
    u = np.cross(v, axis)
    return u, v


@dataclass(frozen=True)
class Mode:
    k: np.ndarray
    helicity: int
    weight: float


@dataclass(frozen=True, eq=False)
class ModeGrid:
    """Photon momentum nodes with quadrature weights.

    Each node carries two helicity modes; mode index 2*a + (helicity - 1) belongs to node a.
    Declared symmetry tags are verified to permute the nodes exactly.
    """

    points: np.ndarray
    weights: np.ndarray
    axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    symmetry_tags: frozenset = frozenset()
    n_azimuthal: int = 0

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if points.ndim != 2 or points.shape[1] != 3 or points.shape[0] == 0:
            raise GridError(f"points must have shape (K, 3) with K >= 1, got {points.shape}")
        if weights.shape != (points.shape[0],):
            raise GridError(f"expected {points.shape[0]} weights, got shape {weights.shape}")
        if not (np.all(np.isfinite(points)) and np.all(np.isfinite(weights))):
            raise GridError("grid points and weights must be finite")
        if np.any(np.linalg.norm(points, axis=1) <= 0.0):
            raise GridError("k = 0 cannot be a grid node")
        if np.any(weights <= 0.0):
            raise GridError("quadrature weights must be positive")
        unknown = set(self.symmetry_tags) - set(KNOWN_TAGS)
        if unknown:
            raise GridError(f"unknown symmetry tags {sorted(unknown)}")
        if AZIMUTHAL in self.symmetry_tags and (self.n_azimuthal < 2 or self.n_azimuthal % 2):
            raise GridError(f"azimuthal tag needs an even order >= 2, got {self.n_azimuthal}")
        points.setflags(write=False)
        weights.setflags(write=False)
        axis = _unit(self.axis, "axis")
        axis.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "symmetry_tags", frozenset(self.symmetry_tags))
        for tag, matrix in self.symmetry_generators().items():
            try:
                self.permutation(matrix)
            except SymmetryError as exc:
                raise GridError(f"declared symmetry {tag} does not map the grid to itself: {exc.detail}")

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def n_modes(self) -> int:
        return 2 * self.n_points

    @cached_property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.points, axis=1)

    @property
    def mode_points(self) -> np.ndarray:
        return np.repeat(self.points, 2, axis=0)

    @property
    def mode_weights(self) -> np.ndarray:
        return np.repeat(self.weights, 2)

    @property
    def mode_norms(self) -> np.ndarray:
        return np.repeat(self.norms, 2)

    @property
    def modes(self) -> List[Mode]:
        return [
            Mode(k=self.points[a], helicity=helicity, weight=float(self.weights[a]))
            for a in range(self.n_points)
            for helicity in (1, 2)
        ]

    def mode_index(self, point: int, helicity: int) -> int:
        if not 0 <= point < self.n_points or helicity not in (1, 2):
            raise IndexError(f"no mode for node {point}, helicity {helicity}")
        return 2 * point + helicity - 1

    def has_tag(self, tag: str) -> bool:
        return tag in self.symmetry_tags

    @cached_property
    def _tree(self) -> cKDTree:
        return cKDTree(self.points)

    def permutation(self, transform: np.ndarray, atol: float = 1e-9) -> np.ndarray:
        """Return perm with points[perm[a]] = transform @ points[a]; raise if the grid is not preserved."""
        transform = np.asarray(transform, dtype=float)
        if transform.shape != (3, 3) or not np.allclose(transform @ transform.T, np.eye(3), atol=1e-12):
            raise SymmetryError("transform must be an orthogonal 3x3 matrix")
        images = self.points @ transform.T
        distances, perm = self._tree.query(images)
        scale = float(self.norms.max())
        if np.any(distances > atol * scale) or np.unique(perm).size != self.n_points:
            raise SymmetryError("transform does not permute the grid nodes")
        if not np.allclose(self.weights[perm], self.weights, rtol=1e-12, atol=0.0):
            raise SymmetryError("transform does not preserve the quadrature weights")
        return perm

    def symmetry_generators(self) -> Dict[str, np.ndarray]:
        generators = {}
        if INVERSION in self.symmetry_tags:
            generators[INVERSION] = -np.eye(3)
        if AZIMUTHAL in self.symmetry_tags:
            generators[AZIMUTHAL] = rotation_about(self.axis, 2.0 * np.pi / self.n_azimuthal)
        if REFLECTION_K2 in self.symmetry_tags:
            generators[REFLECTION_K2] = REFLECTION_K2_MATRIX.copy()
        return generators

    def symmetry_group(self) -> List[np.ndarray]:
        """All elements of the finite group generated by the declared tags, identity first."""
        def key(matrix):
            return tuple((np.round(matrix, 9) + 0.0).ravel())

        generators = list(self.symmetry_generators().values())
        elements = {key(np.eye(3)): np.eye(3)}
        frontier = [np.eye(3)]
        while frontier:
            discovered = []
            for element in frontier:
                for generator in generators:
                    product = generator @ element
                    product_key = key(product)
                    if product_key not in elements:
                        elements[product_key] = product
                        discovered.append(product)
            frontier = discovered
        return list(elements.values())


def _detected_tags(points, weights, axis, azimuthal_orders: Iterable[int]):
    probe = ModeGrid(points=points, weights=weights, axis=axis)
    tags = set()
    try:
        probe.permutation(-np.eye(3))
        tags.add(INVERSION)
    except SymmetryError:
        pass
    try:
        probe.permutation(REFLECTION_K2_MATRIX)
        tags.add(REFLECTION_K2)
    except SymmetryError:
        pass
    n_azimuthal = 0
    for order in azimuthal_orders:
        try:
            probe.permutation(rotation_about(probe.axis, 2.0 * np.pi / order))
        except SymmetryError:
            continue
        tags.add(AZIMUTHAL)
        n_azimuthal = order
        break
    return tags, n_azimuthal


def build_cylindrical_grid(
    n_radial: int,
    n_polar: int,
    n_azimuthal: int,
    k_min: float,
    k_max: float,
    axis: Sequence[float] = (0.0, 0.0, 1.0),
    require: Iterable[str] = (INVERSION, AZIMUTHAL),
) -> ModeGrid:
    """Midpoint product rule on the shell k_min < |k| < k_max in coordinates adapted to `axis`.

    Nodes sit at the midpoints of radius, polar angle and azimuth; weights are the exact
    cell volumes, so the weights add up to the shell volume.
    """
    for name, value in (("n_radial", n_radial), ("n_polar", n_polar), ("n_azimuthal", n_azimuthal)):
        if int(value) != value or value < 1:
            raise GridError(f"{name} must be a positive integer, got {value}")
    if n_azimuthal % 2:
        raise GridError(f"n_azimuthal must be even so that k -> -k maps the grid to itself, got {n_azimuthal}")
    if not 0.0 < k_min < k_max:
        raise GridError(f"need 0 < k_min < k_max, got k_min={k_min}, k_max={k_max}")
    axis = _unit(axis, "axis")
    u, v = _frame(axis)

    radii = np.linspace(k_min, k_max, n_radial + 1)
    polar = np.linspace(0.0, np.pi, n_polar + 1)
    d_phi = 2.0 * np.pi / n_azimuthal
    phis = (np.arange(n_azimuthal) + 0.5) * d_phi

    points, weights = [], []
    for r_lo, r_hi in zip(radii[:-1], radii[1:]):
        r = 0.5 * (r_lo + r_hi)
        radial_volume = (r_hi ** 3 - r_lo ** 3) / 3.0
        for t_lo, t_hi in zip(polar[:-1], polar[1:]):
            theta = 0.5 * (t_lo + t_hi)
            weight = radial_volume * (np.cos(t_lo) - np.cos(t_hi)) * d_phi
            for phi in phis:
                direction = np.sin(theta) * (np.cos(phi) * u + np.sin(phi) * v) + np.cos(theta) * axis
                points.append(r * direction)
                weights.append(weight)
    points = np.array(points)
    weights = np.array(weights)

    tags, _ = _detected_tags(points, weights, axis, azimuthal_orders=(n_azimuthal,))
    missing = set(require) - tags
    if missing:
        raise GridError(f"grid nodes are not closed under the requested symmetries {sorted(missing)}")
    grid = ModeGrid(
        points=points,
        weights=weights,
        axis=axis,
        symmetry_tags=frozenset(tags),
        n_azimuthal=n_azimuthal if AZIMUTHAL in tags else 0,
    )
    logger.info(f"Built cylindrical grid with {grid.n_points} k-points, tags {sorted(grid.symmetry_tags)}")
    return grid


def build_point_grid(
    points: Sequence[Sequence[float]],
    weights: Optional[Sequence[float]] = None,
    axis: Sequence[float] = (0.0, 0.0, 1.0),
) -> ModeGrid:
    """Grid from explicit nodes; every symmetry tag that holds exactly is detected and declared."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    weights = np.ones(points.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    orders = range(2 * max(points.shape[0], 1), 1, -2)
    tags, n_azimuthal = _detected_tags(points, weights, axis, azimuthal_orders=orders)
    return ModeGrid(points=points, weights=weights, axis=axis, symmetry_tags=frozenset(tags), n_azimuthal=n_azimuthal)
