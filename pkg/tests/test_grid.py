import numpy as np
import pytest

from polaron_lab.core.errors import GridError, SymmetryError
from polaron_lab.fock.grid import (
    AZIMUTHAL,
    INVERSION,
    REFLECTION_K2,
    ModeGrid,
    build_cylindrical_grid,
    build_point_grid,
    rotation_about,
)


def test_ring_grid_nodes_and_tags(ring_grid):
    assert ring_grid.n_points == 4
    assert ring_grid.n_modes == 8
    assert np.allclose(ring_grid.norms, 1.0)
    assert np.allclose(ring_grid.points[:, 2], 0.0)
    assert ring_grid.symmetry_tags == {INVERSION, AZIMUTHAL, REFLECTION_K2}
    assert ring_grid.n_azimuthal == 4


def test_d1_grid_size(d1_grid):
    assert d1_grid.n_points == 48
    assert d1_grid.has_tag(INVERSION)
    assert d1_grid.has_tag(AZIMUTHAL)
    assert d1_grid.n_azimuthal == 8


@pytest.mark.parametrize("k_min, k_max", [(0.5, 1.5), (0.2, 2.0)])
def test_weights_add_up_to_shell_volume(k_min, k_max):
    grid = build_cylindrical_grid(2, 3, 6, k_min, k_max)
    volume = 4.0 * np.pi / 3.0 * (k_max ** 3 - k_min ** 3)
    assert grid.weights.sum() == pytest.approx(volume, rel=1e-12)


def test_odd_azimuthal_order_is_rejected():
    with pytest.raises(GridError):
        build_cylindrical_grid(1, 1, 5, 0.5, 1.5)


@pytest.mark.parametrize("k_min, k_max", [(0.0, 1.0), (1.5, 0.5)])
def test_bad_shell_is_rejected(k_min, k_max):
    with pytest.raises(GridError):
        build_cylindrical_grid(1, 1, 4, k_min, k_max)


def test_inversion_permutation(ring_grid):
    perm = ring_grid.permutation(-np.eye(3))
    assert np.allclose(ring_grid.points[perm], -ring_grid.points)
    assert sorted(perm.tolist()) == [0, 1, 2, 3]


def test_non_symmetry_is_rejected(ring_grid):
    with pytest.raises(SymmetryError):
        ring_grid.permutation(rotation_about((0, 0, 1), np.pi / 3))


def test_ring_symmetry_group_order(ring_grid):
    group = ring_grid.symmetry_group()
    assert len(group) == 16
    assert np.allclose(group[0], np.eye(3))
    for element in group:
        ring_grid.permutation(element)


def test_declared_tag_must_hold():
    with pytest.raises(GridError):
        ModeGrid(
            points=[[1.0, 0.0, 0.0], [0.0, 2.0, 0.0]],
            weights=[1.0, 1.0],
            symmetry_tags=frozenset({INVERSION}),
        )


def test_zero_node_is_rejected():
    with pytest.raises(GridError):
        ModeGrid(points=[[0.0, 0.0, 0.0]], weights=[1.0])


def test_point_grid_detects_tags():
    single = build_point_grid([[0.6, 0.0, 0.8]])
    assert single.symmetry_tags == {REFLECTION_K2}
    pair = build_point_grid([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
    assert INVERSION in pair.symmetry_tags
    assert AZIMUTHAL in pair.symmetry_tags
    assert pair.n_azimuthal == 2


def test_mode_index(ring_grid):
    assert ring_grid.mode_index(0, 1) == 0
    assert ring_grid.mode_index(3, 2) == 7
    with pytest.raises(IndexError):
        ring_grid.mode_index(4, 1)
    with pytest.raises(IndexError):
        ring_grid.mode_index(0, 3)
    modes = ring_grid.modes
    assert len(modes) == 8
    assert modes[5].helicity == 2
    assert np.allclose(modes[5].k, ring_grid.points[2])
