from pathlib import Path

import pytest

from polaron_lab.fock.grid import build_cylindrical_grid, build_point_grid
from polaron_lab.models.cutoff import CutoffProfile
from polaron_lab.models.polaron import PolaronModel

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture(scope="session")
def ring_grid():
    """K = 4 ring in the k3 = 0 plane (instance D2)."""
    return build_cylindrical_grid(1, 1, 4, 0.5, 1.5)


@pytest.fixture(scope="session")
def d1_grid():
    """Two shells, three polar bands, eight azimuthal nodes: K = 48 (instance D1)."""
    return build_cylindrical_grid(2, 3, 8, 0.2, 2.0)


@pytest.fixture(scope="session")
def single_point_grid():
    return build_point_grid([[0.6, 0.0, 0.8]], [1.0])


@pytest.fixture(scope="session")
def sharp_cutoff():
    return CutoffProfile.sharp(0.5, 2.0)


@pytest.fixture(scope="session")
def make_model(sharp_cutoff):
    def factory(grid, n_max, **params):
        params.setdefault("M", 1.0)
        return PolaronModel.create(grid, n_max, sharp_cutoff, **params)

    return factory


@pytest.fixture(scope="session")
def d2_model(ring_grid, make_model):
    return make_model(ring_grid, 3, p=(0.0, 0.0, 0.5), q=0.3)


@pytest.fixture(scope="session")
def d1_model(d1_grid, make_model):
    return make_model(d1_grid, 1, p=(0.0, 0.0, 0.3), q=0.3)


@pytest.fixture
def config_path():
    def resolve(name: str) -> Path:
        return CONFIG_DIR / name

    return resolve
