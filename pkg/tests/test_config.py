import numpy as np
import pytest

from polaron_lab.core.errors import ConfigError
from polaron_lab.fock.grid import AZIMUTHAL, INVERSION, REFLECTION_K2
from polaron_lab.schemas.run_config import CHECK_NAMES, RunConfig

MINIMAL = """
# comment lines are ignored
p = 0.1 0 0.2
q = 0.25
grid_n_azimuthal = 4
checks = mass_reflection, dispersion
mass_values = 0 0.2
"""


def test_parse_text():
    config = RunConfig.parse_text(MINIMAL)
    assert config.p == (0.1, 0.0, 0.2)
    assert config.q == 0.25
    assert config.M == 1.0
    assert config.checks == ["mass_reflection", "dispersion"]
    assert config.mass_values == [0.0, 0.2]
    assert config.source_text == MINIMAL
    assert "source_text" not in config.model_dump()


def test_unknown_key_is_rejected():
    with pytest.raises(ConfigError):
        RunConfig.parse_text("p = 0 0 0\nmomentum = 1\n")


def test_key_without_value_is_rejected():
    with pytest.raises(ConfigError):
        RunConfig.parse_text("q\n")


@pytest.mark.parametrize(
    "text",
    [
        "p = 0 0\n",
        "grid_k_min = 2.0\ngrid_k_max = 1.0\n",
        "checks = all, nonsense\n",
        "m = -0.5\n",
        "grid_axis = 0 0 0\n",
        "source_text = x\n",
    ],
)
def test_invalid_values_are_rejected(text):
    with pytest.raises(ConfigError):
        RunConfig.parse_text(text)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.load(tmp_path / "absent.cfg")


def test_selected_checks():
    config = RunConfig.parse_text(MINIMAL)
    assert config.selected_checks() == ["mass_reflection", "dispersion"]
    assert config.selected_checks("") == []
    assert config.selected_checks("all") == list(CHECK_NAMES)
    assert config.selected_checks("oracle kramers_pairing") == ["oracle", "kramers_pairing"]
    with pytest.raises(ConfigError):
        config.selected_checks("oracle,bogus")


def test_builders():
    config = RunConfig.parse_text(MINIMAL)
    model = config.build_model()
    assert model.dim == 660
    assert np.allclose(model.p, [0.1, 0.0, 0.2])
    assert model.grid.symmetry_tags == {INVERSION, AZIMUTHAL, REFLECTION_K2}
    assert config.solver_settings().seed == 0
    assert config.tolerances().bound(10.0) == pytest.approx(1e-9 + 1e-7)


def test_family_builders():
    config = RunConfig.parse_text(MINIMAL)
    pull = config.pull_through_models()
    assert [model.n_max for model in pull] == [1, 2, 3]
    assert all(model.grid.n_points == 1 for model in pull)
    refined = config.refinement_models()
    assert len(refined) == 3
    floors = [float(model.grid.norms.min()) for model in refined]
    assert floors == sorted(floors, reverse=True)
    assert all(model.m == 0.2 for model in refined)


@pytest.mark.parametrize("name, dim", [("desk_d2.cfg", 660), ("desk_d1.cfg", 388), ("free_q0.cfg", 660)])
def test_shipped_configs(config_path, name, dim):
    config = RunConfig.load(config_path(name))
    assert config.build_model().dim == dim
    assert config.source_text.startswith("#")
