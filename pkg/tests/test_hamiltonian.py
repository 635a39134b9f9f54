import numpy as np
import pytest
import scipy.sparse as sp

from polaron_lab.core.errors import PolarizationError
from polaron_lab.fock.grid import build_point_grid
from polaron_lab.models.cutoff import CutoffProfile
from polaron_lab.models.dirac import dirac_matrices
from polaron_lab.models.polarization import custom_polarization, make_polarization
from polaron_lab.models.polaron import PolaronTerms, assemble, coupling_table
from polaron_lab.spectral.solvers import dense_spectrum


def test_dimension(d2_model, d1_model):
    assert d2_model.dim == 660
    assert d1_model.dim == 388
    hamiltonian = assemble(d2_model)
    assert hamiltonian.dim == 660
    assert hamiltonian.matrix.hermitian


@pytest.mark.parametrize("p", [(0.0, 0.0, 0.0), (0.0, 0.0, 0.5), (0.3, 0.0, 0.4)])
def test_free_ground_energy_on_ring(ring_grid, make_model, p):
    model = make_model(ring_grid, 3, p=p, q=0.0)
    spectrum = dense_spectrum(assemble(model).matrix, n_eigs=4)
    expected = -np.sqrt(np.dot(p, p) + 1.0)
    assert spectrum.eigenvalues[0] == pytest.approx(expected, abs=1e-12)
    assert spectrum.multiplicities[0] == 2


def test_free_ground_energy_on_d1(d1_grid, make_model):
    model = make_model(d1_grid, 1, p=(0.0, 0.0, 0.3), q=0.0)
    spectrum = dense_spectrum(assemble(model).matrix, n_eigs=2)
    assert spectrum.lowest == pytest.approx(-np.sqrt(1.09), abs=1e-12)


def test_coupling_lowers_the_energy(ring_grid, make_model):
    model = make_model(ring_grid, 2, q=0.5)
    assert dense_spectrum(assemble(model).matrix, n_eigs=1).lowest < -1.0


def test_couplings_are_transverse(d1_grid, sharp_cutoff):
    polarization = make_polarization("xy", d1_grid)
    table = coupling_table(d1_grid, sharp_cutoff, polarization)
    assert table.shape == (3, 96)
    k = d1_grid.mode_points
    assert np.allclose(np.einsum("jm,mj->m", table, k), 0.0, atol=1e-14)
    # shells inside the cutoff window carry |g|^2 = w / |k|
    norms = d1_grid.mode_norms
    inside = (norms > 0.5) & (norms < 2.0)
    squared = np.sum(table ** 2, axis=0)
    assert np.allclose(squared[inside], d1_grid.mode_weights[inside] / norms[inside])
    assert np.allclose(squared[~inside], 0.0)


def test_polarization_fields_are_right_handed(d1_grid):
    for kind, axis in (("xy", None), ("axis", (1.0, 0.0, 0.0))):
        field = make_polarization(kind, d1_grid, axis=axis)
        assert field.transversality_residual(d1_grid) < 1e-12
        assert field.orthonormality_residual() < 1e-12
        assert np.all(field.handedness(d1_grid) == 1.0)


def test_xy_polarization_is_singular_on_the_axis():
    grid = build_point_grid([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    with pytest.raises(PolarizationError) as excinfo:
        make_polarization("xy", grid)
    assert np.allclose(excinfo.value.node, [0.0, 0.0, 1.0])


def test_axis_polarization_is_singular_along_its_axis(ring_grid):
    direction = ring_grid.points[0] / ring_grid.norms[0]
    with pytest.raises(PolarizationError):
        make_polarization("axis", ring_grid, axis=direction)


def test_custom_polarization_must_be_transverse(ring_grid):
    vectors = np.tile(np.eye(3)[:2], (4, 1, 1))
    with pytest.raises(PolarizationError):
        custom_polarization(ring_grid, vectors)


def test_exponential_cutoff_profile():
    profile = CutoffProfile.exponential(2.0)
    assert profile([0.5])[0] == pytest.approx(0.5 * np.exp(-1.0))
    with pytest.raises(ValueError):
        CutoffProfile.sharp(2.0, 1.0)


def test_terms_recombine_to_the_assembled_matrix(d2_model):
    terms = PolaronTerms.from_model(d2_model)
    direct = assemble(d2_model).matrix.matrix
    recombined = terms.hamiltonian(d2_model.p, d2_model.M, d2_model.m, d2_model.q)
    assert abs(direct - recombined).max() == 0.0


def test_gamma5_flips_the_mass(ring_grid, make_model):
    model = make_model(ring_grid, 2, p=(0.1, -0.2, 0.3), q=0.4)
    flipped = model.with_params(M=-model.M)
    gamma5 = sp.kron(sp.csr_matrix(dirac_matrices().gamma5), sp.identity(len(model.basis)), format="csr")
    conjugated = gamma5 @ assemble(model).matrix.matrix @ gamma5.getH()
    assert abs(conjugated - assemble(flipped).matrix.matrix).max() < 1e-14


def test_invalid_parameters(ring_grid, make_model):
    with pytest.raises(ValueError):
        make_model(ring_grid, 1, m=-0.1)
    with pytest.raises(ValueError):
        make_model(ring_grid, 1, p=(0.0, np.nan, 0.0))
