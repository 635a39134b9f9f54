import numpy as np
import pytest

from polaron_lab.core.errors import SymmetryError
from polaron_lab.fock.grid import REFLECTION_K2_MATRIX, rotation_about
from polaron_lab.models.dirac import dirac_matrices
from polaron_lab.symmetry.spinor import spinor_defect, spinor_rotation

IDENTITY = np.eye(4)


def anticommutator(a, b):
    return a @ b + b @ a


def test_clifford_relations():
    dirac = dirac_matrices()
    for j, alpha_j in enumerate(dirac.alpha):
        assert np.allclose(anticommutator(alpha_j, dirac.beta), 0.0)
        for l, alpha_l in enumerate(dirac.alpha):
            assert np.allclose(anticommutator(alpha_j, alpha_l), 2.0 * (j == l) * IDENTITY)
    assert np.allclose(dirac.beta @ dirac.beta, IDENTITY)


def test_gamma5():
    dirac = dirac_matrices()
    gamma5 = dirac.gamma5
    assert np.allclose(gamma5 @ gamma5, IDENTITY)
    assert np.allclose(gamma5, gamma5.conj().T)
    assert np.allclose(anticommutator(gamma5, dirac.beta), 0.0)
    for alpha in dirac.alpha:
        assert np.allclose(gamma5 @ alpha, alpha @ gamma5)


def test_spin_generators_close():
    spin = dirac_matrices().spin
    # S = -Σ/2, so the generators close with the opposite sign
    assert np.allclose(spin[0] @ spin[1] - spin[1] @ spin[0], -1j * spin[2])
    assert np.allclose(sum(s @ s for s in spin), 0.75 * IDENTITY)


def test_matrices_are_read_only():
    with pytest.raises(ValueError):
        dirac_matrices().beta[0, 0] = 2.0


@pytest.mark.parametrize(
    "transform",
    [
        np.eye(3),
        rotation_about((0, 0, 1), 0.4),
        rotation_about((1, 2, -1), 2.1),
        REFLECTION_K2_MATRIX,
        -np.eye(3),
    ],
)
def test_spinor_lift_conjugates_alpha(transform):
    u = spinor_rotation(transform)
    assert np.allclose(u @ u.conj().T, IDENTITY)
    assert spinor_defect(u, transform) <= 1e-12


def test_lift_of_inversion_is_beta():
    assert np.allclose(spinor_rotation(-np.eye(3)), dirac_matrices().beta)


def test_lift_rejects_non_orthogonal():
    with pytest.raises(SymmetryError):
        spinor_rotation(np.diag([1.0, 2.0, 1.0]))
