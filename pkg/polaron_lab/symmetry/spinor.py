import numpy as np
import scipy.linalg
from scipy.spatial.transform import Rotation

from polaron_lab.core.errors import SymmetryError
from polaron_lab.models.dirac import dirac_matrices


def spinor_defect(u: np.ndarray, transform: np.ndarray) -> float:
    """max over j of |u α_j u† - Σ_l T_jl α_l| together with |u β u† - β|."""
    dirac = dirac_matrices()
    defects = [np.abs(u @ dirac.beta @ u.conj().T - dirac.beta).max()]
    for j in range(3):
        rotated = sum(transform[j, l] * dirac.alpha[l] for l in range(3))
        defects.append(np.abs(u @ dirac.alpha[j] @ u.conj().T - rotated).max())
    return float(max(defects))


def spinor_rotation(transform) -> np.ndarray:
    """Spinor unitary u_T with u α_j u† = Σ_l T_jl α_l and u β u† = β for orthogonal T.

    Proper T: exp(-i θ n·S) for the rotation vector θ n of T. Improper T: β times the lift of -T.
    """
    transform = np.asarray(transform, dtype=float)
    if transform.shape != (3, 3) or not np.allclose(transform @ transform.T, np.eye(3), atol=1e-12):
        raise SymmetryError("spinor lift needs an orthogonal 3x3 matrix")
    dirac = dirac_matrices()
    improper = np.linalg.det(transform) < 0.0
    proper = -transform if improper else transform
    rotation_vector = Rotation.from_matrix(proper).as_rotvec()
    u = scipy.linalg.expm(-1j * dirac.spin_along(rotation_vector))
    if improper:
        u = dirac.beta @ u
    defect = spinor_defect(u, transform)
    if defect > 1e-12:
        raise SymmetryError(f"spinor lift violates the conjugation identity by {defect:.2e}")
    return u
