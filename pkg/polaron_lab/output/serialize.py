from typing import Any, Dict

import numpy as np
import scipy.sparse as sp

from polaron_lab.fock.basis import FockBasis
from polaron_lab.fock.operators import OperatorMatrix
from polaron_lab.models.polaron import PolaronModel


def operator_triplets(operator) -> Dict[str, Any]:
    """Sparse matrix as sorted [row, col, re, im] entries."""
    hermitian = bool(getattr(operator, "hermitian", False))
    matrix = operator.matrix if isinstance(operator, OperatorMatrix) else operator
    coo = sp.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    entries = [
        [int(coo.row[i]), int(coo.col[i]), float(coo.data[i].real), float(coo.data[i].imag)]
        for i in order
    ]
    return {"dim": int(matrix.shape[0]), "hermitian": hermitian, "nnz": len(entries), "entries": entries}


def basis_payload(basis: FockBasis) -> Dict[str, Any]:
    grid = basis.grid
    return {
        "n_max": basis.n_max,
        "n_modes": basis.n_modes,
        "size": len(basis),
        "k_points": grid.points.tolist(),
        "weights": grid.weights.tolist(),
        "symmetry_tags": sorted(grid.symmetry_tags),
        "states": basis.occupations.tolist(),
    }


def model_summary(model: PolaronModel) -> Dict[str, Any]:
    return {
        "p": model.p.tolist(),
        "M": model.M,
        "m": model.m,
        "q": model.q,
        "n_max": model.n_max,
        "n_points": model.grid.n_points,
        "dim": model.dim,
        "cutoff": model.cutoff.model_dump(),
        "polarization": model.polarization.kind,
    }
