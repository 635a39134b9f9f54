import numpy as np
import pytest
import scipy.sparse as sp

from polaron_lab.core.errors import SpectrumError
from polaron_lab.models.polaron import assemble
from polaron_lab.schemas.solver import SolverSettings
from polaron_lab.spectral.clusters import cluster_ids, degeneracy_clusters
from polaron_lab.spectral.solvers import dense_spectrum, krylov_lowest, lowest_spectrum, oracle_agreement


def test_degeneracy_clusters():
    assert degeneracy_clusters([0.0, 0.0, 1.0, 2.0, 2.0, 2.0]) == [2, 1, 3]
    assert cluster_ids([0.0, 0.0, 1.0, 2.0, 2.0, 2.0]) == [0, 0, 1, 2, 2, 2]
    assert degeneracy_clusters([]) == []


def test_clusters_use_relative_tolerance():
    assert degeneracy_clusters([1e6, 1e6 + 1e-2], cluster_tol=1e-7) == [2]
    assert degeneracy_clusters([0.0, 1e-6], cluster_tol=1e-7) == [1, 1]


def test_clusters_need_ascending_values():
    with pytest.raises(ValueError):
        cluster_ids([1.0, 0.0])


@pytest.fixture(scope="module")
def d2_matrix(d2_model):
    return assemble(d2_model).matrix


def test_krylov_matches_dense(d2_matrix):
    dense = dense_spectrum(d2_matrix, n_eigs=4)
    krylov = krylov_lowest(d2_matrix, n_eigs=4, seed=7)
    assert krylov.converged
    assert np.all(np.abs(krylov.eigenvalues - dense.eigenvalues) <= 1e-8 * (1.0 + np.abs(dense.eigenvalues)))
    assert krylov.max_residual <= 1e-10
    assert krylov.multiplicities == dense.multiplicities


def test_krylov_is_deterministic(d2_matrix):
    first = krylov_lowest(d2_matrix, n_eigs=2, seed=3)
    second = krylov_lowest(d2_matrix, n_eigs=2, seed=3)
    assert np.array_equal(first.eigenvalues, second.eigenvalues)
    assert first.iterations == second.iterations
    assert first.history == second.history


def test_dense_residuals_are_small(d2_matrix):
    result = dense_spectrum(d2_matrix)
    assert result.eigenvalues.size == 660
    assert result.max_residual < 1e-12
    assert sum(result.multiplicities) == 660


def test_dense_threshold(d2_matrix):
    with pytest.raises(SpectrumError):
        dense_spectrum(d2_matrix, threshold=100)


def test_non_hermitian_input_is_rejected():
    with pytest.raises(SpectrumError):
        dense_spectrum(sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]])))
    with pytest.raises(SpectrumError):
        krylov_lowest(sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]])))


def test_dispatch_by_threshold(d2_matrix):
    assert lowest_spectrum(d2_matrix, n_eigs=2).solver == "dense"
    below = lowest_spectrum(d2_matrix, n_eigs=2, settings=SolverSettings(dense_threshold=100))
    assert below.solver == "krylov"
    forced = lowest_spectrum(d2_matrix, n_eigs=2, settings=SolverSettings(method="krylov"))
    assert forced.solver == "krylov"


def test_ground_space_spans_the_degenerate_pair(d2_matrix):
    energy, vectors = dense_spectrum(d2_matrix, n_eigs=4).ground_space()
    assert vectors.shape[1] == 2
    dense = d2_matrix.toarray()
    assert np.allclose(dense @ vectors, energy * vectors, atol=1e-10)


def test_small_diagonal_matrix_is_exact():
    diagonal = sp.diags([3.0, -1.0, 2.0, -1.0, 5.0], format="csr")
    result = krylov_lowest(diagonal, n_eigs=3, seed=1)
    assert np.allclose(result.eigenvalues, [-1.0, -1.0, 2.0])
    assert result.multiplicities == [2, 1]


def test_oracle_agreement(d2_matrix):
    report = oracle_agreement(d2_matrix, n_eigs=2)
    assert report.status == "pass"
    assert report.worst_slack > 0.0


def test_krylov_history_is_variational(d2_matrix):
    result = krylov_lowest(d2_matrix, n_eigs=2, seed=5)
    history = np.array(result.history)
    assert np.all(np.diff(history) <= 1e-10)
    assert history[-1] == pytest.approx(result.lowest)


def test_krylov_lowest_does_not_depend_on_the_seed(d2_matrix):
    lowest = [krylov_lowest(d2_matrix, n_eigs=2, seed=seed).lowest for seed in (3, 11, 29)]
    assert max(lowest) - min(lowest) <= 1e-9


def test_krylov_residual_scale_bounds_the_spectrum(d2_matrix):
    result = krylov_lowest(d2_matrix, n_eigs=2, seed=3)
    column_sums = np.abs(d2_matrix.toarray()).sum(axis=0)
    assert result.norm_estimate == pytest.approx(column_sums.max())
    assert result.norm_estimate >= np.abs(dense_spectrum(d2_matrix).eigenvalues).max()


def test_dense_spectrum_trace_identity():
    rng = np.random.default_rng(17)
    for size in (5, 30):
        raw = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
        matrix = 0.5 * (raw + raw.conj().T)
        result = dense_spectrum(sp.csr_matrix(matrix))
        assert result.eigenvalues.size == size
        assert result.eigenvalues.sum() == pytest.approx(np.trace(matrix).real, abs=1e-10)
