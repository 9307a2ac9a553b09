import numpy as np
import pytest
import scipy.linalg as sla

from catsim import spectral_core as sc
from catsim.errors import DefectiveMatrix, DimensionMismatch, EmptySubset, IllConditioned


def test_hermitian_gives_identity_metric(rng):
    a = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    h = a + a.conj().T
    s = sc.decompose(h)
    q = sc.build_q_metric(s)
    # eigenvectors from eig are unit-norm; for Hermitian H they are orthonormal
    assert np.allclose(q.q_matrix, np.eye(6), atol=1e-12)
    split = sc.split_q_parts(h, q, s)
    assert np.abs(split.h_qa).max() < 1e-12


def test_sorting_descending_im_then_re():
    lam = np.array([1 + 0j, 2 + 1j, -1 + 1j, 0.5 - 2j])
    h = np.diag(lam)
    s = sc.decompose(h)
    assert np.allclose(s.eigenvalues, [2 + 1j, -1 + 1j, 1, 0.5 - 2j])


def test_reconstruct_and_metric(rng):
    h = sc.random_diagonalizable(rng, 7, 1e3)
    s = sc.decompose(h)
    assert np.allclose(s.reconstruct(), h, atol=1e-10 * np.linalg.norm(h))
    q = sc.build_q_metric(s)
    assert sc.biorthogonality_error(s, q) < 1e-9 * s.cond_p**2
    assert sc.completeness_error(s, q) < 1e-9 * s.cond_p**2


def test_jordan_block_rejected():
    with pytest.raises(DefectiveMatrix):
        sc.decompose(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_non_square_rejected():
    with pytest.raises(DimensionMismatch):
        sc.decompose(np.ones((2, 3)))


def test_q_dagger_matches_definition(rng):
    h = sc.random_diagonalizable(rng, 5, 1e2)
    s = sc.decompose(h)
    q = sc.build_q_metric(s)
    a = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    ref = np.linalg.inv(q.q_matrix) @ a.conj().T @ q.q_matrix
    assert np.allclose(sc.q_dagger(a, q), ref, atol=1e-9)
    # H is Q-normal, and the Q-Hermitian part has the real spectrum
    assert sc.q_normality_residual(h, q) < 1e-12
    split = sc.split_q_parts(h, q, s)
    assert split.crosscheck_residual < 1e-10
    assert np.allclose(np.sort(np.linalg.eigvals(split.h_qh).real), np.sort(s.eigenvalues.real), atol=1e-8)


def test_qb_is_inverse(rng):
    h = sc.random_diagonalizable(rng, 6, 1e2)
    s = sc.decompose(h)
    q = sc.build_q_metric(s)
    qb = sc.build_qb_metric(q)
    assert np.abs(qb.q_matrix @ q.q_matrix - np.eye(6)).max() < 1e-11
    # Q|lambda_j> are eigenvectors of H^dag
    assert sc.hb_eigen_residual(h, s, q) < 1e-10


def test_singular_factor_rejected():
    f = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    s = sc.SpectralData(np.array([1.0 + 0j, 2.0]), f, f, np.inf)
    with pytest.raises(IllConditioned):
        sc.build_q_metric(s)


def test_q_norm_of_eigenvector_is_one(rng):
    h = sc.random_diagonalizable(rng, 4, 50)
    s = sc.decompose(h)
    q = sc.build_q_metric(s)
    for j in range(4):
        assert q.norm_sq(s.p[:, j]) == pytest.approx(1.0, abs=1e-12)


def test_h_eff_keeps_subset_a(rng):
    lam = np.array([0.3 + 0.5j, -1.0 + 0.5j, 2.0 - 1j, 0.1 - 2j])
    h = sc.random_diagonalizable(rng, 4, 50, lam)
    s = sc.decompose(h)
    q = sc.build_q_metric(s)
    a = sc.select_subset_a(s.eigenvalues)
    assert list(a) == [0, 1]
    h_eff = sc.build_h_eff(s, a, q)
    w = np.sort(np.linalg.eigvals(h_eff).real)
    assert np.allclose(w, np.sort([0, 0, 0.3, -1.0]), atol=1e-9)


def test_empty_subset():
    s = sc.decompose(np.diag([1.0 + 0j, 2.0]))
    with pytest.raises(EmptySubset):
        sc.build_h_eff(s, [])


def test_metric_inner_equals_factor_route(rng):
    h = sc.random_diagonalizable(rng, 5, 1e2)
    q = sc.build_q_metric(sc.decompose(h))
    x = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    assert q.inner(x, x).real == pytest.approx(q.norm_sq(x), rel=1e-10)
    assert np.allclose(sla.cholesky(q.q_matrix, lower=True) @ sla.cholesky(q.q_matrix, lower=True).conj().T, q.q_matrix)
