"""Eigendecomposition of non-Hermitian matrices and the Q-metric calculus.

A diagonalizable ``H = P D P^-1`` defines the metric ``Q = (P^dag)^-1 P^-1``
under which the eigenvectors of ``H`` are orthonormal.  ``Q_B = Q^-1`` plays
the same role for ``H^dag``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import (
    DefectiveMatrix,
    DimensionMismatch,
    EmptySubset,
    IllConditioned,
)

SEP_MIN_REL = 1e-8
COND_MAX = 1e8
ETA_A = 1e-9


def as_matrix(h, name="matrix"):
    """Return ``h`` as a square, finite complex128 array."""
    a = np.asarray(h, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


@dataclass(frozen=True)
class SpectralData:
    """Eigenvalues, diagonalizer ``P`` (eigenvectors in columns) and ``P^-1``."""

    eigenvalues: np.ndarray
    p: np.ndarray
    p_inverse: np.ndarray
    cond_p: float

    @property
    def dim(self):
        return self.eigenvalues.shape[0]

    def reconstruct(self):
        return (self.p * self.eigenvalues) @ self.p_inverse


@dataclass(frozen=True)
class Metric:
    """Hermitian positive-definite inner-product matrix ``Q = factor^dag factor``."""

    q_matrix: np.ndarray
    factor: np.ndarray

    @property
    def dim(self):
        return self.q_matrix.shape[0]

    def inner(self, x, y):
        """``<x|Q|y>``."""
        return np.vdot(x, self.q_matrix @ y)

    def norm_sq(self, x):
        fx = self.factor @ x
        return float(np.vdot(fx, fx).real)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Q-Hermitian and anti-Q-Hermitian parts of ``H``."""

    h_qh: np.ndarray
    h_qa: np.ndarray
    d_r: np.ndarray
    d_i: np.ndarray
    crosscheck_residual: float


def sort_order(eigenvalues):
    """Indices sorting by descending Im, ties by descending Re."""
    w = np.asarray(eigenvalues)
    return np.lexsort((-w.real, -w.imag))


def min_separation(eigenvalues):
    w = np.asarray(eigenvalues)
    if w.size < 2:
        return np.inf
    d = np.abs(w[:, None] - w[None, :])
    d[np.diag_indices_from(d)] = np.inf
    return float(d.min())


def decompose(h, sep_min=None, cond_max=COND_MAX):
    """Diagonalize ``h`` as ``P diag(lambda) P^-1``.

    Parameters
    ----------
    h : (n, n) array_like
    sep_min : float, optional
        Minimum allowed eigenvalue separation.  Defaults to ``1e-8 * ||h||_2``.
    cond_max : float
        Largest allowed 2-norm condition number of ``P``.

    Raises
    ------
    DefectiveMatrix
        If two eigenvalues are closer than ``sep_min`` or ``cond(P) > cond_max``.
    """
    a = as_matrix(h, "h")
    if sep_min is None:
        sep_min = SEP_MIN_REL * np.linalg.norm(a, 2)
    w, v = sla.eig(a)
    order = sort_order(w)
    w = w[order]
    v = v[:, order]
    sep = min_separation(w)
    if sep < sep_min:
        raise DefectiveMatrix(
            f"eigenvalue separation {sep:.3e} below sep_min {sep_min:.3e}"
        )
    cond = float(np.linalg.cond(v))
    if not np.isfinite(cond) or cond > cond_max:
        raise DefectiveMatrix(f"cond(P) = {cond:.3e} exceeds cond_max {cond_max:.1e}")
    return SpectralData(w, v, np.linalg.inv(v), cond)


def _check_positive(qm):
    try:
        sla.cholesky(qm, lower=True)
    except sla.LinAlgError as exc:
        raise IllConditioned("metric is not numerically positive definite") from exc


def _hermitize(m):
    return 0.5 * (m + m.conj().T)


def build_q_metric(s):
    """``Q = (P^dag)^-1 P^-1`` with factor ``P^-1``."""
    f = s.p_inverse
    qm = _hermitize(f.conj().T @ f)
    _check_positive(qm)
    return Metric(qm, f.copy())


def build_qb_metric(q, tol=1e-9):
    """``Q_B = Q^-1``.

    With ``Q = F^dag F`` the inverse factors as ``Q_B = G^dag G``, ``G = (F^-1)^dag``.
    The columns of ``F^dag`` (which equals ``Q P`` when ``F = P^-1``) are
    checked to be ``Q_B``-orthonormal.
    """
    g = np.linalg.inv(q.factor).conj().T
    qb = _hermitize(g.conj().T @ g)
    _check_positive(qb)
    pb = q.factor.conj().T
    gram = pb.conj().T @ qb @ pb
    cond = np.linalg.cond(q.factor)
    err = np.abs(gram - np.eye(q.dim)).max()
    if err > tol * cond**2:
        raise IllConditioned(f"Q_B orthonormality check failed ({err:.2e})")
    return Metric(qb, g)


def _check_dims(a, q):
    if a.shape != q.q_matrix.shape:
        raise DimensionMismatch(f"operator {a.shape} vs metric {q.q_matrix.shape}")


def q_dagger(a, q):
    """Q-Hermitian conjugate ``Q^-1 A^dag Q``.

    Evaluated as ``F^-1 (F A F^-1)^dag F`` for ``Q = F^dag F``, which avoids
    forming ``Q`` and ``Q^-1`` explicitly.
    """
    a = np.asarray(a, dtype=complex)
    _check_dims(a, q)
    f = q.factor
    faf = np.linalg.solve(f.T, (f @ a).T).T  # F A F^-1
    return np.linalg.solve(f, faf.conj().T @ f)


def split_q_parts(h, q, spectral=None):
    """Split ``H`` into ``(H + H^dagQ)/2`` and ``(H - H^dagQ)/2``.

    The result is cross-checked against ``P D_R P^-1`` and ``i P D_I P^-1``.
    """
    h = as_matrix(h, "h")
    s = decompose(h) if spectral is None else spectral
    hd = q_dagger(h, q)
    h_qh = 0.5 * (h + hd)
    h_qa = 0.5 * (h - hd)
    d_r = s.eigenvalues.real.copy()
    d_i = s.eigenvalues.imag.copy()
    qh_ref = (s.p * d_r) @ s.p_inverse
    qa_ref = 1j * (s.p * d_i) @ s.p_inverse
    scale = max(np.linalg.norm(h), np.finfo(float).tiny)
    resid = max(np.linalg.norm(h_qh - qh_ref), np.linalg.norm(h_qa - qa_ref)) / scale
    return SpectralDecomposition(h_qh, h_qa, d_r, d_i, float(resid))


def q_normality_residual(h, q):
    """``||H H^dagQ - H^dagQ H||_F / ||H||_F^2``."""
    h = as_matrix(h, "h")
    _check_dims(h, q)
    nrm = np.linalg.norm(h)
    if nrm == 0:
        return 0.0
    hd = q_dagger(h, q)
    return float(np.linalg.norm(h @ hd - hd @ h) / nrm**2)


def select_subset_a(eigenvalues, eta=ETA_A):
    """Indices with ``Im(lambda)`` within ``eta`` of the maximum."""
    im = np.asarray(eigenvalues).imag
    return np.flatnonzero(im >= im.max() - eta)


def build_h_eff(s, subset_a=None, q=None, eta=ETA_A):
    """``H_eff = P D~_R P^-1`` keeping ``Re(lambda_i)`` for ``i`` in subset A.

    If ``q`` is given the Q-hermiticity of the result is asserted.
    """
    if subset_a is None:
        subset_a = select_subset_a(s.eigenvalues, eta)
    idx = np.asarray(subset_a, dtype=int).ravel()
    if idx.size == 0:
        raise EmptySubset("subset A is empty")
    d = np.zeros(s.dim)
    d[idx] = s.eigenvalues[idx].real
    h_eff = (s.p * d) @ s.p_inverse
    if q is not None:
        nrm = np.linalg.norm(h_eff)
        dev = np.linalg.norm(h_eff - q_dagger(h_eff, q))
        if nrm > 0 and dev > 1e-10 * s.cond_p**2 * nrm:
            raise IllConditioned(f"H_eff is not Q-Hermitian ({dev / nrm:.2e})")
    return h_eff


def biorthogonality_error(s, q):
    """``max |<lambda_i|Q|lambda_j> - delta_ij|``."""
    g = s.p.conj().T @ q.q_matrix @ s.p
    return float(np.abs(g - np.eye(s.dim)).max())


def completeness_error(s, q):
    """``||sum_i |lambda_i><lambda_i|Q - 1||_F``."""
    m = s.p @ (s.p.conj().T @ q.q_matrix)
    return float(np.linalg.norm(m - np.eye(s.dim)))


def hb_eigen_residual(h, s, q):
    """Largest ``||H^dag (Q v_j) - conj(lambda_j) Q v_j||`` over unit-normalized ``Q v_j``."""
    h = as_matrix(h, "h")
    vb = q.q_matrix @ s.p
    vb = vb / np.linalg.norm(vb, axis=0)
    r = h.conj().T @ vb - vb * s.eigenvalues.conj()
    return float(np.linalg.norm(r, axis=0).max())


def random_diagonalizable(rng, dim, cond_max=1e4, eigenvalues=None, max_tries=100):
    """Draw ``P D P^-1`` with complex-normal ``P`` of condition number ``<= cond_max``."""
    for _ in range(max_tries):
        p = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        if np.linalg.cond(p) <= cond_max:
            break
    else:
        raise RuntimeError("could not draw a well-conditioned diagonalizer")
    if eigenvalues is None:
        eigenvalues = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return (p * np.asarray(eigenvalues)) @ np.linalg.inv(p)
