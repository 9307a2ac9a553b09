"""Future-included expectation values with initial and final boundary states.

``|A(t)> = exp(-i H (t - T_A)) |A(T_A)>`` and
``|B(t)> = exp(-i H^dag (t - T_B)) |B(T_B)>``; the expectation value is the
ratio ``<B(t)|O|A(t)> / <B(t)|A(t)>``.

Everything is evaluated in eigen-coordinates: ``alpha = P^-1 A`` evolves with
``exp(-i lambda (t - T_A))`` and ``beta = P^dag B`` (the coefficients of ``B``
in the basis ``|lambda_i>_B = Q |lambda_i>``) with
``exp(-i conj(lambda) (t - T_B))``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .contour_calculus import contour_integrate_vector
from .errors import (
    DegenerateOverlap,
    DegenerateReSpectrum,
    GridTooCoarse,
    PropagationOverflow,
    TruncationOverflow,
    ZeroCoefficientWarning,
)
from .fock_model import (
    build_hamiltonian,
    build_operators,
    derivative_matrices,
    potential_derivative,
)
from .hermiticity_dynamics import LOG_OVERFLOW, log_slope
from .spectral_core import ETA_A, SpectralData, build_q_metric, decompose, select_subset_a

DENOM_FLOOR = 1e-12


@dataclass(frozen=True)
class BoundaryPair:
    a_initial: np.ndarray
    b_final: np.ndarray
    t_a: float
    t_b: float
    h: SpectralData
    metric: object = None
    hbar: float = 1.0
    denom_floor: float = DENOM_FLOOR
    alpha: np.ndarray = field(init=False, repr=False)
    beta: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        a = np.asarray(self.a_initial, dtype=complex)
        b = np.asarray(self.b_final, dtype=complex)
        if not self.t_a < self.t_b:
            raise ValueError("need t_a < t_b")
        if not (np.any(a) and np.any(b)):
            raise ValueError("boundary vectors must be nonzero")
        object.__setattr__(self, "a_initial", a)
        object.__setattr__(self, "b_final", b)
        if self.metric is None:
            object.__setattr__(self, "metric", build_q_metric(self.h))
        object.__setattr__(self, "alpha", self.h.p_inverse @ a)
        object.__setattr__(self, "beta", self.h.p.conj().T @ b)
        for t in np.linspace(self.t_a, self.t_b, 5):
            overlap_ba(self, t)

    @property
    def lam(self):
        return self.h.eigenvalues


def _phase(lam, dt, hbar):
    return -1j * lam * dt / hbar


def coeffs_a(bp, t, shift=True):
    """Eigen-coordinates of ``A(t)`` and the log-scale removed from them."""
    ex = _phase(bp.lam, t - bp.t_a, bp.hbar)
    s = ex.real.max() if shift else 0.0
    if not shift and s > LOG_OVERFLOW:
        raise PropagationOverflow("A-state growth overflows")
    return bp.alpha * np.exp(ex - s), s


def coeffs_b(bp, t, shift=True):
    """Coefficients ``b_i(t)`` of ``B(t)`` in the ``|lambda_i>_B`` basis."""
    ex = _phase(bp.lam.conj(), t - bp.t_b, bp.hbar)
    s = ex.real.max() if shift else 0.0
    if not shift and s > LOG_OVERFLOW:
        raise PropagationOverflow("B-state growth overflows")
    return bp.beta * np.exp(ex - s), s


def evolve_a(bp, t):
    c, _ = coeffs_a(bp, t, shift=False)
    return bp.h.p @ c


def evolve_b(bp, t):
    c, _ = coeffs_b(bp, t, shift=False)
    return np.linalg.solve(bp.h.p.conj().T, c)


def overlap_ba(bp, t, scaled=False):
    """``<B(t)|A(t)>`` (or the rescaled value used in ratios when ``scaled``)."""
    ca, sa = coeffs_a(bp, t)
    cb, sb = coeffs_b(bp, t)
    val = np.vdot(cb, ca)
    floor = bp.denom_floor * np.linalg.norm(cb) * np.linalg.norm(ca)
    if abs(val) <= floor:
        raise DegenerateOverlap(f"|<B|A>| = {abs(val):.3e} at t = {t}")
    return val if scaled else val * np.exp(sa + sb)


def _o_tilde(bp, o):
    return bp.h.p_inverse @ np.asarray(o, dtype=complex) @ bp.h.p


def expectation_ba(bp, o, t):
    """``<B(t)|O|A(t)> / <B(t)|A(t)>``."""
    ca, _ = coeffs_a(bp, t)
    cb, _ = coeffs_b(bp, t)
    den = np.vdot(cb, ca)
    if abs(den) <= bp.denom_floor * np.linalg.norm(cb) * np.linalg.norm(ca):
        raise DegenerateOverlap(f"|<B|A>| too small at t = {t}")
    return complex(np.vdot(cb, _o_tilde(bp, o) @ ca) / den)


def expectation_ba_derivative(bp, o, t):
    """Analytic ``d/dt <O>^BA`` from eigen-coordinates.

    The numerator is ``sum_ij conj(b_i(t)) O~_ij a_j(t)`` with phases
    ``exp(i (lambda_i - lambda_j) t / hbar)``; the denominator is constant.
    """
    ca, _ = coeffs_a(bp, t)
    cb, _ = coeffs_b(bp, t)
    den = np.vdot(cb, ca)
    ot = _o_tilde(bp, o)
    lam = bp.lam
    rate = 1j * (lam[:, None] - lam[None, :]) / bp.hbar
    return complex(np.sum(cb.conj()[:, None] * rate * ot * ca[None, :]) / den)


def commutator_expectation(bp, o, t, h_matrix=None):
    """``<(i/hbar) [H, O]>^BA`` evaluated with the matrix ``H``."""
    h = bp.h.reconstruct() if h_matrix is None else h_matrix
    o = np.asarray(o, dtype=complex)
    return expectation_ba(bp, 1j / bp.hbar * (h @ o - o @ h), t)


def layer_identity_residual(bp, o, t, h_matrix=None):
    """``|d/dt <O>^BA - <(i/hbar)[H,O]>^BA|`` relative to ``max(1, |rhs|)``."""
    lhs = expectation_ba_derivative(bp, o, t)
    rhs = commutator_expectation(bp, o, t, h_matrix)
    return abs(lhs - rhs) / max(1.0, abs(rhs))


def heisenberg_op_tref(o, h, t, t_ref, hbar=1.0):
    """``exp(i H (t - t_ref)/hbar) O exp(-i H (t - t_ref)/hbar)``."""
    tau = t - t_ref
    lam = h.eigenvalues
    left = 1j * lam * tau / hbar
    if max(left.real.max(), (-left).real.max()) > LOG_OVERFLOW:
        raise PropagationOverflow("Heisenberg factor overflows")
    ot = h.p_inverse @ np.asarray(o, dtype=complex) @ h.p
    core = np.exp(left)[:, None] * ot * np.exp(-left)[None, :]
    return h.p @ core @ h.p_inverse


def density_time_derivative_fd(f, t, dt):
    """Richardson-extrapolated centred difference of a scalar function."""
    d1 = (f(t + dt) - f(t - dt)) / (2 * dt)
    d2 = (f(t + dt / 2) - f(t - dt / 2)) / dt
    return (4 * d2 - d1) / 3


def second_derivative_fd(f, t, dt):
    d1 = (f(t + dt) - 2 * f(t) + f(t - dt)) / dt**2
    h = dt / 2
    d2 = (f(t + h) - 2 * f(t) + f(t - h)) / h**2
    return (4 * d2 - d1) / 3


@dataclass(frozen=True)
class EhrenfestResult:
    r1: float
    r2: float
    r3: float
    layer_q: float
    layer_p: float
    dq_dt: complex
    p_over_m: complex
    dp_dt: complex
    minus_vprime: complex


def ehrenfest_check(fs, bp, mass, couplings, t, dt_fd, ops=None):
    """Ehrenfest residuals for ``<q_new>^BA`` and ``<p_new>^BA``.

    ``r1 = |d<q_new>/dt - <p_new>/m|``, ``r2 = |d<p_new>/dt + <V'(q_new)>|`` and
    ``r3 = |m d^2<q_new>/dt^2 + <V'(q_new)>|``, with Richardson-extrapolated
    centred differences.  ``layer_q`` and ``layer_p`` are the exact
    matrix-level identity residuals for the same operators.
    """
    if t - dt_fd < bp.t_a or t + dt_fd > bp.t_b:
        raise GridTooCoarse("finite-difference stencil leaves [t_a, t_b]")
    ops = build_operators(fs) if ops is None else ops
    mass = complex(mass)
    qn, pn = ops.q_new, ops.p_new
    vp = potential_derivative(fs, couplings, ops)

    def eq(x):
        return expectation_ba(bp, qn, x)

    def ep(x):
        return expectation_ba(bp, pn, x)

    dq = density_time_derivative_fd(eq, t, dt_fd)
    dp = density_time_derivative_fd(ep, t, dt_fd)
    d2q = second_derivative_fd(eq, t, dt_fd)
    p_m = ep(t) / mass
    mvp = -expectation_ba(bp, vp, t)
    h_matrix = build_hamiltonian(fs, mass, couplings, ops)
    return EhrenfestResult(
        r1=abs(dq - p_m),
        r2=abs(dp - mvp),
        r3=abs(mass * d2q - mvp),
        layer_q=layer_identity_residual(bp, qn, t, h_matrix),
        layer_p=layer_identity_residual(bp, pn, t, h_matrix),
        dq_dt=dq,
        p_over_m=p_m,
        dp_dt=dp,
        minus_vprime=mvp,
    )


@dataclass(frozen=True)
class DensityCurrent:
    nodes: np.ndarray
    rho: np.ndarray
    current: np.ndarray
    drho_dt: np.ndarray
    dj_dq: np.ndarray
    residual: np.ndarray


def probability_density_current(fs, bp, nodes, t, mass, h_matrix=None):
    """``rho``, ``j`` and the continuity residual at contour ``nodes``.

    ``rho = <B|q>_new m<q|A> / <B|A>`` and
    ``j = (i hbar / 2m) (dpsi_B psi_A - psi_B dpsi_A) / <B|A>`` with
    ``psi_A = m<q|A>`` and ``psi_B = <B|q>_new``.  ``d rho / dt`` uses
    ``dA/dt = -i H A / hbar`` and ``d<B|/dt = i <B| H / hbar`` exactly.
    """
    hbar = fs.hbar
    h = bp.h.reconstruct() if h_matrix is None else h_matrix
    a = evolve_a(bp, t)
    b = evolve_b(bp, t)
    den = np.vdot(b, a)
    v, dv, d2v = derivative_matrices(fs, nodes)
    psi_a = v @ a
    dpsi_a = dv @ a
    d2psi_a = d2v @ a
    bc = b.conj()
    psi_b = v @ bc
    dpsi_b = dv @ bc
    d2psi_b = d2v @ bc
    rho = psi_b * psi_a / den
    pref = 1j * hbar / (2 * complex(mass))
    cur = pref * (dpsi_b * psi_a - psi_b * dpsi_a) / den
    dj = pref * (d2psi_b * psi_a - psi_b * d2psi_a) / den
    hb_row = v @ (h.T @ bc)  # <B|H|q>
    ha = v @ (h @ a)  # m<q|H|A>
    drho = (1j / hbar) * (hb_row * psi_a - psi_b * ha) / den
    return DensityCurrent(np.asarray(nodes), rho, cur, drho, dj, np.abs(drho + dj))


def density_integral(fs, bp, contour, t, quad_tol=1e-10):
    """``int_C rho dq`` by composite Gauss-Legendre on ``contour``."""
    a = evolve_a(bp, t)
    b = evolve_b(bp, t)
    den = np.vdot(b, a)

    def f(q):
        v, _, _ = derivative_matrices(fs, q)
        return (v @ b.conj()) * (v @ a) / den

    return complex(contour_integrate_vector(contour, f, quad_tol=quad_tol))


def overlap_kernel_integral(fs, contour, quad_tol=1e-12):
    """``int_C v(q) v(q)^T dq`` (the truncated completeness integral)."""

    def f(q):
        v, _, _ = derivative_matrices(fs, q)
        return v[:, :, None] * v[:, None, :]

    return contour_integrate_vector(contour, f, quad_tol=quad_tol)


# -- smearing and Q2 ---------------------------------------------------------


def projector_coeffs_b(bp, s):
    """``C_ij(s) = b_i(s) conj(b_j(s))`` so that ``|B(s)><B(s)| = sum C_ij |l_i>_B <l_j|_B``."""
    cb, _ = coeffs_b(bp, s, shift=False)
    return np.outer(cb, cb.conj())


def basis_b(bp):
    """Columns ``|lambda_i>_B = Q |lambda_i> = (P^dag)^-1 e_i``."""
    return bp.h.p_inverse.conj().T


def smear_projector(bp, t, delta_t, nodes=48, panels=8):
    """``(1 / 2 dt) int_{t-dt}^{t+dt} |B(s)><B(s)| ds`` in the original basis and
    its coefficient matrix in the ``|lambda_i>_B`` basis."""
    if not delta_t > 0:
        raise ValueError("delta_t must be positive")
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(t - delta_t, t + delta_t, panels + 1)
    acc = np.zeros((bp.h.dim, bp.h.dim), dtype=complex)
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        for xi, wi in zip(x, w):
            acc += wi * half * projector_coeffs_b(bp, mid + half * xi)
    coeffs = acc / (2 * delta_t)
    vb = basis_b(bp)
    return vb @ coeffs @ vb.conj().T, coeffs


def smearing_factor(lam_i, lam_j, delta_t, hbar=1.0):
    """Exact ratio (smeared / unsmeared) for the ``(i, j)`` projector coefficient.

    ``C_ij(s) ~ exp(z (s - t))`` with ``z = i (lam_j - conj(lam_i)) / hbar``, so the
    ratio is ``sinh(z dt) / (z dt)``.  It reduces to
    ``sinc(Re(lam_j - lam_i) dt / hbar)`` when ``Im(lam_i + lam_j) = 0``.
    """
    z = (-1j * np.conj(lam_i) + 1j * lam_j) / hbar
    x = z * delta_t
    if x == 0:
        return 1.0 + 0j
    return complex(np.sinh(x) / x)


def sinc_factor(lam_i, lam_j, delta_t, hbar=1.0):
    w = (np.real(lam_j) - np.real(lam_i)) * delta_t / hbar
    return float(np.sinc(w / np.pi))


@dataclass(frozen=True)
class Q2Result:
    q2: np.ndarray
    f_table: dict
    subset_a: np.ndarray


def build_q2(bp, eta=ETA_A, re_tol=1e-9):
    """``Q_2 = sum_{i in A} |b_i|^2 |lambda_i>_B <lambda_i|_B`` with ``b = P^dag B(T_B)``."""
    a = select_subset_a(bp.lam, eta)
    re = bp.lam[a].real
    if re.size > 1:
        d = np.abs(re[:, None] - re[None, :])
        d[np.diag_indices_from(d)] = np.inf
        if d.min() < re_tol:
            raise DegenerateReSpectrum("Re(lambda) is degenerate inside subset A")
    b2 = np.abs(bp.beta[a]) ** 2
    if np.any(b2 == 0):
        warnings.warn("some b_i vanish; F is ill-defined there", ZeroCoefficientWarning)
    vb = basis_b(bp)[:, a]
    q2 = (vb * b2) @ vb.conj().T
    table = {float(r): float(x) for r, x in zip(re, b2)}
    return Q2Result(q2, table, a)


def q_prime_full(bp, f_values):
    """``Q' = (P'^dag)^-1 P'^-1`` for ``P' = P f(D)``; ``f_values`` holds ``f(lambda_i)``."""
    p_prime = bp.h.p * np.asarray(f_values)
    pinv = np.linalg.inv(p_prime)
    return pinv.conj().T @ pinv


def expectation_aa(bp, o, t, q_prime):
    """``<A(t)|Q' O|A(t)> / <A(t)|Q' A(t)>`` (scale of ``A`` cancels)."""
    ca, _ = coeffs_a(bp, t)
    a = bp.h.p @ ca
    o = np.asarray(o, dtype=complex)
    return complex(np.vdot(a, q_prime @ (o @ a)) / np.vdot(a, q_prime @ a))


def expectation_aa_q2(bp, o, t, q2res):
    """``<O>^AA_{Q'}`` with ``Q' = Q_2`` on subset A, evaluated in eigen-coordinates."""
    ca, _ = coeffs_a(bp, t)
    a = q2res.subset_a
    w = np.abs(bp.beta[a]) ** 2
    ot = _o_tilde(bp, o)
    num = np.sum(w * ca[a].conj() * (ot[a, :] @ ca))
    den = np.sum(w * np.abs(ca[a]) ** 2)
    return complex(num / den)


@dataclass(frozen=True)
class CorrespondenceReport:
    t_grid: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    deviation: np.ndarray
    gap_b: float
    gap_a: float
    envelope_b: np.ndarray
    envelope_a: np.ndarray

    def rows(self, t_a, t_b):
        for k, t in enumerate(self.t_grid):
            yield (
                t,
                t_b - t,
                t - t_a,
                self.lhs[k].real,
                self.lhs[k].imag,
                self.rhs[k].real,
                self.rhs[k].imag,
                self.deviation[k],
                self.envelope_b[k],
                self.envelope_a[k],
            )


def support_gap(lam, coeffs, eta=ETA_A, rel=1e-14):
    """Im gap between subset A and the highest other level carrying a nonzero coefficient."""
    a = select_subset_a(lam, eta)
    top = lam.imag.max()
    mask = np.ones(lam.size, dtype=bool)
    mask[a] = False
    mask &= np.abs(coeffs) > rel * np.abs(coeffs).max()
    if not mask.any():
        return np.inf
    return float(top - lam.imag[mask].max())


def correspondence_check(bp, o, t_grid, eta=ETA_A):
    """Compare ``<O>^BA`` with ``<O>^AA_{Q'}``, ``Q' = Q_2``, on ``t_grid``."""
    q2 = build_q2(bp, eta)
    t_grid = np.asarray(t_grid, dtype=float)
    lhs = np.array([expectation_ba(bp, o, t) for t in t_grid])
    rhs = np.array([expectation_aa_q2(bp, o, t, q2) for t in t_grid])
    gap_b = support_gap(bp.lam, bp.beta, eta)
    gap_a = support_gap(bp.lam, bp.alpha, eta)
    env_b = np.exp(-2 * gap_b * (bp.t_b - t_grid) / bp.hbar)
    env_a = np.exp(-gap_a * (t_grid - bp.t_a) / bp.hbar)
    return CorrespondenceReport(
        t_grid, lhs, rhs, np.abs(lhs - rhs), gap_b, gap_a, env_b, env_a
    )


def fitted_rate(x, deviation):
    """Slope of ``log(deviation)`` against ``x`` over points above roundoff."""
    x = np.asarray(x, dtype=float)
    d = np.asarray(deviation, dtype=float)
    keep = d > 0
    return log_slope(x[keep], d[keep])


# -- projector approximation ---------------------------------------------------


def mixture_projector(h, basis, t, t_b, hbar=1.0):
    """``sum_w |B_w(t)><B_w(t)|`` with ``B_w(T_B)`` the columns of ``basis``.

    Returns the trace-normalized matrix.
    """
    lam = h.eigenvalues
    ex = -1j * lam.conj() * (t - t_b) / hbar
    ex = ex - ex.real.max()
    pd = h.p.conj().T
    g = np.exp(ex)[:, None] * (pd @ basis)  # coefficients in |lambda>_B basis
    vb = h.p_inverse.conj().T
    bvec = vb @ g
    rho = bvec @ bvec.conj().T
    return rho / np.trace(rho).real


def projector_distance(rho, n):
    """``||rho - I/n||_F``."""
    return float(np.linalg.norm(rho - np.eye(n) / n))


def projector_drift_prediction(h_matrix, n, hbar=1.0):
    """``d/dt`` of the trace-normalized projector at a time where it equals ``I/n``.

    ``B`` evolves with ``H_B = H^dag``, so ``d|B><B|/dt = -2 i H_B^a / hbar`` at
    ``|B><B| = 1``, with ``H_B^a = (H_B - H_B^dag) / 2``; the trace
    normalization subtracts ``I tr(.) / n``.
    """
    hb = np.asarray(h_matrix).conj().T
    ha = 0.5 * (hb - hb.conj().T)
    d = -2j * ha / hbar
    return (d - np.eye(n) * np.trace(d) / n) / n


def fock_boundary_pair(fs, mass, couplings, a_vec, b_vec, t_a, t_b, sep_min=None):
    """Decompose the Fock Hamiltonian and wrap boundary vectors in a pair."""
    h = build_hamiltonian(fs, mass, couplings)
    s = decompose(h, sep_min=sep_min)
    return BoundaryPair(a_vec, b_vec, t_a, t_b, s, hbar=fs.hbar), h


def interior_supported(fs, vec, k_guard=8, tol=1e-12):
    """True if ``vec`` has negligible weight on the top ``k_guard`` levels."""
    v = np.asarray(vec)
    if np.linalg.norm(v[-k_guard:]) > tol * np.linalg.norm(v):
        raise TruncationOverflow("boundary vector reaches the truncation edge")
    return True
