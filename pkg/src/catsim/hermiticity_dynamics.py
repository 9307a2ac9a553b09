"""Time development under a non-Hermitian Hamiltonian and the automatic
hermiticity mechanism.

All propagation is spectral, ``P exp(-i D dt / hbar) P^-1``.  Finite
differences appear only in residual checks.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridTooCoarse, PropagationOverflow, ZeroProjection, ZeroState
from .spectral_core import ETA_A, SpectralData, select_subset_a, split_q_parts

LOG_OVERFLOW = np.log(1e300)


@dataclass(frozen=True)
class EvolvingState:
    """State ``exp(log_scale) * vector`` at ``time``."""

    vector: np.ndarray
    time: float = 0.0
    basis: SpectralData | None = None
    log_scale: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=complex)
        if not np.all(np.isfinite(v)):
            raise ValueError("state has non-finite entries")
        object.__setattr__(self, "vector", v)

    def full_vector(self):
        return np.exp(self.log_scale) * self.vector


def _exponents(eigenvalues, dt, hbar):
    return -1j * eigenvalues * dt / hbar


def propagate(state, h, dt, hbar=1.0, renormalize=False):
    """Evolve ``state`` by ``dt`` under ``H = P D P^-1``.

    With ``renormalize=True`` the largest growth factor is moved into
    ``log_scale`` instead of raising :class:`PropagationOverflow`.
    """
    ex = _exponents(h.eigenvalues, dt, hbar)
    coeffs = h.p_inverse @ state.vector
    live = np.abs(coeffs) > 0
    grow = ex.real[live].max() if live.any() else 0.0
    shift = 0.0
    if renormalize:
        shift = grow
    elif grow > LOG_OVERFLOW:
        raise PropagationOverflow(
            f"growth exp({grow:.1f}) exceeds 1e300; renormalize the trajectory"
        )
    v = h.p @ (np.exp(ex - shift) * coeffs)
    return EvolvingState(v, state.time + dt, h, state.log_scale + shift)


def q_norm_sq(vector, q):
    return q.norm_sq(np.asarray(vector, dtype=complex))


def normalize_q(state, q):
    """Rescale so that ``<psi|Q|psi> = 1``."""
    n2 = q_norm_sq(state.vector, q)
    if not np.any(state.vector) or not n2 > 0:
        raise ZeroState("cannot normalize the zero state")
    return EvolvingState(state.vector / np.sqrt(n2), state.time, state.basis, 0.0)


@dataclass(frozen=True)
class Trajectory:
    """Exact trajectory ``psi(t) = P exp(-i D (t - t0)/hbar) P^-1 psi0``.

    Evaluated in eigen-coordinates ``c(t)``; because ``Q`` makes the
    eigenvectors orthonormal, Q-norms are plain 2-norms of ``c``.
    """

    h: SpectralData
    psi0: np.ndarray
    t0: float = 0.0
    hbar: float = 1.0
    c0: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        psi0 = np.asarray(self.psi0, dtype=complex)
        object.__setattr__(self, "psi0", psi0)
        object.__setattr__(self, "c0", self.h.p_inverse @ psi0)

    def coeffs(self, t):
        """Return ``(c, log_scale)`` with ``c_true = exp(log_scale) * c``."""
        ex = _exponents(self.h.eigenvalues, t - self.t0, self.hbar)
        live = np.abs(self.c0) > 0
        shift = ex.real[live].max() if live.any() else 0.0
        return self.c0 * np.exp(ex - shift), shift

    def state(self, t):
        c, shift = self.coeffs(t)
        return EvolvingState(self.h.p @ c, t, self.h, shift)

    def log_q_norm(self, t):
        c, shift = self.coeffs(t)
        return float(np.log(np.linalg.norm(c)) + shift)

    def normalized(self, t):
        """``psi_N(t)`` in the original basis."""
        c, _ = self.coeffs(t)
        return self.h.p @ (c / np.linalg.norm(c))

    def normalized_coeffs(self, t):
        c, _ = self.coeffs(t)
        return c / np.linalg.norm(c)


def _check_grid(h, dt_fd, hbar, limit=0.1):
    w = np.abs(h.eigenvalues).max() * abs(dt_fd) / hbar
    if w > limit:
        raise GridTooCoarse(f"max|lambda| dt_fd / hbar = {w:.3g} > {limit}")


def modified_schrodinger_residual(trajectory, times, q, split, dt_fd, hbar=None):
    """Residual of ``i hbar d psi_N = H_Qh psi_N + (H_Qa - <H_Qa>) psi_N``.

    The time derivative is a centred difference with step ``dt_fd`` on the
    exact normalized trajectory.
    """
    hbar = trajectory.hbar if hbar is None else hbar
    _check_grid(trajectory.h, dt_fd, hbar)
    out = []
    for t in np.atleast_1d(times):
        psi = trajectory.normalized(t)
        dpsi = (trajectory.normalized(t + dt_fd) - trajectory.normalized(t - dt_fd)) / (
            2 * dt_fd
        )
        qa_psi = split.h_qa @ psi
        mean = q.inner(psi, qa_psi)
        rhs = split.h_qh @ psi + qa_psi - mean * psi
        out.append(np.linalg.norm(1j * hbar * dpsi - rhs))
    return np.array(out)


def heff_schrodinger_residual(trajectory, times, h_eff, dt_fd):
    """Residual of ``i hbar d psi_N = H_eff psi_N`` on the normalized trajectory."""
    hbar = trajectory.hbar
    _check_grid(trajectory.h, dt_fd, hbar)
    out = []
    for t in np.atleast_1d(times):
        psi = trajectory.normalized(t)
        dpsi = (trajectory.normalized(t + dt_fd) - trajectory.normalized(t - dt_fd)) / (
            2 * dt_fd
        )
        out.append(np.linalg.norm(1j * hbar * dpsi - h_eff @ psi))
    return np.array(out)


def heff_remainder_bound(trajectory, times, subset_a):
    """Bound on the non-finite-difference part of :func:`heff_schrodinger_residual`.

    With ``c`` the normalized eigen-coordinates and ``B = max Im(lambda)``,
    ``i hbar dc_i = (lambda_i - i <Im>) c_i``.  Subset-A rows carry the factor
    ``B - <Im>``; the others are bounded by ``|lambda_i - i <Im>| |c_i|``.
    Both are proportional to the leakage and hence to ``exp(-gap t / hbar)``.
    """
    h = trajectory.h
    lam = h.eigenvalues
    mask = np.zeros(h.dim, dtype=bool)
    mask[np.asarray(subset_a)] = True
    bmax = lam.imag.max()
    pnorm = np.linalg.norm(h.p, 2)
    out = []
    for t in np.atleast_1d(times):
        c = trajectory.normalized_coeffs(t)
        w = np.abs(c) ** 2
        mean_im = float(np.dot(w, lam.imag))
        outside = np.linalg.norm((lam[~mask] - 1j * mean_im) * c[~mask])
        inside = (bmax - mean_im) * np.linalg.norm(c[mask])
        out.append(pnorm * (outside + inside))
    return np.array(out)


def heisenberg_picture_op(o, h, q, t, t0, norms, hbar=1.0):
    """``(n0/n) exp(i H^dagQ tau / hbar) O exp(-i H tau / hbar)``, ``tau = t - t0``.

    ``norms = (n0, n)`` are the squared Q-norms of the state at ``t0`` and ``t``.
    ``exp(i H^dagQ tau)`` equals ``P exp(i D* tau) P^-1``.
    """
    n0, n = norms
    if not (n0 > 0 and n > 0):
        raise ValueError("norms must be strictly positive")
    tau = t - t0
    lam = h.eigenvalues
    left = 1j * lam.conj() * tau / hbar
    right = -1j * lam * tau / hbar
    if max(left.real.max(), right.real.max()) > LOG_OVERFLOW:
        raise PropagationOverflow("Heisenberg-picture factor overflows")
    o_t = h.p_inverse @ np.asarray(o, dtype=complex) @ h.p
    core = np.exp(left)[:, None] * o_t * np.exp(right)[None, :]
    return (n0 / n) * (h.p @ core @ h.p_inverse)


def modified_heisenberg_residual(o, trajectory, times, q, split, dt_fd):
    """Residual of ``i hbar dO_QH = [O_QH, H_Qh] + {O_QH, H_Qa - <H_Qa>}``."""
    hbar = trajectory.hbar
    t0 = trajectory.t0
    n0 = q_norm_sq(trajectory.psi0, q)
    h = trajectory.h

    def o_qh(t):
        n = np.exp(2 * trajectory.log_q_norm(t))
        return heisenberg_picture_op(o, h, q, t, t0, (n0, n), hbar)

    out = []
    for t in np.atleast_1d(times):
        op = o_qh(t)
        dop = (o_qh(t + dt_fd) - o_qh(t - dt_fd)) / (2 * dt_fd)
        psi = trajectory.normalized(t)
        mean = q.inner(psi, split.h_qa @ psi)
        ha = split.h_qa - mean * np.eye(h.dim)
        rhs = op @ split.h_qh - split.h_qh @ op + op @ ha + ha @ op
        scale = max(np.linalg.norm(op), 1.0)
        out.append(np.linalg.norm(1j * hbar * dop - rhs) / scale)
    return np.array(out)


@dataclass(frozen=True)
class EvolutionReport:
    """Suppression diagnostics on a time grid.

    ``overlap_defect`` is the Q-norm of the non-subset-A part of ``psi_N``;
    ``renormalized_defect`` compares ``psi_N`` with the separately normalized
    subset-A projection.
    """

    times: np.ndarray
    overlap_defect: np.ndarray
    renormalized_defect: np.ndarray
    schrodinger_residual: np.ndarray
    heisenberg_residual: np.ndarray
    q_norm_log: np.ndarray
    gap: float
    subset_a: np.ndarray
    t1: float
    bound_satisfied: bool
    slope: float = float("nan")

    def rows(self):
        for i, t in enumerate(self.times):
            yield (
                t,
                self.overlap_defect[i],
                self.schrodinger_residual[i],
                self.heisenberg_residual[i],
                self.q_norm_log[i],
            )


def im_gap(eigenvalues, eta=ETA_A):
    """``B - max{Im(lambda_i) : i not in A}``; ``inf`` if A is everything."""
    im = np.asarray(eigenvalues).imag
    a = select_subset_a(eigenvalues, eta)
    rest = np.setdiff1d(np.arange(im.size), a)
    if rest.size == 0:
        return np.inf
    return float(im.max() - im[rest].max())


def defects_from_coeffs(c, subset_a):
    """Return ``(||psi_N - P_A psi_N||_Q, ||psi_N - psi~_N||_Q)`` for coordinates ``c``."""
    c = c / np.linalg.norm(c)
    mask = np.zeros(c.size, dtype=bool)
    mask[np.asarray(subset_a)] = True
    out_norm = np.linalg.norm(c[~mask])
    in_norm = np.linalg.norm(c[mask])
    if in_norm == 0:
        return out_norm, np.sqrt(2.0)
    ren = np.sqrt(out_norm**2 + (1 - 1 / in_norm) ** 2 * in_norm**2)
    return float(out_norm), float(ren)


def log_slope(times, values):
    """Least-squares slope of ``log(values)`` against ``times``."""
    t = np.asarray(times, dtype=float)
    y = np.log(np.asarray(values, dtype=float))
    return float(np.polyfit(t, y, 1)[0])


def verify_suppression(
    h,
    q,
    psi0,
    t_grid,
    hbar=1.0,
    eta=ETA_A,
    slack=0.05,
    dt_fd=1e-4,
    observable=None,
    t0=None,
):
    """Track how components outside subset A die out relative to subset A.

    Raises
    ------
    ZeroProjection
        If ``psi0`` has no subset-A component.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    t0 = t_grid[0] if t0 is None else t0
    traj = Trajectory(h, psi0, t0, hbar)
    a = select_subset_a(h.eigenvalues, eta)
    if np.linalg.norm(traj.c0[a]) <= 1e-14 * np.linalg.norm(traj.c0):
        raise ZeroProjection("initial state has no subset-A component")
    gap = im_gap(h.eigenvalues, eta)
    split = split_q_parts(h.reconstruct(), q, h)
    if observable is None:
        observable = np.zeros((h.dim, h.dim), dtype=complex)
        observable[0, 0] = 1.0
    defect, ren, logn = [], [], []
    for t in t_grid:
        d, r = defects_from_coeffs(traj.normalized_coeffs(t), a)
        defect.append(d)
        ren.append(r)
        logn.append(traj.log_q_norm(t))
    defect = np.array(defect)
    ren = np.array(ren)
    sch = modified_schrodinger_residual(traj, t_grid, q, split, dt_fd)
    hei = modified_heisenberg_residual(observable, traj, t_grid, q, split, dt_fd)
    t1 = t_grid[0]
    ok = True
    slope = float("nan")
    if defect[0] > 0 and np.isfinite(gap):
        below = np.flatnonzero(defect < 0.5 * defect[0])
        if below.size:
            i1 = below[0]
            t1 = t_grid[i1]
            env = defect[i1] * np.exp(-gap * (t_grid[i1:] - t1) / hbar) * (1 + slack)
            ok = bool(np.all(defect[i1:] <= env))
            pos = defect[i1:] > 0
            if pos.sum() >= 2:
                slope = log_slope(t_grid[i1:][pos], defect[i1:][pos])
    return EvolutionReport(
        t_grid, defect, ren, sch, hei, np.array(logn), gap, a, float(t1), ok, slope
    )
