"""Truncated Fock-space realization of the non-Hermitian coordinate and
momentum operators and their coherent-state eigenkets.

The construction scales ``m_omega`` (``m w``) and ``mp_omegap`` (``m' w'``)
are real regulators.  With ``r = m'w' / (m w)``::

    q_new = (q - i p / (m w)) / sqrt(1 - r)        = sqrt(2 hbar / (m w (1 - r))) a^dag
    p_new = (p + i m'w' q) / sqrt(1 - r)

so ``q_new^dag`` is proportional to ``a`` and its eigenkets are coherent states.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.integrate import trapezoid
from scipy.special import gammaln

from .errors import NonAnalyticConstruction, TruncationOverflow, UnboundedImaginaryWarning

FILL_MAX = 0.25
RATIO_MIN = 100.0
DEG_MAX = 6
K_GUARD = 2


@dataclass(frozen=True)
class FockSpace:
    n_levels: int
    hbar: float = 1.0
    m_omega: float = 100.0
    mp_omegap: float = 0.01
    fill_max: float = FILL_MAX
    ratio_min: float = RATIO_MIN

    def __post_init__(self):
        for name in ("hbar", "m_omega", "mp_omegap"):
            val = getattr(self, name)
            if isinstance(val, complex) or np.iscomplexobj(val):
                raise NonAnalyticConstruction(f"{name} must be real, got {val!r}")
            if not val > 0:
                raise ValueError(f"{name} must be positive")
        if int(self.n_levels) < 2:
            raise ValueError("n_levels must be at least 2")
        object.__setattr__(self, "n_levels", int(self.n_levels))
        if not self.r < 1:
            raise ValueError("m'w' / (m w) must be below 1")
        if self.m_omega / self.mp_omegap < self.ratio_min:
            raise ValueError(
                f"m w / m'w' = {self.m_omega / self.mp_omegap:g} below ratio_min {self.ratio_min:g}"
            )

    @property
    def r(self):
        return self.mp_omegap / self.m_omega

    @property
    def eps1(self):
        """Width parameter of the coordinate-ket overlap, ``hbar / (m w (1 - r))``."""
        return self.hbar / (self.m_omega * (1 - self.r))

    @property
    def eps1_prime(self):
        return self.hbar * self.mp_omegap / (1 - self.r)

    @property
    def alpha(self):
        """Gaussian exponent of the coordinate-ket prefactor."""
        return self.m_omega * (1 - self.r) / (4 * self.hbar)

    @property
    def beta(self):
        """``lambda(q) / q``."""
        return np.sqrt(self.m_omega * (1 - self.r) / (2 * self.hbar))

    def coherent_label(self, q):
        return self.beta * complex(q)

    def momentum_label(self, p):
        """Coherent' label ``i sqrt((1 - r) / (2 hbar m'w')) p``."""
        return 1j * np.sqrt((1 - self.r) / (2 * self.hbar * self.mp_omegap)) * complex(p)

    def fill_ok(self, lam):
        return abs(lam) ** 2 <= self.fill_max * self.n_levels

    def with_levels(self, n):
        return FockSpace(n, self.hbar, self.m_omega, self.mp_omegap, self.fill_max, self.ratio_min)


@dataclass(frozen=True)
class OperatorSet:
    a: np.ndarray
    a_dag: np.ndarray
    q_hat: np.ndarray
    p_hat: np.ndarray
    q_new: np.ndarray
    p_new: np.ndarray

    @property
    def q_new_dag(self):
        return self.q_new.conj().T

    @property
    def p_new_dag(self):
        return self.p_new.conj().T


def annihilation(n):
    """``a[k-1, k] = sqrt(k)``."""
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)


def build_operators(fs):
    hb, mw, r = fs.hbar, fs.m_omega, fs.r
    a = annihilation(fs.n_levels)
    ad = a.conj().T
    q = np.sqrt(hb / (2 * mw)) * (a + ad)
    p = 1j * np.sqrt(hb * mw / 2) * (ad - a)
    s = 1 / np.sqrt(1 - r)
    q_new = s * (q - 1j * p / mw)
    p_new = s * (p - (fs.mp_omegap / 1j) * q)
    return OperatorSet(a, ad, q, p, q_new, p_new)


def interior_commutator_error(fs, ops=None, k_guard=K_GUARD):
    """``max |[q_new, p_new] - i hbar I|`` on levels ``0..N-1-k_guard``."""
    ops = build_operators(fs) if ops is None else ops
    c = ops.q_new @ ops.p_new - ops.p_new @ ops.q_new
    m = fs.n_levels - k_guard
    return float(np.abs(c[:m, :m] - 1j * fs.hbar * np.eye(m)).max())


@dataclass(frozen=True)
class CoordinateKet:
    label: complex
    kind: str
    components: np.ndarray
    space: FockSpace = field(repr=False)


def coordinate_prefactor(fs, q):
    q = complex(q)
    return (fs.m_omega * (1 - fs.r) / (4 * np.pi * fs.hbar)) ** 0.25 * np.exp(-fs.alpha * q * q)


def _coherent_components(lam, n):
    k = np.arange(n)
    if lam == 0:
        out = np.zeros(n, dtype=complex)
        out[0] = 1.0
        return out
    return np.exp(k * np.log(complex(lam)) - 0.5 * gammaln(k + 1))


def coordinate_ket(fs, q, enforce_fill=True):
    """``|q>_new``: prefactor(q) times the coherent state of label ``beta q``.

    Raises
    ------
    TruncationOverflow
        If ``|lambda(q)|^2 > fill_max * N`` and ``enforce_fill`` is set.
    """
    lam = fs.coherent_label(q)
    if enforce_fill and not fs.fill_ok(lam):
        raise TruncationOverflow(
            f"|lambda|^2 = {abs(lam) ** 2:.3g} exceeds {fs.fill_max} * N = {fs.fill_max * fs.n_levels:g}"
        )
    v = coordinate_prefactor(fs, q) * _coherent_components(lam, fs.n_levels)
    return CoordinateKet(complex(q), "coordinate", v, fs)


def coordinate_ket_matrix(fs, qs):
    """Components of ``|q>_new`` for many labels as rows, without the fill gate."""
    qs = np.asarray(qs, dtype=complex).ravel()
    lam = fs.beta * qs
    k = np.arange(fs.n_levels)
    out = np.empty((qs.size, fs.n_levels), dtype=complex)
    nz = lam != 0
    logs = (
        k[None, :] * np.log(np.where(nz, lam, 1.0))[:, None]
        - 0.5 * gammaln(k + 1)[None, :]
    )
    out[:] = np.exp(logs)
    out[~nz] = 0.0
    out[~nz, 0] = 1.0
    pref = (fs.m_omega * (1 - fs.r) / (4 * np.pi * fs.hbar)) ** 0.25 * np.exp(-fs.alpha * qs**2)
    return out * pref[:, None]


def gaussian_packet(fs, sigma, x0=0.0, k0=0.0, grid=4001):
    """Unit-norm Fock components of ``exp(-(x - x0)^2 / (4 sigma^2) + i k0 x)``.

    Projects onto the ``m w`` oscillator eigenfunctions by trapezoid quadrature;
    used as smooth boundary data.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    xi_max = np.sqrt(2.0 * fs.n_levels + 1.0) + 8.0
    half = max(xi_max * np.sqrt(fs.hbar / fs.m_omega), abs(x0) + 12 * sigma)
    x = np.linspace(-half, half, grid)
    xi = np.sqrt(fs.m_omega / fs.hbar) * x
    psi = np.exp(-((x - x0) ** 2) / (4 * sigma**2) + 1j * k0 * x)
    h_prev = (fs.m_omega / (np.pi * fs.hbar)) ** 0.25 * np.exp(-(xi**2) / 2)
    h_cur = np.sqrt(2.0) * xi * h_prev
    out = np.empty(fs.n_levels, dtype=complex)
    out[0] = trapezoid(h_prev * psi, x)
    if fs.n_levels > 1:
        out[1] = trapezoid(h_cur * psi, x)
    for n in range(2, fs.n_levels):
        h_prev, h_cur = h_cur, np.sqrt(2.0 / n) * xi * h_cur - np.sqrt((n - 1) / n) * h_prev
        out[n] = trapezoid(h_cur * psi, x)
    return out / np.linalg.norm(out)


def momentum_constant(fs, p):
    """Overall factor ``A(p)`` of the Fock projections ``<n|p>_new``.

    ``<x|p>_new`` is a plane wave ``exp(i sqrt(1-r) p x / hbar)`` in a wide
    Gaussian envelope of scale ``m'w'``; projecting on the ``m w`` oscillator
    functions gives the generating function ``A exp(alpha t^2 + beta t)``.
    """
    hb, mw, mpw, r = fs.hbar, fs.m_omega, fs.mp_omegap, fs.r
    p = complex(p)
    kappa = np.sqrt(1 - r) * p / np.sqrt(hb * mw)
    c_p = ((1 - r) / (4 * np.pi * hb * mpw)) ** 0.25 * (mpw / (np.pi * hb)) ** 0.25
    return (
        (mw / (np.pi * hb)) ** 0.25
        * c_p
        * np.sqrt(hb / mw)
        * np.sqrt(2 * np.pi / (1 + r))
        * np.exp(-(kappa**2) / (2 * (1 + r)))
    )


def momentum_recurrence(fs, p, n_levels=None):
    """``d_n = <n|p>_new / A(p)`` from ``d_{n+1} = (beta d_n + 2 alpha sqrt(n) d_{n-1}) / sqrt(n+1)``."""
    n = fs.n_levels if n_levels is None else n_levels
    r = fs.r
    kappa = np.sqrt(1 - r) * complex(p) / np.sqrt(fs.hbar * fs.m_omega)
    beta = 1j * np.sqrt(2) * kappa / (1 + r)
    two_alpha = (1 - r) / (1 + r)
    d = np.zeros(n, dtype=complex)
    d[0] = 1.0
    if n > 1:
        d[1] = beta
    for k in range(1, n - 1):
        d[k + 1] = (beta * d[k] + two_alpha * np.sqrt(k) * d[k - 1]) / np.sqrt(k + 1)
    return d


def momentum_components(fs, p):
    return momentum_constant(fs, p) * momentum_recurrence(fs, p)


def momentum_ket(fs, p, enforce_fill=True):
    """``|p>_new`` expanded exactly in the primary Fock basis.

    Raises
    ------
    TruncationOverflow
        If the coherent' label ``lambda'(p)`` fails the fill gate.
    """
    lam = fs.momentum_label(p)
    if enforce_fill and not fs.fill_ok(lam):
        raise TruncationOverflow(
            f"|lambda'|^2 = {abs(lam) ** 2:.3g} exceeds {fs.fill_max} * N = {fs.fill_max * fs.n_levels:g}"
        )
    return CoordinateKet(complex(p), "momentum", momentum_components(fs, p), fs)


def analytic_bra(ket):
    """Modified bra ``m<label| = <label*|`` as a row vector.

    For real construction scales the coordinate-ket components have real
    Taylor coefficients in ``q``, so this is the plain transpose.
    """
    fs = ket.space
    if any(np.iscomplexobj(v) for v in (fs.hbar, fs.m_omega, fs.mp_omegap)):
        raise NonAnalyticConstruction("complex construction scales are not supported")
    if ket.kind == "coordinate":
        return ket.components.copy()
    if ket.kind == "momentum":
        return momentum_components(fs, np.conj(ket.label)).conj()
    raise ValueError(f"unknown ket kind {ket.kind!r}")


def analytic_derivative(fs, ket):
    """Exact ``d/dq`` of the coordinate-ket components.

    ``dv_n = -2 alpha q v_n + beta sqrt(n) v_{n-1}``.
    """
    if ket.kind != "coordinate":
        raise ValueError("analytic_derivative needs a coordinate ket")
    v = ket.components
    out = -2 * fs.alpha * ket.label * v
    out[1:] += fs.beta * np.sqrt(np.arange(1, v.size)) * v[:-1]
    return out


def derivative_matrices(fs, qs):
    """Rows of ``v(q)``, ``dv/dq`` and ``d^2v/dq^2`` for each label in ``qs``."""
    qs = np.asarray(qs, dtype=complex).ravel()
    v = coordinate_ket_matrix(fs, qs)
    sq = np.sqrt(np.arange(1, fs.n_levels))
    a2 = 2 * fs.alpha
    dv = -a2 * qs[:, None] * v
    dv[:, 1:] += fs.beta * sq[None, :] * v[:, :-1]
    d2v = -a2 * v - a2 * qs[:, None] * dv
    d2v[:, 1:] += fs.beta * sq[None, :] * dv[:, :-1]
    return v, dv, d2v


def kernel_continuum(fs, q, p):
    """Closed-form ``m<q|p>_new`` for an untruncated space at the given scales."""
    hb, mw, mpw, r = fs.hbar, fs.m_omega, fs.mp_omegap, fs.r
    q, p = complex(q), complex(p)
    a = mw / (2 * hb)
    b = mpw / (2 * hb)
    c = np.sqrt(1 - r) * q
    k = np.sqrt(1 - r) * p / hb
    n_q = (mw * (1 - r) / (4 * np.pi * hb)) ** 0.25
    c_p = ((1 - r) / (4 * np.pi * hb * mpw)) ** 0.25 * (mpw / (np.pi * hb)) ** 0.25
    integral = np.sqrt(np.pi / (a + b)) * np.exp((2 * a * c + 1j * k) ** 2 / (4 * (a + b)) - a * c * c)
    return n_q * (mw / (np.pi * hb)) ** 0.25 * c_p * integral


def fourier_target(fs, q, p):
    return np.exp(1j * complex(p) * complex(q) / fs.hbar) / np.sqrt(2 * np.pi * fs.hbar)


def fourier_kernel(fs, q, p):
    qk = coordinate_ket(fs, q)
    pk = momentum_ket(fs, p)
    return complex(analytic_bra(qk) @ pk.components)


# -- truncation residuals ----------------------------------------------------


def _tridiag_apply(v, lower, upper, diag=None):
    """``(M v)_n = lower_n v_{n-1} + upper_n v_{n+1}`` for list-like ``v``."""
    n = len(v)
    out = []
    for k in range(n):
        s = 0 if diag is None else diag[k] * v[k]
        if k > 0:
            s = s + lower[k] * v[k - 1]
        if k < n - 1:
            s = s + upper[k] * v[k + 1]
        out.append(s)
    return out


def _qhat_phat_mp(fs, dps):
    """Lower/upper band coefficients of ``q_new^dag`` built from ``q^`` and ``p^``."""
    mp = mpmath.mp
    n = fs.n_levels
    hb = mpmath.mpf(fs.hbar)
    mw = mpmath.mpf(fs.m_omega)
    r = mpmath.mpf(fs.mp_omegap) / mw
    cq = mpmath.sqrt(hb / (2 * mw))
    cp = mpmath.sqrt(hb * mw / 2)
    s = 1 / mpmath.sqrt(1 - r)
    sq = [mpmath.sqrt(k) for k in range(n + 1)]
    # q^ v: lower sqrt(k), upper sqrt(k+1); p^ v: i cp (sqrt(k) v_{k-1} - sqrt(k+1) v_{k+1})
    q_low = [cq * sq[k] for k in range(n)]
    q_up = [cq * sq[k + 1] for k in range(n)]
    p_low = [1j * cp * sq[k] for k in range(n)]
    p_up = [-1j * cp * sq[k + 1] for k in range(n)]
    return mp, q_low, q_up, p_low, p_up, s, mw, r


def coordinate_ket_residual(fs, q, dps=None, enforce_fill=True):
    """``||q_new^dag |q> - q |q>|| / |||q>||``.

    ``q_new^dag = (q^ + i p^ / (m w)) / sqrt(1 - r)`` is applied band by band.
    With ``dps`` set the whole computation runs in ``mpmath`` at that many
    digits, so the truncation tail is resolved below double-precision roundoff.
    """
    lam = fs.coherent_label(q)
    if enforce_fill and not fs.fill_ok(lam):
        raise TruncationOverflow(f"|lambda|^2 = {abs(lam) ** 2:.3g} fails the fill gate")
    if dps is None:
        ops = build_operators(fs)
        v = coordinate_ket(fs, q, enforce_fill=False).components
        res = ops.q_new_dag @ v - complex(q) * v
        return float(np.linalg.norm(res) / np.linalg.norm(v))
    with mpmath.workdps(dps):
        _, q_low, q_up, p_low, p_up, s, mw, r = _qhat_phat_mp(fs, dps)
        qq = mpmath.mpc(q)
        hb = mpmath.mpf(fs.hbar)
        lam_mp = mpmath.sqrt(mw * (1 - r) / (2 * hb)) * qq
        pref = (mw * (1 - r) / (4 * mpmath.pi * hb)) ** mpmath.mpf(0.25) * mpmath.exp(
            -(mw * (1 - r) / (4 * hb)) * qq**2
        )
        v = [pref * lam_mp**k / mpmath.sqrt(mpmath.factorial(k)) for k in range(fs.n_levels)]
        qv = _tridiag_apply(v, q_low, q_up)
        pv = _tridiag_apply(v, p_low, p_up)
        res = [s * (qv[k] + 1j * pv[k] / mw) - qq * v[k] for k in range(fs.n_levels)]
        num = mpmath.sqrt(mpmath.fsum(abs(x) ** 2 for x in res))
        den = mpmath.sqrt(mpmath.fsum(abs(x) ** 2 for x in v))
        return float(num / den)


def derivative_relation_residual(fs, ket, ops=None, k_guard=K_GUARD, exact=False):
    """``max |(p_new^dag v - i hbar dv/dq)_n|`` over interior levels, relative to ``max|v|``.

    The leading-order relation misses a term ``-i m'w' q v`` of relative size
    ``m'w' |q|``; ``exact=True`` includes it, leaving only rounding.
    """
    ops = build_operators(fs) if ops is None else ops
    v = ket.components
    lhs = ops.p_new_dag @ v
    rhs = 1j * fs.hbar * analytic_derivative(fs, ket)
    if exact:
        rhs = rhs - 1j * fs.mp_omegap * complex(ket.label) * v
    m = fs.n_levels - k_guard
    return float(np.abs(lhs[:m] - rhs[:m]).max() / np.abs(v).max())


def momentum_ket_residual(fs, ket, ops=None, k_guard=K_GUARD):
    """``||(p_new^dag w - p w)[interior]|| / ||w[interior]||``."""
    ops = build_operators(fs) if ops is None else ops
    w = ket.components
    res = ops.p_new_dag @ w - ket.label * w
    m = fs.n_levels - k_guard
    return float(np.linalg.norm(res[:m]) / np.linalg.norm(w[:m]))


def delta_overlap(fs, q1, q2):
    """``m<q1|q2>_new``."""
    return complex(analytic_bra(coordinate_ket(fs, q1)) @ coordinate_ket(fs, q2).components)


# -- Hamiltonians ------------------------------------------------------------


def _check_params(mass, couplings, deg_max):
    mass = complex(mass)
    if mass == 0:
        raise ValueError("mass must be nonzero")
    if mass.imag < 0:
        raise ValueError("Im(mass) must be nonnegative")
    couplings = [complex(b) for b in couplings]
    if len(couplings) + 1 > deg_max:
        raise ValueError(f"polynomial degree {len(couplings) + 1} exceeds deg_max {deg_max}")
    return mass, couplings


def _poly(x, couplings):
    """``sum_n b_n x^n`` with ``couplings[0] = b_2``."""
    out = np.zeros_like(x)
    power = x @ x
    for b in couplings:
        if b != 0:
            out = out + b * power
        power = power @ x
    return out


def build_hamiltonian(fs, mass, couplings, ops=None, deg_max=DEG_MAX):
    """``p_new^2 / (2 m) + sum_{n>=2} b_n q_new^n`` with ``couplings = [b_2, b_3, ...]``."""
    mass, couplings = _check_params(mass, couplings, deg_max)
    ops = build_operators(fs) if ops is None else ops
    return ops.p_new @ ops.p_new / (2 * mass) + _poly(ops.q_new, couplings)


def potential_derivative(fs, couplings, ops=None):
    """``V'(q_new) = sum n b_n q_new^(n-1)``."""
    ops = build_operators(fs) if ops is None else ops
    x = ops.q_new
    out = np.zeros_like(x)
    power = np.eye(fs.n_levels, dtype=complex)
    for k, b in enumerate(couplings):
        n = k + 2
        power = power @ x if k else x
        out = out + n * complex(b) * power
    return out


def build_hamiltonian_b(fs, mass, couplings, ops=None, deg_max=DEG_MAX):
    """``p_new^dag^2 / (2 m*) + sum b_n* (q_new^dag)^n``, with daggered operators
    built from their own defining combinations of ``q^`` and ``p^``."""
    mass, couplings = _check_params(mass, couplings, deg_max)
    ops = build_operators(fs) if ops is None else ops
    s = 1 / np.sqrt(1 - fs.r)
    q_dag = s * (ops.q_hat + 1j * ops.p_hat / fs.m_omega)
    p_dag = s * (ops.p_hat - 1j * fs.mp_omegap * ops.q_hat)
    return p_dag @ p_dag / (2 * mass.conjugate()) + _poly(q_dag, [b.conjugate() for b in couplings])


def verify_hb_equals_h_dagger(fs, mass, couplings):
    """``||H_B - H^dag||_F / ||H||_F``."""
    ops = build_operators(fs)
    h = build_hamiltonian(fs, mass, couplings, ops)
    hb = build_hamiltonian_b(fs, mass, couplings, ops)
    return float(np.linalg.norm(hb - h.conj().T) / np.linalg.norm(h))


def imaginary_growth(fs, mass, couplings, levels=(32, 64, 128), slope_max=None):
    """Largest ``Im(lambda)`` of the truncated Hamiltonian for each ``N``.

    Warns with :class:`UnboundedImaginaryWarning` if the fitted slope of
    ``max Im`` against ``N`` exceeds ``slope_max``.
    """
    out = []
    for n in levels:
        h = build_hamiltonian(fs.with_levels(n), mass, couplings)
        out.append(float(np.linalg.eigvals(h).imag.max()))
    out = np.array(out)
    if slope_max is not None and len(levels) > 1:
        slope = np.polyfit(np.asarray(levels, dtype=float), out, 1)[0]
        if slope > slope_max:
            warnings.warn(
                f"max Im(lambda) grows with N (slope {slope:.3g})", UnboundedImaginaryWarning
            )
    return out


# -- theorem on matrix elements ----------------------------------------------

_TOKENS = {
    "q_new": ("q_new", "q_hat"),
    "q_new_dag": ("q_new_dag", "q_hat"),
    "q_new†": ("q_new_dag", "q_hat"),
    "p_new": ("p_new", "p_hat"),
    "p_new_dag": ("p_new_dag", "p_hat"),
    "p_new†": ("p_new_dag", "p_hat"),
}


def word_matrices(ops, word):
    """Return ``(exact, surrogate)`` products for a token list."""
    n = ops.a.shape[0]
    exact = np.eye(n, dtype=complex)
    surr = np.eye(n, dtype=complex)
    for tok in word:
        try:
            e_name, s_name = _TOKENS[tok]
        except KeyError:
            raise ValueError(f"unknown operator token {tok!r}") from None
        exact = exact @ getattr(ops, e_name)
        surr = surr @ getattr(ops, s_name)
    return exact, surr


def theorem_matrix_element_check(fs, word, bra_label, ket_label, ops=None):
    """``(m<bra|O|ket>, same with every token replaced by q^ or p^)`` for coordinate labels."""
    if len(word) > 4:
        raise ValueError("word length is limited to 4")
    ops = build_operators(fs) if ops is None else ops
    bra = analytic_bra(coordinate_ket(fs, bra_label))
    ket = coordinate_ket(fs, ket_label).components
    exact, surr = word_matrices(ops, word)
    return complex(bra @ exact @ ket), complex(bra @ surr @ ket)


def theorem_gap(fs, word, labels, ops=None):
    """``max |exact - surrogate| / max |exact|`` over all label pairs in ``labels``."""
    ops = build_operators(fs) if ops is None else ops
    exact, surr = word_matrices(ops, word)
    v = coordinate_ket_matrix(fs, labels)
    for lab in labels:
        if not fs.fill_ok(fs.coherent_label(lab)):
            raise TruncationOverflow(f"label {lab} fails the fill gate")
    e = v @ exact @ v.T
    s = v @ surr @ v.T
    return float(np.abs(e - s).max() / np.abs(e).max())


def theorem_smeared_gap(fs, word, grid, phi_bra, phi_ket, ops=None):
    """Gap between exact and surrogate after smearing both labels with test functions.

    ``grid`` are real quadrature nodes (trapezoid rule); ``phi_bra`` and
    ``phi_ket`` are the sampled test functions.
    """
    ops = build_operators(fs) if ops is None else ops
    exact, surr = word_matrices(ops, word)
    grid = np.asarray(grid, dtype=float)
    w = np.gradient(grid)
    v = coordinate_ket_matrix(fs, grid)
    bra = (np.asarray(phi_bra) * w) @ v
    ket = (np.asarray(phi_ket) * w) @ v
    e = bra @ exact @ ket
    s = bra @ surr @ ket
    return complex(e), complex(s)
