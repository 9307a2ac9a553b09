import warnings

import numpy as np
import pytest
from scipy.integrate import quad_vec
from scipy.special import eval_hermite, gammaln

from catsim import fock_model as fm
from catsim.errors import NonAnalyticConstruction, TruncationOverflow, UnboundedImaginaryWarning


def hermite_functions(fs, x, n):
    """Oscillator eigenfunctions at scale ``m w`` (direct Hermite-polynomial route)."""
    xi = np.sqrt(fs.m_omega / fs.hbar) * x
    k = np.arange(n)[:, None]
    norm = (fs.m_omega / (np.pi * fs.hbar)) ** 0.25 * np.exp(-0.5 * (k * np.log(2) + gammaln(k + 1)))
    return norm * eval_hermite(k, xi[None, :]) * np.exp(-(xi**2) / 2)


def position_overlap(fs, q):
    """``m<q|x>_new`` as a function of real ``x``."""
    a = fs.m_omega / (2 * fs.hbar)
    c = np.sqrt(1 - fs.r) * q
    n_q = (fs.m_omega * (1 - fs.r) / (4 * np.pi * fs.hbar)) ** 0.25
    return lambda x: n_q * (fs.m_omega / (np.pi * fs.hbar)) ** 0.25 * np.exp(-a * (x - c) ** 2)


@pytest.fixture
def fs():
    return fm.FockSpace(24)


def test_coordinate_ket_quadrature_oracle(fs):
    q = 0.15
    f = position_overlap(fs, q)
    ref, _ = quad_vec(lambda x: hermite_functions(fs, np.array([x]), fs.n_levels)[:, 0] * f(x), -2, 2, epsabs=1e-14)
    v = fm.coordinate_ket(fs, q).components
    assert np.allclose(v, ref, atol=1e-11)


def test_momentum_ket_quadrature_oracle(fs):
    p = 0.3
    b = fs.mp_omegap / (2 * fs.hbar)
    k = np.sqrt(1 - fs.r) * p / fs.hbar
    c_p = ((1 - fs.r) / (4 * np.pi * fs.hbar * fs.mp_omegap)) ** 0.25 * (fs.mp_omegap / (np.pi * fs.hbar)) ** 0.25

    def integrand(x):
        return hermite_functions(fs, np.array([x]), fs.n_levels)[:, 0] * c_p * np.exp(-b * x * x + 1j * k * x)

    ref, _ = quad_vec(integrand, -2, 2, epsabs=1e-14)
    w = fm.momentum_ket(fs, p).components
    assert np.allclose(w, ref, atol=1e-11)


def test_kernel_continuum_is_the_overlap_integral(fs):
    q, p = 0.2, -0.35
    b = fs.mp_omegap / (2 * fs.hbar)
    k = np.sqrt(1 - fs.r) * p / fs.hbar
    c_p = ((1 - fs.r) / (4 * np.pi * fs.hbar * fs.mp_omegap)) ** 0.25 * (fs.mp_omegap / (np.pi * fs.hbar)) ** 0.25
    f = position_overlap(fs, q)
    ref, _ = quad_vec(lambda x: f(x) * c_p * np.exp(-b * x * x + 1j * k * x), -3, 3, epsabs=1e-15)
    assert fm.kernel_continuum(fs, q, p) == pytest.approx(complex(ref), rel=1e-10)


def test_truncated_kernel_matches_continuum():
    fs = fm.FockSpace(128)
    for q, p in ((0.3, 0.4), (-0.5, 0.2), (0.1, -0.7)):
        assert fm.fourier_kernel(fs, q, p) == pytest.approx(fm.kernel_continuum(fs, q, p), rel=1e-12)
        k = fm.fourier_kernel(fs, q, p)
        t = fm.fourier_target(fs, q, p)
        assert abs(k - t) / abs(t) < 0.01


def test_interior_commutator():
    fs = fm.FockSpace(64)
    assert fm.interior_commutator_error(fs) < 1e-12


def test_coordinate_ket_residual_frozen_high_precision():
    # mpmath, 60 digits, q = 0.3 at N = 32, 64, 128
    frozen = (4.64158e-09, 2.67e-25, 3.52555e-62)
    for n, ref in zip((32, 64, 128), frozen):
        val = fm.coordinate_ket_residual(fm.FockSpace(n), 0.3, dps=60)
        assert val == pytest.approx(ref, rel=0.01)


def test_double_precision_residual_floors():
    fs = fm.FockSpace(128)
    assert fm.coordinate_ket_residual(fs, 0.3) < 1e-15


def test_delta_overlap_peak_and_decay():
    fs = fm.FockSpace(128)
    peak = fm.delta_overlap(fs, 0.3, 0.3)
    assert peak == pytest.approx(1 / np.sqrt(4 * np.pi * fs.eps1), rel=1e-12)
    off = fm.delta_overlap(fs, 0.3, 0.3 + 4 * np.sqrt(fs.eps1))
    assert abs(off / peak) == pytest.approx(np.exp(-4), rel=1e-10)


def test_derivative_relation():
    fs = fm.FockSpace(128)
    k = fm.coordinate_ket(fs, 0.3)
    assert fm.derivative_relation_residual(fs, k, exact=True) < 1e-12
    # leading-order form misses m'w' q
    assert fm.derivative_relation_residual(fs, k) == pytest.approx(fs.mp_omegap * 0.3, rel=1e-6)


def test_analytic_derivative_vs_finite_difference():
    fs = fm.FockSpace(48)
    q, h = 0.1 + 0.05j, 1e-5
    d = fm.analytic_derivative(fs, fm.coordinate_ket(fs, q))
    fd = (fm.coordinate_ket(fs, q + h).components - fm.coordinate_ket(fs, q - h).components) / (2 * h)
    assert np.allclose(d, fd, atol=1e-7 * np.abs(d).max())
    v, dv, d2v = fm.derivative_matrices(fs, [q])
    fd2 = (
        fm.coordinate_ket(fs, q + h).components - 2 * v[0] + fm.coordinate_ket(fs, q - h).components
    ) / h**2
    assert np.allclose(dv[0], d)
    assert np.allclose(d2v[0], fd2, atol=1e-4 * np.abs(d2v).max())


def test_momentum_ket_eigen_residual():
    fs = fm.FockSpace(128)
    assert fm.momentum_ket_residual(fs, fm.momentum_ket(fs, 0.4)) < 1e-12


def test_fill_gate():
    fs = fm.FockSpace(32)
    with pytest.raises(TruncationOverflow):
        fm.coordinate_ket(fs, 1.0)
    fm.coordinate_ket(fs, 1.0, enforce_fill=False)


def test_complex_scales_rejected():
    with pytest.raises(NonAnalyticConstruction):
        fm.FockSpace(16, hbar=1 + 0.1j)


def test_hb_equals_h_dagger(rng):
    fs = fm.FockSpace(64)
    for _ in range(3):
        mass = complex(rng.uniform(0.5, 2), rng.uniform(0, 1))
        coup = list(rng.standard_normal(3) + 1j * rng.standard_normal(3))
        assert fm.verify_hb_equals_h_dagger(fs, mass, coup) < 1e-13


def test_spectrum_frozen_from_high_precision_eig():
    # mpmath.eig at 40 digits, N = 32, four lowest Re parts
    frozen = {
        (1.0, 0.5): [1.9404013265478536, 2.0619210759666134, 17.2104990329427, 17.215302540952569],
        (1 + 0.1j, 0.5 - 0.05j): [
            1.9216043666268914 - 0.19216043666268914j,
            2.043122341241498 - 0.2043122341241498j,
            17.04107650565884 - 1.704107650565884j,
            17.045881958117045 - 1.7045881958117045j,
        ],
    }
    fs = fm.FockSpace(32)
    for (m, b), ref in frozen.items():
        w = np.linalg.eigvals(fm.build_hamiltonian(fs, m, [b]))
        w = w[np.argsort(w.real)][:4]
        assert np.allclose(w, ref, rtol=1e-10)


def test_negative_im_mass_rejected():
    with pytest.raises(ValueError):
        fm.build_hamiltonian(fm.FockSpace(8), 1 - 0.1j, [0.5])


def test_imaginary_growth_warning():
    fs = fm.FockSpace(16)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        fm.imaginary_growth(fs, 1.0, [0.5, 0.0, 0.3j], levels=(16, 32), slope_max=-1e9)
    assert any(issubclass(w.category, UnboundedImaginaryWarning) for w in rec)


def test_gaussian_packet_moments():
    fs = fm.FockSpace(128)
    ops = fm.build_operators(fs)
    v = fm.gaussian_packet(fs, 0.08, 0.03, 2.0)
    assert np.linalg.norm(v) == pytest.approx(1.0)
    assert np.vdot(v, ops.q_hat @ v).real == pytest.approx(0.03, abs=1e-8)
    assert np.vdot(v, ops.p_hat @ v).real == pytest.approx(2.0, abs=1e-6)


def test_theorem_gap_above_target_and_shrinking():
    # the surrogate gap is set by the coordinate-ket width, not by truncation
    labels = lambda fs: np.linspace(-1, 1, 17) * 0.999 * np.sqrt(fs.fill_max * fs.n_levels) / fs.beta
    gaps = [fm.theorem_gap(f, ["p_new", "q_new"], labels(f)) for f in map(fm.FockSpace, (32, 64, 128))]
    assert gaps[0] > gaps[1] > gaps[2] > 0.02
    assert fm.theorem_gap(fm.FockSpace(32), [], labels(fm.FockSpace(32))) == 0.0


def test_theorem_matrix_element_single_label():
    fs = fm.FockSpace(128)
    e, s = fm.theorem_matrix_element_check(fs, ["q_new_dag"], 0.2, 0.2)
    # q_new^dag acts on the ket as its eigenvalue
    assert e == pytest.approx(0.2 * fm.delta_overlap(fs, 0.2, 0.2), rel=1e-10)
