import numpy as np
import pytest

from catsim import contour_calculus as cc
from catsim.errors import BranchAmbiguity, NoConvergence


def test_gauss_legendre_polynomial_exact():
    c = cc.real_axis(1.0, pieces=1, nodes=8)
    assert cc.contour_integrate(c, lambda q: q**6) == pytest.approx(2 / 7, rel=1e-14)


def test_analytic_integrand_is_path_independent():
    f = lambda q: np.exp(-q * q) * np.cos(3 * q)
    ref = np.sqrt(np.pi) * np.exp(-9 / 4)
    for c in (cc.real_axis(8.0), cc.tilted(np.pi / 8, 8.0), cc.zigzag(np.pi / 5, 8.0, teeth=5)):
        assert cc.contour_integrate(c, f) == pytest.approx(ref, abs=1e-12)


def test_sift_closed_form():
    # int cos(q) delta^eps(q - q0) dq = cos(q0) exp(-eps)
    for eps in (0.01, 0.005, 0.02 + 0.005j):
        val = cc.sift(np.cos, eps, 0.5)
        assert val == pytest.approx(np.cos(0.5) * np.exp(-eps), abs=1e-12)


def test_delta_normalization_on_tilted_path():
    eps = 0.01
    w = cc.certified_window(eps, 1e-12, np.pi / 8)
    val = cc.sift(np.ones_like, eps, 0.0, cc.tilted(np.pi / 8, w))
    assert val == pytest.approx(1.0, abs=1e-10)


def test_validate_contour():
    assert cc.validate_contour(cc.tilted(np.pi / 8, 1.0)) == []
    bad = cc.validate_contour(cc.tilted(np.pi / 3, 1.0))
    assert len(bad) == 4 * 24
    back = cc.Contour((cc.Segment(1.0, 0.0),))
    assert any("not increasing" in m for m in cc.validate_contour(back))


def test_certified_window_bound():
    eps = 0.01
    w = cc.certified_window(eps, 1e-10)
    assert cc.gaussian_tail_bound(w, eps) <= 1e-12 * 1.0001
    with pytest.raises(ValueError):
        cc.certified_window(eps, theta=np.pi / 4 + 0.01)


def test_scaling_identity_and_sign():
    q = np.linspace(-0.3, 0.3, 11)
    assert cc.scaling_identity_residual(1.3 - 0.4j, 0.01, q) < 1e-13
    assert cc.scaling_identity_residual(-0.7 + 0.2j, 0.01, q) < 1e-13
    with pytest.raises(BranchAmbiguity):
        cc.sign_re(2j)


def test_scaled_domain_forms_agree():
    rng = np.random.default_rng(3)
    for _ in range(200):
        q = complex(*rng.uniform(-1, 1, 2))
        a = complex(*rng.uniform(-2, 2, 2))
        eps = complex(rng.uniform(0.01, 1), rng.uniform(-1, 1))
        cc.scaled_domain_ok(q, a, eps)
    assert cc.domain_ok(1 + 0.5j) and not cc.domain_ok(0.5 + 1j)


def test_preset_lookup_and_spec_round_trip():
    c = cc.preset("tilted(0.3)", 2.0)
    assert c.segments[0].angle() == pytest.approx(0.3)
    again = cc.Contour.from_spec(c.to_spec())
    assert np.allclose(again.nodes(), c.nodes())
    with pytest.raises(KeyError):
        cc.preset("spiral", 1.0)


def test_no_convergence():
    c = cc.real_axis(1.0, pieces=1, nodes=2)
    with pytest.raises(NoConvergence):
        cc.contour_integrate(c, lambda q: np.abs(q - 0.1234) ** 0.5, quad_tol=1e-15, max_refine=2)


def test_unchained_segments():
    with pytest.raises(ValueError):
        cc.Contour((cc.Segment(0, 1), cc.Segment(2, 3)))


def test_scaling_identity_sign_outside_real_direction():
    # real direction outside the domain of delta^{eps/a^2}: the sides differ by a sign
    a, eps, q = -0.5 + 1.5j, (1 + 1j) / 64, 0.25j
    assert cc.scaled_domain_ok(q, a, eps)
    assert not cc.scaling_branch_ok(a, eps)
    lhs = cc.delta_value(cc.SmearedDelta(eps), a * q)
    rhs = cc.sign_re(a) / a * cc.delta_value(cc.SmearedDelta(eps / a**2), q)
    assert lhs == pytest.approx(-rhs, rel=1e-12)


def test_scaling_identity_reference_case():
    a, eps = 2 * np.exp(1j * np.pi / 6), 0.05 * np.exp(1j * np.pi / 12)
    assert cc.scaling_branch_ok(a, eps)
    q = np.linspace(-0.2, 0.2, 100) * np.exp(1j * 0.1)
    assert cc.scaling_identity_residual(a, eps, q) < 1e-13
    assert cc.scaling_identity_residual(-1.0, 0.01, q) < 1e-15
