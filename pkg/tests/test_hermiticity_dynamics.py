import numpy as np
import pytest
import scipy.linalg as sla

from catsim import hermiticity_dynamics as hd
from catsim import spectral_core as sc
from catsim.errors import GridTooCoarse, ZeroProjection


@pytest.fixture
def model(rng):
    lam = np.array([0.4 + 0.0j, -0.7 - 0.3j, 1.1 - 0.9j, -0.2 - 1.5j, 0.8 - 1.2j])
    h = sc.random_diagonalizable(rng, 5, 1e2, lam)
    s = sc.decompose(h)
    return h, s, sc.build_q_metric(s)


def test_propagate_matches_expm(model, rng):
    h, s, _ = model
    psi = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    st = hd.EvolvingState(psi, 0.0, s)
    out = hd.propagate(st, s, 2.5)
    ref = sla.expm(-1j * h * 2.5) @ psi
    assert np.allclose(out.full_vector(), ref, atol=1e-10)
    ren = hd.propagate(st, s, 2.5, renormalize=True)
    assert np.allclose(ren.full_vector(), ref, atol=1e-10)


def test_normalized_state_has_unit_q_norm(model, rng):
    _, s, q = model
    psi = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    traj = hd.Trajectory(s, psi)
    for t in (0.0, 3.0, 30.0):
        assert q.norm_sq(traj.normalized(t)) == pytest.approx(1.0, abs=1e-10)


def test_suppression_rate(model, rng):
    _, s, q = model
    psi = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    gap = 0.3
    tg = np.linspace(0, 40 / gap, 81)
    rep = hd.verify_suppression(s, q, psi, tg)
    assert rep.gap == pytest.approx(gap)
    w = tg >= 20 / gap
    assert hd.log_slope(tg[w], rep.overlap_defect[w]) == pytest.approx(-gap, rel=1e-3)
    assert rep.bound_satisfied
    assert rep.schrodinger_residual.max() < 1e-6
    assert rep.heisenberg_residual.max() < 1e-6


def test_zero_projection(model):
    _, s, q = model
    psi = s.p[:, 1]
    with pytest.raises(ZeroProjection):
        hd.verify_suppression(s, q, psi, np.linspace(0, 1, 5))


def test_heff_residual_within_bound(model, rng):
    _, s, q = model
    psi = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    traj = hd.Trajectory(s, psi)
    a = sc.select_subset_a(s.eigenvalues)
    h_eff = sc.build_h_eff(s, a, q)
    ts = np.linspace(1, 30, 12)
    r = hd.heff_schrodinger_residual(traj, ts, h_eff, 1e-4)
    b = hd.heff_remainder_bound(traj, ts, a)
    assert np.all(r <= b + 1e-6)
    assert r[-1] < 1e-3 * r[0]


def test_coarse_grid(model, rng):
    _, s, q = model
    traj = hd.Trajectory(s, np.ones(5, dtype=complex))
    with pytest.raises(GridTooCoarse):
        hd.heff_schrodinger_residual(traj, [1.0], np.eye(5), 1.0)


def test_hermitian_limit(rng):
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    h = a + a.conj().T
    s = sc.decompose(h)
    q = sc.build_q_metric(s)
    psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    traj = hd.Trajectory(s, psi)
    # norm is conserved
    assert traj.log_q_norm(5.0) == pytest.approx(traj.log_q_norm(0.0), abs=1e-12)
    assert hd.im_gap(s.eigenvalues, eta=1e-6) > 0 or np.isinf(hd.im_gap(s.eigenvalues, eta=10))


def test_heisenberg_expectation_equals_schrodinger(model, rng):
    _, s, q = model
    psi = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    traj = hd.Trajectory(s, psi)
    o = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    t = 1.7
    n0 = hd.q_norm_sq(psi, q)
    psi_t = traj.state(t).full_vector()
    n = hd.q_norm_sq(psi_t, q)
    o_qh = hd.heisenberg_picture_op(o, s, q, t, 0.0, (n0, n))
    lhs = q.inner(psi, o_qh @ psi) / n0
    psi_n = traj.normalized(t)
    assert lhs == pytest.approx(q.inner(psi_n, o @ psi_n), rel=1e-9)
