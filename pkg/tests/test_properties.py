"""Property-based checks of the structural invariants."""
import numpy as np
from hypothesis import assume, given, strategies as st

from catsim import contour_calculus as cc
from catsim import fock_model as fm
from catsim import future_included as fi
from catsim import hermiticity_dynamics as hd
from catsim import spectral_core as sc
from catsim.scenarios import SCENARIOS, resolve_config

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(2, 9)


def model(seed, dim, cond_max=1e3):
    rng = np.random.Generator(np.random.Philox(seed))
    h = sc.random_diagonalizable(rng, dim, cond_max)
    return rng, h, sc.decompose(h)


@given(seeds, dims)
def test_metric_identities(seed, dim):
    rng, h, s = model(seed, dim)
    q = sc.build_q_metric(s)
    c2 = s.cond_p**2
    assert sc.biorthogonality_error(s, q) <= 1e-9 * c2
    assert sc.q_normality_residual(h, q) <= 1e-10 * c2
    qb = sc.build_qb_metric(q)
    assert np.abs(qb.q_matrix @ q.q_matrix - np.eye(dim)).max() <= 1e-13 * c2
    assert sc.hb_eigen_residual(h, s, q) <= 1e-9 * c2


@given(seeds, dims)
def test_q_dagger_is_an_involution(seed, dim):
    rng, h, s = model(seed, dim)
    q = sc.build_q_metric(s)
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    back = sc.q_dagger(sc.q_dagger(a, q), q)
    assert np.abs(back - a).max() <= 1e-9 * s.cond_p**2 * np.abs(a).max()
    split = sc.split_q_parts(h, q, s)
    assert np.allclose(split.h_qh + split.h_qa, h)
    assert split.crosscheck_residual <= 1e-10 * s.cond_p**2


@given(seeds, dims, st.floats(0.0, 5.0), st.floats(0.0, 5.0))
def test_propagation_composes(seed, dim, t1, t2):
    rng, h, s = model(seed, dim, 1e2)
    s = sc.decompose(h / max(1.0, np.abs(s.eigenvalues).max()))
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    st0 = hd.EvolvingState(psi, 0.0, s)
    two = hd.propagate(hd.propagate(st0, s, t1, renormalize=True), s, t2, renormalize=True)
    one = hd.propagate(st0, s, t1 + t2, renormalize=True)
    assert np.allclose(two.full_vector(), one.full_vector(), rtol=1e-8, atol=1e-8 * np.abs(one.full_vector()).max())


@given(seeds, dims, st.floats(0.0, 20.0))
def test_normalized_state_is_q_unit(seed, dim, t):
    rng, h, s = model(seed, dim)
    q = sc.build_q_metric(s)
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    traj = hd.Trajectory(s, psi)
    assert abs(q.norm_sq(traj.normalized(t)) - 1) <= 1e-9 * s.cond_p**2


@given(seeds, st.integers(2, 6))
def test_overlap_constancy_and_rescaling(seed, dim):
    rng, h, s = model(seed, dim, 1e2)
    a = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    b = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    bp = fi.BoundaryPair(a, b, 0.0, 2.0, s)
    ov = np.array([fi.overlap_ba(bp, t) for t in np.linspace(0.0, 2.0, 9)])
    assert np.abs(ov - ov[0]).max() <= 1e-11 * abs(ov[0]) * s.cond_p
    c1, c2 = complex(*rng.standard_normal(2)), complex(*rng.standard_normal(2))
    bp2 = fi.BoundaryPair(c1 * a, c2 * b, 0.0, 2.0, s)
    o = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    e1 = fi.expectation_ba(bp, o, 0.7)
    e2 = fi.expectation_ba(bp2, o, 0.7)
    assert abs(e1 - e2) <= 1e-9 * max(1.0, abs(e1))
    assert fi.layer_identity_residual(bp, o, 0.7, h) <= 1e-9 * s.cond_p**2


@st.composite
def scaled_delta_args(draw):
    a = complex(draw(st.floats(0.2, 2.0)) * draw(st.sampled_from([-1, 1])), draw(st.floats(-1.5, 1.5)))
    eps = complex(draw(st.floats(0.005, 0.05)), draw(st.floats(-0.02, 0.02)))
    q = complex(draw(st.floats(-0.4, 0.4)), draw(st.floats(-0.4, 0.4)))
    return a, eps, q


@given(scaled_delta_args())
def test_delta_scaling_identity(args):
    a, eps, q = args
    assume(cc.scaled_domain_ok(q, a, eps) and cc.scaling_branch_ok(a, eps))
    assert cc.scaling_identity_residual(a, eps, [q]) <= 1e-13


@given(st.floats(-0.7, 0.7), st.floats(-0.2, 0.2))
def test_coordinate_ket_eigen_relation(x, y):
    fs = fm.FockSpace(128)
    q = complex(x, y)
    if not fs.fill_ok(fs.coherent_label(q)):
        return
    k = fm.coordinate_ket(fs, q)
    ops = fm.build_operators(fs)
    res = ops.q_new_dag @ k.components - q * k.components
    assert np.abs(res[:-1]).max() <= 1e-12 * np.abs(k.components).max() * max(1.0, abs(q))
    assert fm.derivative_relation_residual(fs, k, ops, exact=True) <= 1e-12


@given(seeds)
def test_hb_identity_random_params(seed):
    rng = np.random.Generator(np.random.Philox(seed))
    fs = fm.FockSpace(24)
    mass = complex(rng.uniform(0.3, 3.0), rng.uniform(0.0, 1.0))
    coup = list(rng.standard_normal(4) + 1j * rng.standard_normal(4))
    assert fm.verify_hb_equals_h_dagger(fs, mass, coup) <= 1e-13


@given(st.sampled_from(SCENARIOS), st.integers(0, 1000))
def test_config_round_trip(name, seed):
    cfg = resolve_config({"scenario": name, "seed": seed})
    assert resolve_config(cfg) == cfg
