"""Named numerical experiments with pass/fail checks and tabular output.

Every scenario takes a resolved config dict and returns a :class:`RunReport`.
Random draws come from Philox streams spawned from the config seed, one
stream per sample, so results do not depend on the worker count.
"""
from __future__ import annotations

import copy
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import contour_calculus as cc
from . import fock_model as fm
from . import future_included as fi
from . import hermiticity_dynamics as hd
from . import spectral_core as sc
from .errors import CatsimError, ConfigError


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: {self.value:.6g} (threshold {self.threshold:.6g}) {self.detail}".rstrip()


@dataclass
class RunReport:
    scenario: str
    config: dict
    checks: list
    metrics: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    wall_clock: float = 0.0

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def to_json(self):
        return {
            "scenario": self.scenario,
            "config": self.config,
            "checks": [
                {
                    "name": c.name,
                    "passed": bool(c.passed),
                    "value": _json_float(c.value),
                    "threshold": _json_float(c.threshold),
                    "detail": c.detail,
                }
                for c in self.checks
            ],
            "metrics": {k: _json_value(v) for k, v in self.metrics.items()},
            "tables": sorted(self.tables),
            "passed": self.passed,
            "wall_clock": self.wall_clock,
        }


def _json_float(x):
    x = float(x)
    return x if np.isfinite(x) else str(x)


def _json_value(v):
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_json_value(x) for x in v]
    if isinstance(v, (complex, np.complexfloating)):
        return [_json_float(v.real), _json_float(v.imag)]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return _json_float(v)
    return v


def check_le(name, value, threshold, detail=""):
    value = float(value)
    return Check(name, bool(value <= threshold), value, float(threshold), detail)


def check_ge(name, value, threshold, detail=""):
    value = float(value)
    return Check(name, bool(value >= threshold), value, float(threshold), detail)


# -- config --------------------------------------------------------------------


def to_complex(x, name="value"):
    """Accept a number or an ``[re, im]`` pair."""
    if isinstance(x, (list, tuple)):
        if len(x) != 2 or not all(isinstance(v, (int, float)) for v in x):
            raise ConfigError(f"{name}: complex values are [re, im] pairs, got {x!r}")
        return complex(x[0], x[1])
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{name}: expected a number, got {x!r}")
    return complex(x)


def _fock_defaults(n=128):
    return {"n_levels": n, "hbar": 1.0, "m_omega": 100.0, "mp_omegap": 0.01}


DEFAULTS = {
    "spectral-props": {
        "params": {"n_samples": 200, "dim_min": 4, "dim_max": 20, "cond_max": 1e4},
        "tolerances": {"biorth": 1e-9, "normality": 1e-10, "qb_q": 1e-11, "hb_eigen": 1e-9},
    },
    "hermiticity-demo": {
        "params": {
            "n_samples": 50,
            "dim": 10,
            "gap_min": 0.1,
            "gap_max": 1.0,
            "cond_max": 1e4,
            "dt_fd": 1e-4,
            "fit_start": 20.0,
            "fit_stop": 40.0,
            "n_times": 81,
        },
        "tolerances": {"slope_rel": 0.05, "heff_fd": 1e-6},
    },
    "fock-checks": {
        "fock": _fock_defaults(),
        "params": {
            "levels": [32, 64, 128],
            "ket_labels": [[0.3, 0.0], [0.5, 0.2]],
            "mp_dps": 60,
            "fourier_points": 17,
            "n_random_h": 20,
            "theorem_words": [["p_new", "q_new"], ["q_new_dag"]],
            "theorem_labels": 33,
        },
        "tolerances": {"commutator": 1e-12, "fourier_rel": 0.01, "hb_rel": 1e-13, "theorem_gap": 0.02},
    },
    "delta-sift": {
        "params": {
            "epsilon": 0.01,
            "q0": 0.5,
            "n_scaling_samples": 100,
            "theta": float(np.pi / 8),
            "quad_tol": 1e-12,
        },
        "tolerances": {
            "sift": 0.01,
            "ratio_min": 1.8,
            "ratio_max": 2.2,
            "normalization": 1e-10,
            "scaling": 1e-13,
            "contour_agreement": 1e-9,
        },
    },
    "ehrenfest": {
        "fock": _fock_defaults(),
        "hamiltonian": {"mass": [1.0, 0.0], "couplings": [[0.5, 0.0]]},
        "boundary": {"a": {"coherent": [0.2, 0.0]}, "b": {"coherent": [0.25, 0.0]}},
        "times": {"t_a": 0.0, "t_b": 1e-3, "t": 5e-4, "n_overlap": 50},
        "params": {"dt_fd": 1e-4, "n_random_ops": 5},
        "tolerances": {"layer": 1e-9, "r1": 1e-5, "r2": 1e-5, "overlap_spread": 1e-11},
    },
    "current-continuity": {
        "fock": _fock_defaults(),
        "hamiltonian": {"mass": [10.0, 0.0], "couplings": [[5.0, 0.0]]},
        "boundary": {
            "a": {"gaussian": {"sigma": 0.08, "x0": 0.03, "k0": 2.0}},
            "b": {"gaussian": {"sigma": 0.08, "x0": -0.02, "k0": 1.0}},
        },
        "times": {"t_a": 0.0, "t_b": 0.1, "t": 0.05},
        "contour": {"presets": ["real-axis", "tilted(0.39269908169872414)"], "residual_window": 0.25},
        "params": {"levels": [32, 64, 128]},
        "tolerances": {"residual_ratio": 4.0, "norm": 5e-3, "contour_agreement": 1e-4},
    },
    "correspondence-sweep": {
        "times": {"t_a": 0.0, "margin_b": 30.0, "margin_a": 30.0, "extra": 40.0, "n_times": 400},
        "params": {
            "dim": 8,
            "im_levels": [0.25, -0.05, -0.25, -0.45, -0.6, -0.8, -1.0, -1.2],
            "cond_max": 100.0,
            "delta_t": [0.5, 1.0, 2.0],
            "slope_points": 12,
        },
        "tolerances": {"window": 1e-10, "slope_rel": 0.1, "sinc": 1e-8},
    },
    "bprojector-falsify": {
        "times": {"t_b": 50.0, "n_times": 101, "far_margin": 5.0},
        "params": {
            "dim": 8,
            "im_levels": [0.25, -0.05, -0.25, -0.45, -0.6, -0.8, -1.0, -1.2],
            "cond_max": 100.0,
            "dt_fd": 1e-5,
        },
        "tolerances": {"far": 0.1, "at_tb": 0.01},
    },
}

DESCRIPTIONS = {
    "spectral-props": "biorthogonal eigenbasis, Q metric, Q-normality and Q_B = Q^-1 on random matrices",
    "hermiticity-demo": "decay of non-dominant components and the effective Hermitian dynamics after normalization",
    "fock-checks": "truncated Fock realization: commutator, coordinate kets, Fourier kernel, H_B = H^dag, matrix-element surrogate",
    "delta-sift": "complex-argument smeared delta: sifting, normalization, scaling identity, contour independence",
    "ehrenfest": "future-included expectation values: exact layer identity and Ehrenfest relations",
    "current-continuity": "probability density, current and continuity equation along complex contours",
    "correspondence-sweep": "correspondence of future-included and Q'-weighted expectation values; time smearing",
    "bprojector-falsify": "falsification of the flat final-state projector approximation away from T_B",
}

SCENARIOS = tuple(DEFAULTS)


def list_scenarios():
    return [(name, DESCRIPTIONS[name]) for name in SCENARIOS]


def _merge(base, over, path):
    out = copy.deepcopy(base)
    for k, v in over.items():
        where = f"{path}.{k}" if path else k
        if k not in base:
            raise ConfigError(f"unknown field {where!r}")
        if isinstance(base[k], dict) and base[k] and not _free_form(where):
            if not isinstance(v, dict):
                raise ConfigError(f"{where}: expected an object")
            out[k] = _merge(base[k], v, where)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _free_form(path):
    return path.startswith("boundary.")


def resolve_config(raw, seed=None):
    """Merge ``raw`` with scenario defaults and validate.

    Returns a plain JSON-compatible dict that re-resolves to itself.
    """
    if not isinstance(raw, dict):
        raise ConfigError("config must be an object")
    name = raw.get("scenario")
    if name not in DEFAULTS:
        raise ConfigError(f"unknown scenario {name!r}; valid: {', '.join(SCENARIOS)}")
    base = {"scenario": name, "seed": 0, "output": "out"}
    base.update(copy.deepcopy(DEFAULTS[name]))
    cfg = _merge(base, raw, "")
    if seed is not None:
        cfg["seed"] = seed
    s = cfg["seed"]
    if isinstance(s, bool) or not isinstance(s, int) or s < 0:
        raise ConfigError(f"seed: expected an unsigned integer, got {s!r}")
    if not isinstance(cfg["output"], str):
        raise ConfigError("output: expected a directory name")
    _validate(cfg)
    return cfg


def _validate(cfg):
    name = cfg["scenario"]
    if "fock" in cfg:
        f = cfg["fock"]
        try:
            fm.FockSpace(f["n_levels"], f["hbar"], f["m_omega"], f["mp_omegap"])
        except (ValueError, TypeError, CatsimError) as exc:
            raise ConfigError(f"fock: {exc}") from None
    if "hamiltonian" in cfg:
        h = cfg["hamiltonian"]
        to_complex(h["mass"], "hamiltonian.mass")
        if not isinstance(h["couplings"], list) or not h["couplings"]:
            raise ConfigError("hamiltonian.couplings: expected a non-empty list")
        for k, c in enumerate(h["couplings"]):
            to_complex(c, f"hamiltonian.couplings[{k}]")
    if "boundary" in cfg:
        for side in ("a", "b"):
            _boundary_kind(cfg["boundary"][side], f"boundary.{side}")
    t = cfg.get("times", {})
    if "t_a" in t and "t_b" in t:
        if not t["t_a"] < t["t_b"]:
            raise ConfigError("times: need t_a < t_b")
        if "t" in t and not t["t_a"] < t["t"] < t["t_b"]:
            raise ConfigError("times.t must lie inside (t_a, t_b)")
    if "contour" in cfg:
        for p in cfg["contour"]["presets"]:
            try:
                cc.preset(p, 1.0)
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"contour.presets: {exc}") from None
    if name == "spectral-props":
        p = cfg["params"]
        if not 2 <= p["dim_min"] <= p["dim_max"]:
            raise ConfigError("params: need 2 <= dim_min <= dim_max")
    if name == "hermiticity-demo":
        p = cfg["params"]
        if not 0 < p["gap_min"] <= p["gap_max"]:
            raise ConfigError("params: need 0 < gap_min <= gap_max")
    if name in ("correspondence-sweep", "bprojector-falsify"):
        p = cfg["params"]
        if len(p["im_levels"]) != p["dim"]:
            raise ConfigError("params.im_levels must have dim entries")


def _boundary_kind(spec, where):
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ConfigError(f"{where}: expected one of explicit, random, coherent, gaussian")
    kind, val = next(iter(spec.items()))
    if kind == "coherent":
        to_complex(val, f"{where}.coherent")
    elif kind == "explicit":
        if not isinstance(val, list):
            raise ConfigError(f"{where}.explicit: expected a list of complex values")
        for k, x in enumerate(val):
            to_complex(x, f"{where}.explicit[{k}]")
    elif kind == "gaussian":
        if not isinstance(val, dict) or set(val) - {"sigma", "x0", "k0"} or "sigma" not in val:
            raise ConfigError(f"{where}.gaussian: expected sigma, x0, k0")
    elif kind == "random":
        if not isinstance(val, dict) or set(val) - {"levels"}:
            raise ConfigError(f"{where}.random: expected an object with optional 'levels'")
    else:
        raise ConfigError(f"{where}: unknown boundary kind {kind!r}")
    return kind


def boundary_vector(fs, spec, rng):
    """Fock-space vector from a boundary spec.

    ``random`` draws i.i.d. standard complex normal components on the lowest
    ``levels`` levels (the fill-gated interior) from ``rng``.
    """
    kind, val = next(iter(spec.items()))
    if kind == "coherent":
        return fm.coordinate_ket(fs, to_complex(val)).components
    if kind == "gaussian":
        return fm.gaussian_packet(fs, val["sigma"], val.get("x0", 0.0), val.get("k0", 0.0))
    if kind == "explicit":
        v = np.zeros(fs.n_levels, dtype=complex)
        x = np.array([to_complex(c) for c in val])
        if x.size > fs.n_levels:
            raise ConfigError("explicit boundary vector longer than n_levels")
        v[: x.size] = x
        return v
    m = int(val.get("levels", fs.n_levels // 4))
    v = np.zeros(fs.n_levels, dtype=complex)
    v[:m] = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return v


def fock_space(cfg, n=None):
    f = cfg["fock"]
    return fm.FockSpace(n or f["n_levels"], f["hbar"], f["m_omega"], f["mp_omegap"])


def hamiltonian_params(cfg):
    h = cfg["hamiltonian"]
    return to_complex(h["mass"]), [to_complex(c) for c in h["couplings"]]


def streams(seed, n):
    """``n`` independent Philox generators derived from ``seed``."""
    return [np.random.Generator(np.random.Philox(s)) for s in np.random.SeedSequence(seed).spawn(n)]


def n_threads():
    try:
        return max(1, int(os.environ.get("CATSIM_THREADS", "1")))
    except ValueError:
        return 1


def fan_out(fn, items):
    """Map ``fn`` over ``items`` with up to ``CATSIM_THREADS`` workers, keeping order."""
    k = n_threads()
    if k == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=k) as ex:
        return list(ex.map(fn, items))


# -- scenarios -------------------------------------------------------------------


def _spectral_sample(args):
    rng, p = args
    d = int(rng.integers(p["dim_min"], p["dim_max"] + 1))
    h = sc.random_diagonalizable(rng, d, p["cond_max"])
    s = sc.decompose(h)
    q = sc.build_q_metric(s)
    qb = sc.build_qb_metric(q)
    return (
        d,
        s.cond_p,
        sc.biorthogonality_error(s, q),
        sc.q_normality_residual(h, q),
        float(np.abs(qb.q_matrix @ q.q_matrix - np.eye(d)).max()),
        sc.hb_eigen_residual(h, s, q),
    )


def run_spectral_props(cfg):
    p, tol = cfg["params"], cfg["tolerances"]
    rows = fan_out(_spectral_sample, [(g, p) for g in streams(cfg["seed"], p["n_samples"])])
    r = np.array(rows, dtype=float)
    c2 = r[:, 1] ** 2
    checks = [
        check_le("biorthogonality / cond^2", (r[:, 2] / c2).max(), tol["biorth"]),
        check_le("Q-normality / cond^2", (r[:, 3] / c2).max(), tol["normality"]),
        check_le("max |Q_B Q - I|", r[:, 4].max(), tol["qb_q"]),
        check_le("H^dag eigen-residual / cond^2", (r[:, 5] / c2).max(), tol["hb_eigen"]),
    ]
    table = [(k,) + row for k, row in enumerate(rows)]
    header = ("sample", "dim", "cond_p", "biorth", "normality", "qb_q", "hb_eigen")
    metrics = {
        "max_cond_p": r[:, 1].max(),
        "qb_q_failures": int((r[:, 4] > tol["qb_q"]).sum()),
        "qb_q_over_eps_cond2_max": (r[:, 4] / (np.finfo(float).eps * c2)).max(),
    }
    return checks, metrics, {"samples": (header, table)}


def random_gapped_spectrum(rng, dim, gap):
    """Top ``Im = 0``, second ``-gap``, the rest uniform in ``[-gap - 2, -1.5 gap]``."""
    im = np.concatenate([[0.0, -gap], rng.uniform(-gap - 2, -1.5 * gap, dim - 2)])
    return rng.uniform(-2, 2, dim) + 1j * im


def _hermiticity_sample(args):
    rng, p = args
    gap = rng.uniform(p["gap_min"], p["gap_max"])
    lam = random_gapped_spectrum(rng, p["dim"], gap)
    h = sc.random_diagonalizable(rng, p["dim"], p["cond_max"], lam)
    s = sc.decompose(h)
    q = sc.build_q_metric(s)
    psi0 = rng.standard_normal(p["dim"]) + 1j * rng.standard_normal(p["dim"])
    tg = np.linspace(0.0, p["fit_stop"] / gap, p["n_times"])
    rep = hd.verify_suppression(s, q, psi0, tg, dt_fd=p["dt_fd"])
    w = tg >= p["fit_start"] / gap
    slope = hd.log_slope(tg[w], rep.overlap_defect[w])
    traj = hd.Trajectory(s, psi0)
    h_eff = sc.build_h_eff(s, rep.subset_a, q)
    inner = tg[1:-1]
    res = hd.heff_schrodinger_residual(traj, inner, h_eff, p["dt_fd"])
    bound = hd.heff_remainder_bound(traj, inner, rep.subset_a)
    summary = (
        gap,
        s.cond_p,
        slope,
        abs(slope / -gap - 1),
        float(np.max(res - bound)),
        float(rep.schrodinger_residual.max()),
        float(rep.heisenberg_residual.max()),
        float(rep.bound_satisfied),
    )
    return summary, rep


def run_hermiticity_demo(cfg):
    p, tol = cfg["params"], cfg["tolerances"]
    out = fan_out(_hermiticity_sample, [(g, p) for g in streams(cfg["seed"], p["n_samples"])])
    rows = [o[0] for o in out]
    r = np.array(rows)
    checks = [
        check_le("overlap-defect slope relative error", r[:, 3].max(), tol["slope_rel"]),
        check_le("H_eff residual minus remainder bound", r[:, 4].max(), tol["heff_fd"]),
    ]
    header = (
        "sample", "gap", "cond_p", "slope", "slope_rel_err", "heff_excess",
        "modified_schrodinger", "modified_heisenberg", "bound_satisfied",
    )
    rep0 = out[0][1]
    traj_header = ("t", "overlap_defect", "schrodinger_residual", "heisenberg_residual", "log_q_norm")
    metrics = {
        "modified_schrodinger_max": r[:, 5].max(),
        "modified_heisenberg_max": r[:, 6].max(),
        "envelope_bound_fraction": r[:, 7].mean(),
    }
    return checks, metrics, {
        "samples": (header, [(k,) + row for k, row in enumerate(rows)]),
        "trajectory_0": (traj_header, list(rep0.rows())),
    }


def fill_window(fs, frac=0.999):
    """Largest real ``|q|`` passing the coordinate-ket fill gate (times ``frac``)."""
    return frac * np.sqrt(fs.fill_max * fs.n_levels) / fs.beta


def momentum_window(fs, frac=0.999):
    lam_per_p = abs(fs.momentum_label(1.0))
    return frac * np.sqrt(fs.fill_max * fs.n_levels) / lam_per_p


def run_fock_checks(cfg):
    p, tol = cfg["params"], cfg["tolerances"]
    fs = fock_space(cfg)
    ops = fm.build_operators(fs)
    checks = [check_le("interior commutator", fm.interior_commutator_error(fs, ops), tol["commutator"])]
    ket_rows = []
    for lab in p["ket_labels"]:
        q = to_complex(lab)
        res = [
            fm.coordinate_ket_residual(fs.with_levels(n), q, dps=p["mp_dps"], enforce_fill=False)
            for n in p["levels"]
        ]
        ket_rows.extend((q.real, q.imag, n, r) for n, r in zip(p["levels"], res))
        mono = all(b < a for a, b in zip(res[:-1], res[1:]))
        checks.append(
            Check(f"coordinate-ket residual monotone q={q:g}", mono, res[-1], res[0], "values " + ", ".join(f"{r:.3g}" for r in res))
        )
    wq = fill_window(fs)
    wp = momentum_window(fs)
    f_rows = []
    for q in np.linspace(-wq, wq, p["fourier_points"]):
        for pp in np.linspace(-min(wp, wq), min(wp, wq), p["fourier_points"]):
            k = fm.fourier_kernel(fs, q, pp)
            t = fm.fourier_target(fs, q, pp)
            f_rows.append((q, pp, k.real, k.imag, t.real, t.imag, abs(k - t) / abs(t)))
    checks.append(check_le("Fourier kernel relative error", max(r[-1] for r in f_rows), tol["fourier_rel"]))
    rng = streams(cfg["seed"], 1)[0]
    hb_rows = []
    for _ in range(p["n_random_h"]):
        mass = complex(rng.uniform(0.5, 2.0), rng.uniform(0.0, 1.0))
        coup = list(rng.standard_normal(3) + 1j * rng.standard_normal(3))
        hb_rows.append((mass.real, mass.imag, fm.verify_hb_equals_h_dagger(fs, mass, coup)))
    checks.append(check_le("H_B vs H^dag", max(r[-1] for r in hb_rows), tol["hb_rel"]))
    labels = np.linspace(-wq, wq, p["theorem_labels"])
    th_rows = []
    for word in p["theorem_words"]:
        g = fm.theorem_gap(fs, word, labels, ops)
        th_rows.append((" ".join(word), g))
        checks.append(check_le(f"surrogate gap [{' '.join(word)}]", g, tol["theorem_gap"]))
    k = fm.coordinate_ket(fs, 0.3)
    metrics = {
        "derivative_relation_leading": fm.derivative_relation_residual(fs, k, ops),
        "derivative_relation_exact": fm.derivative_relation_residual(fs, k, ops, exact=True),
        "momentum_ket_residual": fm.momentum_ket_residual(fs, fm.momentum_ket(fs, 0.4), ops),
        "fill_window_q": wq,
        "fill_window_p": wp,
        "eps1": fs.eps1,
    }
    return checks, metrics, {
        "coordinate_ket_residuals": (("q_re", "q_im", "n_levels", "residual"), ket_rows),
        "fourier_kernel": (("q", "p", "kernel_re", "kernel_im", "target_re", "target_im", "rel_err"), f_rows),
        "hb_identity": (("mass_re", "mass_im", "rel_residual"), hb_rows),
        "theorem_gap": (("word", "gap"), th_rows),
    }


def scaling_samples(rng, n):
    """Draw ``(a, eps, q)`` with ``q`` inside the convergence domain of ``delta^eps(a q)``
    and the real direction inside the domain of ``delta^{eps/a^2}``."""
    out = []
    while len(out) < n:
        a = complex(rng.choice([-1.0, 1.0]) * rng.uniform(0.3, 2.0), rng.uniform(-1.5, 1.5))
        eps = 0.01 * complex(1.0, rng.uniform(-0.5, 0.5))
        q = complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) * 0.3
        z = a * a * q * q / eps
        if z.real > 0.05 * abs(z) and cc.scaling_branch_ok(a, eps):
            if cc.scaled_domain_ok(q, a, eps):
                out.append((a, eps, q))
    return out


def run_delta_sift(cfg):
    p, tol = cfg["params"], cfg["tolerances"]
    eps, q0, qt = p["epsilon"], p["q0"], p["quad_tol"]
    e1 = abs(cc.sift(np.cos, eps, q0, quad_tol=qt) - np.cos(q0))
    e2 = abs(cc.sift(np.cos, eps / 2, q0, quad_tol=qt) - np.cos(q0))
    ratio = e1 / e2
    norm = abs(cc.sift(np.ones_like, eps, q0, quad_tol=qt) - 1)
    rng = streams(cfg["seed"], 1)[0]
    samples = scaling_samples(rng, p["n_scaling_samples"])
    sc_rows = [
        (a.real, a.imag, e.real, e.imag, q.real, q.imag, cc.scaling_identity_residual(a, e, [q]))
        for a, e, q in samples
    ]
    w = cc.certified_window(eps, qt, p["theta"], q0)
    c_real = cc.real_axis(w, q0)
    c_tilt = cc.tilted(p["theta"], w, q0)
    c_zig = cc.zigzag(np.pi / 5, w, q0, teeth=6)
    vals = {c.name: cc.sift(np.cos, eps, q0, c, qt) for c in (c_real, c_tilt, c_zig)}
    ref = vals[c_real.name]
    agree = max(abs(v - ref) for v in vals.values())
    bad = cc.validate_contour(cc.tilted(np.pi / 3, 1.0))
    checks = [
        check_le("sifting error at eps", e1, tol["sift"]),
        Check("eps-halving error ratio", tol["ratio_min"] <= ratio <= tol["ratio_max"], ratio, tol["ratio_max"], f"range [{tol['ratio_min']}, {tol['ratio_max']}]"),
        check_le("normalization", norm, tol["normalization"]),
        check_le("scaling identity residual", max(r[-1] for r in sc_rows), tol["scaling"]),
        check_le("contour agreement", agree, tol["contour_agreement"]),
    ]
    metrics = {
        "sift_error_half": e2,
        "contour_values": [complex(v) for v in vals.values()],
        "steep_line_violations": len(bad),
        "window": w,
    }
    return checks, metrics, {
        "scaling_identity": (("a_re", "a_im", "eps_re", "eps_im", "q_re", "q_im", "residual"), sc_rows),
        "sifting": (("epsilon", "error"), [(eps, e1), (eps / 2, e2)]),
    }


def run_ehrenfest(cfg):
    p, tol, tm = cfg["params"], cfg["tolerances"], cfg["times"]
    fs = fock_space(cfg)
    mass, coup = hamiltonian_params(cfg)
    rng = streams(cfg["seed"], 1)[0]
    a = boundary_vector(fs, cfg["boundary"]["a"], rng)
    b = boundary_vector(fs, cfg["boundary"]["b"], rng)
    bp, h = fi.fock_boundary_pair(fs, mass, coup, a, b, tm["t_a"], tm["t_b"])
    ops = fm.build_operators(fs)
    r = fi.ehrenfest_check(fs, bp, mass, coup, tm["t"], p["dt_fd"], ops)
    layer = [r.layer_q, r.layer_p]
    for _ in range(p["n_random_ops"]):
        o = rng.standard_normal((fs.n_levels,) * 2) + 1j * rng.standard_normal((fs.n_levels,) * 2)
        layer.append(fi.layer_identity_residual(bp, o, tm["t"], h))
    ts = np.linspace(tm["t_a"], tm["t_b"], tm["n_overlap"])
    ov = np.array([fi.overlap_ba(bp, t) for t in ts])
    spread = np.abs(ov - ov[0]).max() / abs(ov[0])
    checks = [
        check_le("layer identity", max(layer), tol["layer"]),
        check_le("Ehrenfest r1", r.r1, tol["r1"]),
        check_le("Ehrenfest r2", r.r2, tol["r2"]),
        check_le("<B|A> relative spread", spread, tol["overlap_spread"]),
    ]
    metrics = {"r3": r.r3, "cond_p": bp.h.cond_p, "dq_dt": r.dq_dt, "p_over_m": r.p_over_m}
    rows = [(t, o.real, o.imag) for t, o in zip(ts, ov)]
    return checks, metrics, {"overlap": (("t", "overlap_re", "overlap_im"), rows)}


def run_current_continuity(cfg):
    p, tol, tm, cs = cfg["params"], cfg["tolerances"], cfg["times"], cfg["contour"]
    mass, coup = hamiltonian_params(cfg)
    rng = streams(cfg["seed"], 1)[0]
    rows, node_rows = [], []
    per_n = {}
    for n in p["levels"]:
        fs = fock_space(cfg, n)
        a = boundary_vector(fs, cfg["boundary"]["a"], rng)
        b = boundary_vector(fs, cfg["boundary"]["b"], rng)
        bp, h = fi.fock_boundary_pair(fs, mass, coup, a, b, tm["t_a"], tm["t_b"])
        nodes = cc.real_axis(cs["residual_window"]).nodes()
        dc = fi.probability_density_current(fs, bp, nodes, tm["t"], mass, h)
        w = fill_window(fs)
        ints = [fi.density_integral(fs, bp, cc.preset(name, w), tm["t"]) for name in cs["presets"]]
        res = float(dc.residual.max())
        per_n[n] = (res, ints)
        rows.append((n, w, res, float(np.abs(dc.drho_dt).max())) + tuple(abs(i - 1) for i in ints))
        if n == p["levels"][-1]:
            node_rows = [
                (x.real, r_.real, r_.imag, j.real, j.imag, e)
                for x, r_, j, e in zip(dc.nodes, dc.rho, dc.current, dc.residual)
            ]
    n_hi, n_mid = p["levels"][-1], p["levels"][-2]
    ratio = per_n[n_mid][0] / per_n[n_hi][0]
    ints = per_n[n_hi][1]
    checks = [check_ge(f"continuity residual ratio N={n_mid}->{n_hi}", ratio, tol["residual_ratio"])]
    for name, val in zip(cs["presets"], ints):
        checks.append(check_le(f"|int rho - 1| on {name}", abs(val - 1), tol["norm"]))
    checks.append(check_le("contour agreement", abs(ints[0] - ints[1]), tol["contour_agreement"]))
    metrics = {
        "residual_by_n": [per_n[n][0] for n in p["levels"]],
        "integral_by_contour": [complex(v) for v in ints],
    }
    header = ("n_levels", "window", "residual_max", "drho_dt_max") + tuple(f"norm_err[{c}]" for c in cs["presets"])
    return checks, metrics, {
        "refinement": (header, rows),
        "nodes": (("q", "rho_re", "rho_im", "j_re", "j_im", "residual"), node_rows),
    }


def gapped_model(rng, p):
    """Random ``P`` with prescribed ``Im(lambda)`` levels and sorted uniform real parts."""
    im = np.asarray(p["im_levels"], dtype=float)
    lam = np.sort(rng.uniform(-2, 2, p["dim"])) + 1j * im
    h = sc.random_diagonalizable(rng, p["dim"], p["cond_max"], lam)
    return h, sc.decompose(h)


def run_correspondence_sweep(cfg):
    p, tol, tm = cfg["params"], cfg["tolerances"], cfg["times"]
    rng = streams(cfg["seed"], 1)[0]
    h, s = gapped_model(rng, p)
    d = p["dim"]
    # no component along the second level, so the A-side gap is the next one down
    alpha = np.r_[1.0, 0.0, rng.standard_normal(d - 2) + 1j * rng.standard_normal(d - 2)]
    a0 = s.p @ alpha
    b0 = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    o = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    o = o + o.conj().T
    scale = np.linalg.norm(o, 2)
    im = np.sort(s.eigenvalues.imag)[::-1]
    gap_b = im[0] - im[1]
    gap_a = im[0] - s.eigenvalues.imag[np.flatnonzero(alpha)[1:]].max()
    t_a = tm["t_a"]
    mb, ma = tm["margin_b"] / gap_b, tm["margin_a"] / gap_a
    t_b = t_a + ma + mb + tm["extra"]
    bp = fi.BoundaryPair(a0, b0, t_a, t_b, s)
    ts = np.linspace(t_a + 1.0, t_b - 1.0, tm["n_times"])
    rep = fi.correspondence_check(bp, o, ts)
    win = (t_b - ts >= mb) & (ts - t_a >= ma)
    dev_win = rep.deviation[win].max() / scale
    fit = (ts - t_a >= ma) & (rep.deviation > 1e3 * np.finfo(float).eps * scale)
    slope_b = fi.fitted_rate(t_b - ts[fit], rep.deviation[fit])
    span = np.linspace(5.0, t_b - t_a - mb - 5.0, p["slope_points"])
    dev_a = []
    t_hold = t_b - mb
    for x in span:
        bp2 = fi.BoundaryPair(a0, b0, t_hold - x, t_b, s)
        dev_a.append(fi.correspondence_check(bp2, o, [t_hold]).deviation[0])
    slope_a = fi.fitted_rate(span, dev_a)
    t_mid = 0.5 * (t_a + t_b)
    sinc_rows = []
    for dt in p["delta_t"]:
        _, sm = fi.smear_projector(bp, t_mid, dt)
        raw = fi.projector_coeffs_b(bp, t_mid)
        for i in range(d):
            for j in range(d):
                if i == j:
                    continue
                ratio = sm[i, j] / raw[i, j]
                lam_i, lam_j = s.eigenvalues[i], s.eigenvalues[j]
                sinc = fi.sinc_factor(lam_i, lam_j, dt)
                exact = fi.smearing_factor(lam_i, lam_j, dt)
                im_sum = lam_i.imag + lam_j.imag
                sinc_rows.append((dt, i, j, im_sum, ratio.real, ratio.imag, sinc, abs(ratio - sinc), abs(ratio - exact)))
    sr = np.array(sinc_rows, dtype=float)
    balanced = np.abs(sr[:, 3]) < 1e-12
    checks = [
        check_le("window deviation / scale(O)", dev_win, tol["window"]),
        check_le("slope vs T_B - t relative to -2 gap_b", abs(slope_b / (-2 * gap_b) - 1), tol["slope_rel"], f"slope {slope_b:.6g}"),
        check_le("slope vs t - T_A relative to -gap_a", abs(slope_a / (-gap_a) - 1), tol["slope_rel"], f"slope {slope_a:.6g}"),
        check_le("smeared off-diagonal vs sinc", sr[:, 7].max(), tol["sinc"]),
    ]
    metrics = {
        "gap_a": gap_a,
        "gap_b": gap_b,
        "slope_b": slope_b,
        "slope_a": slope_a,
        "sinc_err_balanced_pairs": sr[balanced, 7].max() if balanced.any() else float("nan"),
        "sinhc_err_all_pairs": sr[:, 8].max(),
        "cond_p": s.cond_p,
    }
    header = ("t", "tb_minus_t", "t_minus_ta", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "deviation", "envelope_b", "envelope_a")
    return checks, metrics, {
        "deviation": (header, list(rep.rows(t_a, t_b))),
        "a_side_sweep": (("t_minus_ta", "deviation"), list(zip(span, dev_a))),
        "smearing": (("delta_t", "i", "j", "im_sum", "ratio_re", "ratio_im", "sinc", "sinc_err", "sinhc_err"), sinc_rows),
    }


def run_bprojector_falsify(cfg):
    p, tol, tm = cfg["params"], cfg["tolerances"], cfg["times"]
    rng = streams(cfg["seed"], 1)[0]
    h, s = gapped_model(rng, p)
    d = p["dim"]
    im = np.sort(s.eigenvalues.imag)[::-1]
    gap_b = im[0] - im[1]
    t_b = tm["t_b"]
    basis = np.eye(d, dtype=complex)
    ts = np.linspace(0.0, t_b, tm["n_times"])
    dist = np.array([fi.projector_distance(fi.mixture_projector(s, basis, t, t_b), d) for t in ts])
    far = (t_b - ts) * gap_b >= tm["far_margin"]
    dt = p["dt_fd"]
    fd = (fi.mixture_projector(s, basis, t_b + dt, t_b) - fi.mixture_projector(s, basis, t_b - dt, t_b)) / (2 * dt)
    drift = fi.projector_drift_prediction(h, d)
    checks = [
        check_ge("distance from I/N far from T_B (min)", dist[far].min(), tol["far"]),
        check_le("distance from I/N at T_B", dist[-1], tol["at_tb"]),
    ]
    metrics = {
        "gap_b": gap_b,
        "drift_prediction_error": float(np.abs(fd - drift).max()),
        "drift_norm": float(np.linalg.norm(drift)),
    }
    rows = [(t, t_b - t, x) for t, x in zip(ts, dist)]
    return checks, metrics, {"distance": (("t", "tb_minus_t", "distance"), rows)}


RUNNERS = {
    "spectral-props": run_spectral_props,
    "hermiticity-demo": run_hermiticity_demo,
    "fock-checks": run_fock_checks,
    "delta-sift": run_delta_sift,
    "ehrenfest": run_ehrenfest,
    "current-continuity": run_current_continuity,
    "correspondence-sweep": run_correspondence_sweep,
    "bprojector-falsify": run_bprojector_falsify,
}


def run_scenario(cfg):
    """Run a resolved config.  Domain errors become a failing check."""
    name = cfg["scenario"]
    t0 = time.perf_counter()
    try:
        checks, metrics, tables = RUNNERS[name](cfg)
    except CatsimError as exc:
        checks = [Check(f"run completed ({type(exc).__name__})", False, float("nan"), float("nan"), str(exc))]
        metrics, tables = {}, {}
    return RunReport(name, cfg, checks, metrics, tables, time.perf_counter() - t0)


def format_value(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_, int, np.integer)):
        return str(int(x))
    return f"{float(x):.16e}"


def write_csv(path, header, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_value(x) for x in row) + "\n")


def write_outputs(report, out_dir):
    """Write one CSV per table and ``report.json``; returns the written paths."""
    import json

    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name in sorted(report.tables):
        header, rows = report.tables[name]
        path = os.path.join(out_dir, f"{report.scenario}_{name}.csv")
        write_csv(path, header, rows)
        paths.append(path)
    path = os.path.join(out_dir, f"{report.scenario}_report.json")
    with open(path, "w", newline="\n") as fh:
        json.dump(report.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths.append(path)
    return paths
