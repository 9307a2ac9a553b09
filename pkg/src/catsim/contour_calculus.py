"""Complex contours, Gauss-Legendre quadrature and the smeared delta function.

``delta_c^eps(q) = sqrt(1/(4 pi eps)) exp(-q^2 / (4 eps))`` converges as a
delta function along paths whose tangent stays within pi/4 of the real axis.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import BranchAmbiguity, NoConvergence

THETA_MARGIN = 0.01
QUAD_TOL = 1e-10
MAX_REFINE = 12


@lru_cache(maxsize=None)
def _leggauss(n):
    return np.polynomial.legendre.leggauss(n)


@dataclass(frozen=True)
class Segment:
    """Straight piece ``q(s) = start + s (end - start)``, ``s in [0, 1]``."""

    start: complex
    end: complex
    nodes: int = 24

    @property
    def tangent(self):
        return complex(self.end) - complex(self.start)

    def angle(self):
        return cmath.phase(self.tangent)

    def quadrature(self, panels=1):
        """Composite Gauss-Legendre nodes and complex weights ``dq``."""
        x, w = _leggauss(self.nodes)
        edges = np.linspace(0.0, 1.0, panels + 1)
        half = 0.5 * (edges[1:] - edges[:-1])
        mid = 0.5 * (edges[1:] + edges[:-1])
        s = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        ws = (half[:, None] * w[None, :]).ravel()
        q = complex(self.start) + s * self.tangent
        return q, ws * self.tangent


@dataclass(frozen=True)
class Contour:
    """Chain of straight segments approximating a path from -inf to +inf.

    ``window`` records the real extent actually realized; integrands must be
    negligible beyond it.
    """

    segments: tuple
    name: str = "contour"
    window: float = field(default=np.nan)

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise ValueError("contour needs at least one segment")
        for a, b in zip(segs[:-1], segs[1:]):
            if abs(complex(a.end) - complex(b.start)) > 1e-12 * max(1.0, abs(a.end)):
                raise ValueError("segments are not chained")
        object.__setattr__(self, "segments", segs)
        if np.isnan(self.window):
            w = max(abs(complex(segs[0].start).real), abs(complex(segs[-1].end).real))
            object.__setattr__(self, "window", float(w))

    @property
    def start(self):
        return complex(self.segments[0].start)

    @property
    def end(self):
        return complex(self.segments[-1].end)

    def quadrature(self, panels=1):
        qs, ws = zip(*(s.quadrature(panels) for s in self.segments))
        return np.concatenate(qs), np.concatenate(ws)

    def nodes(self, panels=1):
        return self.quadrature(panels)[0]

    @classmethod
    def from_spec(cls, spec, name="custom"):
        """Build from ``[{"type": "line", "from": [re, im], "to": [re, im], "nodes": n}, ...]``."""
        segs = []
        for item in spec:
            kind = item.get("type", "line")
            if kind != "line":
                raise ValueError(f"unsupported segment type {kind!r}")
            a = complex(*item["from"])
            b = complex(*item["to"])
            segs.append(Segment(a, b, int(item.get("nodes", 24))))
        return cls(tuple(segs), name)

    def to_spec(self):
        return [
            {
                "type": "line",
                "from": [complex(s.start).real, complex(s.start).imag],
                "to": [complex(s.end).real, complex(s.end).imag],
                "nodes": s.nodes,
            }
            for s in self.segments
        ]


def real_axis(window, center=0.0, pieces=4, nodes=24):
    """Real segment ``[center - window, center + window]``."""
    c = float(np.real(center))
    edges = np.linspace(c - window, c + window, pieces + 1)
    segs = tuple(Segment(complex(a), complex(b), nodes) for a, b in zip(edges[:-1], edges[1:]))
    return Contour(segs, "real-axis", window)


def tilted(theta, window, pivot=0.0, pieces=4, nodes=24):
    """Straight line through ``pivot`` at angle ``theta``, spanning ``+-window`` in Re q."""
    pivot = complex(pivot)
    slope = np.tan(theta)
    pts = np.linspace(-window, window, pieces + 1)
    z = [pivot + x + 1j * slope * x for x in pts]
    segs = tuple(Segment(a, b, nodes) for a, b in zip(z[:-1], z[1:]))
    return Contour(segs, f"tilted({theta:g})", window)


def zigzag(max_angle, window, center=0.0, teeth=4, nodes=24):
    """Sawtooth of ``2 * teeth`` pieces alternating between angles ``+-max_angle``.

    Starts and ends on the real axis line ``Im q = Im center``.
    """
    center = complex(center)
    n = 2 * teeth
    xs = np.linspace(-window, window, n + 1)
    h = np.tan(max_angle) * (xs[1] - xs[0])
    ys = np.array([0.0 if k % 2 == 0 else h for k in range(n + 1)])
    z = [center + x + 1j * y for x, y in zip(xs, ys)]
    segs = tuple(Segment(a, b, nodes) for a, b in zip(z[:-1], z[1:]))
    return Contour(segs, f"zigzag({max_angle:g})", window)


def certified_window(eps, quad_tol=QUAD_TOL, theta=0.0, extra=0.0):
    """Half-width ``W`` with Gaussian tail ``exp(-W^2 cos(2 theta) / (4 |eps|)) < 0.01 quad_tol``.

    ``extra`` adds the distance of the delta centre from the pivot.
    """
    c2 = np.cos(2 * theta)
    if c2 <= 0:
        raise ValueError("tilt angle outside the convergence cone")
    return float(np.sqrt(4 * abs(eps) * np.log(100.0 / quad_tol) / c2)) + abs(extra)


def gaussian_tail_bound(window, eps, theta=0.0):
    """Upper bound on the delta-function mass beyond ``|Re(q - q0)| > window``."""
    return float(np.exp(-(window**2) * np.cos(2 * theta) / (4 * abs(eps))))


PRESETS = ("real-axis", "tilted", "zigzag")


def preset(name, window, center=0.0, theta=np.pi / 8, **kw):
    """Look up a named contour preset.

    ``name`` may be ``"real-axis"``, ``"tilted"`` (or ``"tilted(0.39)"``) or
    ``"zigzag"`` (or ``"zigzag(0.6)"``).
    """
    base, _, arg = name.partition("(")
    if arg:
        theta = float(arg.rstrip(")"))
    if base == "real-axis":
        return real_axis(window, center, **kw)
    if base == "tilted":
        return tilted(theta, window, center, **kw)
    if base == "zigzag":
        return zigzag(theta if arg else np.pi / 5, window, center, **kw)
    raise KeyError(f"unknown contour preset {name!r}; valid: {', '.join(PRESETS)}")


def validate_contour(c, theta_margin=THETA_MARGIN):
    """Return a list of human-readable violations (empty when compliant)."""
    out = []
    limit = np.pi / 4 - theta_margin
    for k, seg in enumerate(c.segments):
        t = seg.tangent
        if t.real <= 0:
            out.append(f"segment {k}: Re q not increasing")
        ang = abs(cmath.phase(t)) if t != 0 else np.pi
        if ang >= limit:
            q, _ = seg.quadrature()
            for j, qq in enumerate(q):
                out.append(f"segment {k} node {j} at {qq:.6g}: |angle| {ang:.4f} >= {limit:.4f}")
    return out


@dataclass(frozen=True)
class SmearedDelta:
    epsilon: complex
    center: complex = 0.0


def delta_value(d, q):
    """``sqrt(1/(4 pi eps)) exp(-(q - q0)^2 / (4 eps))`` on the principal branch."""
    eps = complex(d.epsilon)
    z = np.asarray(q, dtype=complex) - complex(d.center)
    return np.sqrt(1.0 / (4 * np.pi * eps)) * np.exp(-(z**2) / (4 * eps))


def delta_peak(eps):
    return complex(np.sqrt(1.0 / (4 * np.pi * complex(eps))))


def domain_ok(q):
    """``(Re q)^2 > (Im q)^2``."""
    q = complex(q)
    return q.real**2 > q.imag**2


def _scaled_window_form(q, a, eps):
    q, a, eps = complex(q), complex(a), complex(eps)
    shift = 0.5 * (cmath.phase(eps) - 2 * cmath.phase(a))
    phi = cmath.phase(q) - shift
    # windows (-pi/4, pi/4) and (3pi/4, 5pi/4) shifted by `shift`, mod 2 pi
    r = (phi + np.pi / 4) % np.pi
    return 0.0 < r < np.pi / 2


def _scaled_re_form(q, a, eps):
    q, a, eps = complex(q), complex(a), complex(eps)
    return (a * a * q * q / eps).real > 0


def scaled_domain_ok(q, a, eps, boundary_tol=1e-9):
    """Convergence domain of ``delta_c^eps(a q)``.

    Evaluates the angular-window form and ``Re(a^2 q^2 / eps) > 0`` and asserts
    they agree away from the boundary.
    """
    if complex(a) == 0 or complex(eps) == 0:
        raise ValueError("a and eps must be nonzero")
    w = _scaled_window_form(q, a, eps)
    r = _scaled_re_form(q, a, eps)
    if w != r:
        z = complex(a) ** 2 * complex(q) ** 2 / complex(eps)
        if abs(z.real) > boundary_tol * abs(z):
            raise AssertionError(f"domain forms disagree at q={q}, a={a}, eps={eps}")
    return r


def sign_re(a):
    """Sign of ``Re a``; undefined (raises) on the imaginary axis."""
    re = complex(a).real
    if re == 0:
        raise BranchAmbiguity("sign(Re a) is undefined for Re a = 0")
    return 1.0 if re > 0 else -1.0


def scaling_branch_ok(a, eps):
    """True when ``sign(Re a)`` selects the principal branch of ``sqrt(eps / a^2)``.

    Holds if ``Re eps > 0`` and ``Re(a^2 / eps) > 0``, i.e. the real direction
    lies inside the convergence domain of ``delta^{eps/a^2}``.  Outside this the
    two sides of the scaling identity can differ by an overall sign.
    """
    a, eps = complex(a), complex(eps)
    return eps.real > 0 and (a * a / eps).real > 0


def scaling_identity_residual(a, eps, q_samples):
    """``max |delta^eps(a q) - sign(Re a)/a delta^{eps/a^2}(q)| / |peak|``."""
    a = complex(a)
    eps = complex(eps)
    sgn = sign_re(a)
    q = np.asarray(q_samples, dtype=complex)
    lhs = delta_value(SmearedDelta(eps), a * q)
    rhs = sgn / a * delta_value(SmearedDelta(eps / a**2), q)
    return float(np.abs(lhs - rhs).max() / abs(delta_peak(eps)))


def contour_integrate(c, f, quad_tol=QUAD_TOL, max_refine=MAX_REFINE, full_output=False):
    """Integrate ``f(q) dq`` along ``c`` with panel doubling.

    Converged when successive refinements differ by less than
    ``quad_tol * max(|I|, 1e-300)``.  ``f`` must accept an array of nodes.
    """
    prev = None
    panels = 1
    for _ in range(max_refine + 1):
        q, w = c.quadrature(panels)
        val = complex(np.sum(np.asarray(f(q)) * w))
        if prev is not None:
            err = abs(val - prev)
            if err <= quad_tol * max(abs(val), 1e-300):
                return (val, err) if full_output else val
        prev = val
        panels *= 2
    raise NoConvergence(f"no convergence after {max_refine} doublings")


def contour_integrate_vector(c, f, quad_tol=QUAD_TOL, max_refine=MAX_REFINE):
    """Like :func:`contour_integrate` for ``f`` returning arrays of shape ``(n_nodes, ...)``."""
    prev = None
    panels = 1
    for _ in range(max_refine + 1):
        q, w = c.quadrature(panels)
        val = np.tensordot(w, np.asarray(f(q)), axes=(0, 0))
        if prev is not None:
            err = np.abs(val - prev).max()
            if err <= quad_tol * max(np.abs(val).max(), 1e-300):
                return val
        prev = val
        panels *= 2
    raise NoConvergence(f"no convergence after {max_refine} doublings")


def sift(f, eps, q0=0.0, contour=None, quad_tol=1e-12):
    """``int_C f(q) delta_c^eps(q - q0) dq`` on a certified real-axis window by default."""
    if contour is None:
        contour = real_axis(certified_window(eps, quad_tol), q0)
    d = SmearedDelta(eps, q0)
    return contour_integrate(contour, lambda q: f(q) * delta_value(d, q), quad_tol=quad_tol)
