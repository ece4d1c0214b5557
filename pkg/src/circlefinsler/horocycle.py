"""Horocycle geometry of the hyperbolic plane in the hyperboloid model.

Everything lives in R^3 with the pairing [x, y] = -x1 y1 - x2 y2 + x3 y3:
the plane is the sheet [x, x] = 1, x3 > 0 with metric g(v, w) = -[v, w], the
horocycles are the loci [xi, x] = 1 for xi on the upper light cone, and the
horocycle tangent to the unit normal v at x is labeled by xi = x + v.

The contrast case to the sphere: horocycles form a cooriented family (only
one horocycle is tangent to a contact element per side), the induced metrics
from the invariant measure and from its xi3-weighted variant are respectively
the hyperbolic metric (times a constant) and a conformal multiple of it, and
those two metrics have different unparameterized geodesics.
"""

from __future__ import annotations

import numpy as np

from .metric import _abs_product_integral
from .geodesics import integrate_euler_lagrange

_G = np.array([-1.0, -1.0, 1.0])  # pairing signature


def pair(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Lorentzian pairing [x, y] = -x1 y1 - x2 y2 + x3 y3."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.sum(x * _G * y, axis=-1)


def check_point(x: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(pair(x, x) - 1.0) > tol) or np.any(x[..., 2] <= 0):
        raise ValueError("not a point of the upper hyperboloid sheet")
    return x


def check_tangent(x: np.ndarray, v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if np.any(np.abs(pair(x, v)) > tol) or np.any(np.abs(pair(v, v) + 1.0) > tol):
        raise ValueError("not a unit tangent vector")
    return v


def check_lightcone(xi: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    if np.any(np.abs(pair(xi, xi)) > tol) or np.any(xi[..., 2] <= 0):
        raise ValueError("not on the upper light cone")
    return xi


def tangent_frame_h(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """g-orthonormal tangent frame at hyperboloid points (no seam)."""
    x = np.asarray(x, dtype=float)
    e_ref = np.zeros_like(x)
    e_ref[..., 0] = 1.0
    v = e_ref - pair(e_ref, x)[..., None] * x
    e1 = v / np.sqrt(-pair(v, v))[..., None]
    w = np.cross(_G * x, _G * e1)
    e2 = w / np.sqrt(-pair(w, w))[..., None]
    return e1, e2


def horocycle_of(x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Label of the horocycle through x cooriented by the unit normal v."""
    x = check_point(x)
    v = check_tangent(x, v)
    return x + v


def horocycle_points(xi: np.ndarray, x0: np.ndarray, s_values: np.ndarray) -> np.ndarray:
    """Parabolic parameterization x(s) = x0 + s w + (s^2/2) xi of a horocycle.

    Requires [xi, x0] = 1; w is the unit spacelike direction orthogonal to
    both.  Then [x, x] = 1 + s^2([xi, x0] - 1) = 1 and [xi, x] = 1 for all s,
    since the cross terms carry [w, x0] = [w, xi] = [xi, xi] = 0.
    """
    xi = check_lightcone(xi)
    x0 = check_point(x0)
    if abs(float(pair(xi, x0)) - 1.0) > 1e-10:
        raise ValueError("base point does not lie on the horocycle")
    w = np.cross(_G * x0, _G * xi)
    ww = -pair(w, w)
    if ww < 1e-20:
        raise ValueError("degenerate horocycle label")
    w = w / np.sqrt(ww)
    s = np.asarray(s_values, dtype=float)
    return x0 + s[..., None] * w + 0.5 * (s**2)[..., None] * xi


def hyp_geodesic(x: np.ndarray, v: np.ndarray, t: np.ndarray | float) -> np.ndarray:
    """Unit-speed geodesic x cosh t + v sinh t."""
    t = np.asarray(t, dtype=float)
    return np.cosh(t)[..., None] * x + np.sinh(t)[..., None] * v


def hyp_distance(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.arccosh(np.maximum(pair(x, y), 1.0))


def distance_to_geodesic(y: np.ndarray, x0: np.ndarray, v0: np.ndarray) -> np.ndarray:
    """Distance from y to the complete geodesic through (x0, v0)."""
    n = np.cross(_G * x0, _G * v0)
    n = n / np.sqrt(-pair(n, n))
    return np.arcsinh(np.abs(pair(y, n)))


# ---------------------------------------------------------------------------
# The two horocycle metrics
# ---------------------------------------------------------------------------

def fiber_density_h(weight: str, x: np.ndarray, n_theta: int):
    """Fiber density over the unit tangent circle at x, analytically.

    The label map is (x, v) -> x + v; its theta- and geodesic-variation
    derivatives are v'(theta) and v(theta) + x, and the invariant measure
    evaluates through the (d xi1 wedge d xi2) component divided by xi3; the
    ``xi3`` weight drops that division.
    """
    if weight not in ("unit", "xi3"):
        raise ValueError("weight must be 'unit' or 'xi3'")
    e1, e2 = tangent_frame_h(x)
    th = 2.0 * np.pi * np.arange(n_theta) / n_theta
    v = np.cos(th)[:, None] * e1 + np.sin(th)[:, None] * e2
    dv = -np.sin(th)[:, None] * e1 + np.cos(th)[:, None] * e2
    u1 = dv
    u2 = v + x
    xi = x + v
    wedge = np.abs(u1[:, 0] * u2[:, 1] - u1[:, 1] * u2[:, 0])
    rho = wedge if weight == "xi3" else wedge / xi[:, 2]
    return th, v, rho


def finsler_F_h(weight: str, x: np.ndarray, v_dir: np.ndarray, n_theta: int = 256) -> float:
    """Metric value at a unit tangent direction from a horocycle measure.

    weight "unit" gives an isometry-invariant metric (a constant multiple of
    the hyperbolic metric); "xi3" gives its conformal multiple by x3.
    """
    x = check_point(x)
    v_dir = check_tangent(x, v_dir)
    th, v, rho = fiber_density_h(weight, x, n_theta)
    s = -pair(v, v_dir)
    s_next = np.roll(s, -1)
    r_next = np.roll(rho, -1)
    width = 2.0 * np.pi / n_theta
    return float(np.sum(_abs_product_integral(s, s_next, rho, r_next, width)))


# ---------------------------------------------------------------------------
# Crofton oracle over the truncated light cone
# ---------------------------------------------------------------------------

def _segment_crossings(a, b, length, tol=1e-12):
    """Zero count of A cosh t + B sinh t - 1 on [0, length], vectorized.

    A > 0 for labels on the upper cone against hyperboloid points, so the
    cosh-dominant branch has at most two roots and the sinh-dominant exactly
    one.
    """
    counts = np.zeros(a.shape, dtype=np.int64)
    flags = np.zeros(a.shape, dtype=bool)

    cosh_dom = np.abs(a) > np.abs(b)
    with np.errstate(invalid="ignore", divide="ignore"):
        d_c = np.sqrt(np.maximum(a * a - b * b, 0.0))
        t0_c = -np.arctanh(np.where(cosh_dom, b / np.where(a == 0, 1, a), 0.0))
        reach = cosh_dom & (d_c <= 1.0) & (d_c > 0)
        u = np.arccosh(np.where(reach, 1.0 / np.where(d_c == 0, 1, d_c), 1.0))
        for sgn in (1.0, -1.0):
            t = t0_c + sgn * u
            counts += (reach & (t >= 0) & (t <= length)).astype(np.int64)
        flags |= cosh_dom & (np.abs(d_c - 1.0) < tol)

        sinh_dom = np.abs(a) < np.abs(b)
        d_s = np.sqrt(np.maximum(b * b - a * a, 0.0)) * np.sign(b)
        t0_s = -np.arctanh(np.where(sinh_dom, a / np.where(b == 0, 1, b), 0.0))
        t = t0_s + np.arcsinh(np.where(sinh_dom, 1.0 / np.where(d_s == 0, 1, d_s), 0.0))
        counts += (sinh_dom & (t >= 0) & (t <= length)).astype(np.int64)

        flags |= np.abs(np.abs(a) - np.abs(b)) < tol
    return counts, flags


def horocycle_crofton_length(
    x0: np.ndarray,
    v0: np.ndarray,
    length: float,
    n_r: int = 512,
    n_phi: int = 1024,
) -> float:
    """Unit-weight horocycle intersection count against a geodesic segment.

    The light cone is truncated to the exact r-window outside which no
    horocycle can meet the segment (from [xi, x] = 1); the invariant measure
    in the (r, phi) coordinates xi = (r cos phi, r sin phi, r) is evaluated
    numerically through its two-derivative formula.
    """
    x0 = check_point(x0)
    v0 = check_tangent(x0, v0)
    ts = np.linspace(0.0, length, 65)
    seg = hyp_geodesic(x0, v0, ts)
    radial = np.hypot(seg[:, 0], seg[:, 1])
    r_lo = (1.0 / (seg[:, 2] + radial)).min() * 0.99
    r_hi = (1.0 / (seg[:, 2] - radial)).max() * 1.01

    r_edges = np.linspace(r_lo, r_hi, n_r + 1)
    phi_edges = np.linspace(0.0, 2.0 * np.pi, n_phi + 1)
    r_mid = 0.5 * (r_edges[:-1] + r_edges[1:])
    phi_mid = 0.5 * (phi_edges[:-1] + phi_edges[1:])
    dr = r_edges[1] - r_edges[0]
    dphi = phi_edges[1] - phi_edges[0]

    rr, pp = np.meshgrid(r_mid, phi_mid, indexing="ij")
    xi = np.stack([rr * np.cos(pp), rr * np.sin(pp), rr], axis=-1)

    # measure density in (r, phi) by central differences of (xi1, xi2)
    h = 1e-6
    d_r = (np.stack([(rr + h) * np.cos(pp), (rr + h) * np.sin(pp)], -1)
           - np.stack([(rr - h) * np.cos(pp), (rr - h) * np.sin(pp)], -1)) / (2 * h)
    d_phi = (np.stack([rr * np.cos(pp + h), rr * np.sin(pp + h)], -1)
             - np.stack([rr * np.cos(pp - h), rr * np.sin(pp - h)], -1)) / (2 * h)
    jac = np.abs(d_r[..., 0] * d_phi[..., 1] - d_r[..., 1] * d_phi[..., 0])
    weight = jac / xi[..., 2]

    a = pair(xi, x0)
    b = pair(xi, v0)
    counts, flags = _segment_crossings(a, b, length)
    if np.any(flags):
        # grazing cells: nudge the radius by a hair and re-evaluate
        idx = np.nonzero(flags)
        xi_j = xi[idx] * (1.0 + 1e-9)
        counts[idx] = _segment_crossings(pair(xi_j, x0), pair(xi_j, v0), length)[0]
    return float(np.sum(counts * weight) * dr * dphi)


# ---------------------------------------------------------------------------
# Conformal geodesics
# ---------------------------------------------------------------------------

class HyperboloidChart:
    """Chart a -> (c + a1 e1 + a2 e2)/sqrt(1 - |a|^2) around a center c."""

    def __init__(self, center: np.ndarray, e1: np.ndarray | None = None):
        self.center = np.asarray(center, dtype=float)
        if e1 is None:
            self.e1, self.e2 = tangent_frame_h(self.center)
        else:
            v = e1 - pair(e1, self.center) * self.center
            self.e1 = v / np.sqrt(-pair(v, v))
            w = np.cross(_G * self.center, _G * self.e1)
            self.e2 = w / np.sqrt(-pair(w, w))

    def _y(self, a):
        a = np.atleast_2d(a)
        return self.center + a[:, :1] * self.e1 + a[:, 1:] * self.e2, a

    def embed(self, a: np.ndarray) -> np.ndarray:
        y, a = self._y(a)
        s = np.sqrt(1.0 - np.sum(a * a, axis=-1, keepdims=True))
        return y / s

    def tangent(self, a: np.ndarray, v: np.ndarray) -> np.ndarray:
        y, a = self._y(a)
        v = np.atleast_2d(v)
        s2 = 1.0 - np.sum(a * a, axis=-1, keepdims=True)
        s = np.sqrt(s2)
        w = v[:, :1] * self.e1 + v[:, 1:] * self.e2
        av = np.sum(a * v, axis=-1, keepdims=True)
        return w / s + y * av / (s2 * s)

    def velocity_coords(self, w: np.ndarray) -> np.ndarray:
        return np.array([-pair(w, self.e1), -pair(w, self.e2)])


class ConformalEnergy:
    """E(a, v) = nu(x)^2 g(dx v, dx v) / 2 with conformal factor nu(x) = x3^p."""

    def __init__(self, exponent: float = 1.0):
        self.exponent = exponent

    def __call__(self, chart: HyperboloidChart, a: np.ndarray, v: np.ndarray) -> np.ndarray:
        x = chart.embed(a)
        w = chart.tangent(a, v)
        nu = x[:, 2] ** self.exponent if self.exponent != 0.0 else np.ones(x.shape[0])
        return 0.5 * nu * nu * (-pair(w, w))


def conformal_divergence(
    x0: np.ndarray,
    v0: np.ndarray,
    t_final: float,
    step: float = 1e-2,
    fd_step: float = 1e-4,
    exponent: float = 1.0,
) -> float:
    """Distance from the conformal-metric geodesic to the true geodesic line.

    Integrates the metric x3^exponent * g from (x0, v0) (normalized to unit
    conformal speed) and returns the hyperbolic distance of the endpoint from
    the complete geodesic of g through the same initial condition; exponent 0
    is the control case with identical geodesics.
    """
    x0 = check_point(x0)
    v0 = check_tangent(x0, v0)
    if t_final == 0.0:
        return 0.0
    nu0 = x0[2] ** exponent
    start_v = v0 / nu0
    energy = ConformalEnergy(exponent)
    _, pts, _, _ = integrate_euler_lagrange(
        energy,
        lambda c, e1: HyperboloidChart(c, e1),
        x0,
        start_v,
        t_final,
        step=step,
        fd_step=fd_step,
    )
    return float(distance_to_geodesic(pts[-1], x0, v0))


# ---------------------------------------------------------------------------
# Isometries (for invariance tests and boosted samples)
# ---------------------------------------------------------------------------

def boost_matrix(t: float, axis: int = 0) -> np.ndarray:
    m = np.eye(3)
    i = axis
    m[i, i] = np.cosh(t)
    m[i, 2] = np.sinh(t)
    m[2, i] = np.sinh(t)
    m[2, 2] = np.cosh(t)
    return m


def rotation_matrix(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def random_isometry(rng: np.random.Generator, max_boost: float = 1.5) -> np.ndarray:
    return (
        rotation_matrix(rng.uniform(0, 2 * np.pi))
        @ boost_matrix(rng.uniform(-max_boost, max_boost))
        @ rotation_matrix(rng.uniform(0, 2 * np.pi))
    )
