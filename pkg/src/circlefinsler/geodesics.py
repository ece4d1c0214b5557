"""Geodesic flow of the circle-family metrics and recovery of the measure.

The integrator works on the energy E = F^2/2 in a local gnomonic-style chart:
it solves (d/dt) dE/dv = dE/dx with all derivatives of E taken by central
differences, inverting the 2x2 velocity Hessian each stage (quadratic
convexity keeps it well conditioned).  Traces are the diagnostic for the
headline claim that the circles of the family are exactly the geodesics.

The converse direction reconstructs the fiber measure from the metric alone:
lift contact-element variations to the cotangent bundle through the velocity
gradient of F, evaluate the canonical symplectic form on the lifted pair, and
divide by the fiber-sphere area swept by the corresponding label variations;
a factor 1/4 converts the cotangent area to a density per unit label area.
Only the even part of the input density is recoverable, since the metric
itself is blind to the odd part.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circles import ContactElement, SphereCircle, circle_arc
from .metric import (
    DEFAULT_QUADRATURE,
    MeasureDensity,
    QuadratureSpec,
    fiber_profile_batch,
    finsler_F_batch,
    finsler_F_multi,
    finsler_length,
    profile_norm_values,
)
from .pathgeometry import KappaField, realize_circles_batch, tangent_circles_batch, tangent_circle
from .sphere import arc_angle, normalize, sphere_grid, tangent_frame, transported_frame


# ---------------------------------------------------------------------------
# Charts
# ---------------------------------------------------------------------------

class SphereChart:
    """Gnomonic-style chart: a -> normalize(center + a1 e1 + a2 e2)."""

    def __init__(self, center: np.ndarray, e1: np.ndarray | None = None):
        self.center = np.asarray(center, dtype=float)
        if e1 is None:
            self.e1, self.e2 = tangent_frame(self.center)
        else:
            self.e1, self.e2 = transported_frame(self.center, e1)

    def embed(self, a: np.ndarray) -> np.ndarray:
        a = np.atleast_2d(a)
        y = self.center + a[:, :1] * self.e1 + a[:, 1:] * self.e2
        return normalize(y)

    def tangent(self, a: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Push chart velocities forward to ambient tangent vectors."""
        a = np.atleast_2d(a)
        v = np.atleast_2d(v)
        y = self.center + a[:, :1] * self.e1 + a[:, 1:] * self.e2
        ny = np.linalg.norm(y, axis=-1, keepdims=True)
        x = y / ny
        w = v[:, :1] * self.e1 + v[:, 1:] * self.e2
        w = w - x * np.sum(x * w, axis=-1, keepdims=True)
        return w / ny

    def coords_of(self, point: np.ndarray) -> np.ndarray:
        point = np.asarray(point, dtype=float)
        d = float(point @ self.center)
        if d <= 0.1:
            raise ValueError("point outside chart domain")
        return np.array([point @ self.e1, point @ self.e2]) / d

    def velocity_coords(self, w: np.ndarray) -> np.ndarray:
        # valid at the chart origin, where the coordinate frame is orthonormal
        return np.array([w @ self.e1, w @ self.e2])


class SphereChartEnergy:
    """Batched chart energy E(a, v) = F(x(a), Dx(a) v)^2 / 2 for one metric."""

    def __init__(self, field: KappaField, density: MeasureDensity, spec: QuadratureSpec):
        self.field = field
        self.density = density
        self.spec = spec

    def __call__(self, chart: SphereChart, a: np.ndarray, v: np.ndarray) -> np.ndarray:
        a = np.atleast_2d(a)
        v = np.atleast_2d(v)
        # the stencil repeats a handful of base points; group exactly-equal rows
        uniq, inverse = np.unique(a, axis=0, return_inverse=True)
        pts = chart.embed(uniq)
        frames = transported_frame(pts, chart.e1)
        prof = fiber_profile_batch(self.field, self.density, pts, self.spec, frames=frames)
        w = chart.tangent(a, v)
        f = np.empty(a.shape[0])
        for k in range(uniq.shape[0]):
            sel = np.nonzero(inverse == k)[0]
            f[sel] = profile_norm_values(_profile_row(prof, k), w[sel][None, :, :])[0]
        return 0.5 * f * f


class _profile_row:
    """One-row view of a FiberProfile, reusable by profile_norm_values."""

    def __init__(self, profile, k: int):
        self.thetas = profile.thetas
        self.rho = profile.rho[k : k + 1]
        self.e1 = profile.e1[k : k + 1]
        self.e2 = profile.e2[k : k + 1]


# ---------------------------------------------------------------------------
# Euler-Lagrange stepping
# ---------------------------------------------------------------------------

def _el_rhs(energy, chart, state, h_a, h_v):
    """(a., v.) of the chart Euler-Lagrange system at one state.

    One batched energy call covers the full stencil: the velocity Hessian, the
    position gradient and the mixed velocity-position block.
    """
    a, v = state[:2], state[2:]
    ea = np.eye(2)
    rows_a = [a]
    rows_v = [v]
    for i in range(2):
        rows_a += [a, a]
        rows_v += [v + h_v * ea[i], v - h_v * ea[i]]
    for sx, sy in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
        rows_a.append(a)
        rows_v.append(v + h_v * (sx * ea[0] + sy * ea[1]))
    for j in range(2):
        for s in (1, -1):
            da = s * h_a * ea[j]
            rows_a.append(a + da); rows_v.append(v)
            for i in range(2):
                rows_a.append(a + da); rows_v.append(v + h_v * ea[i])
                rows_a.append(a + da); rows_v.append(v - h_v * ea[i])

    vals = energy(chart, np.array(rows_a), np.array(rows_v))
    e0 = vals[0]
    d11 = (vals[1] - 2 * e0 + vals[2]) / h_v**2
    d22 = (vals[3] - 2 * e0 + vals[4]) / h_v**2
    d12 = (vals[5] - vals[6] - vals[7] + vals[8]) / (4 * h_v**2)
    h_vv = np.array([[d11, d12], [d12, d22]])

    de_da = np.empty(2)
    h_va = np.empty((2, 2))
    idx = 9
    for j in range(2):
        packs = {}
        for s in (1, -1):
            e_here = vals[idx]
            gv = np.array(
                [
                    (vals[idx + 1] - vals[idx + 2]) / (2 * h_v),
                    (vals[idx + 3] - vals[idx + 4]) / (2 * h_v),
                ]
            )
            packs[s] = (e_here, gv)
            idx += 5
        de_da[j] = (packs[1][0] - packs[-1][0]) / (2 * h_a)
        h_va[:, j] = (packs[1][1] - packs[-1][1]) / (2 * h_a)

    det = h_vv[0, 0] * h_vv[1, 1] - h_vv[0, 1] * h_vv[1, 0]
    if not np.isfinite(det) or abs(det) < 1e-10:
        raise RuntimeError("velocity Hessian is numerically singular")
    vdot = np.linalg.solve(h_vv, de_da - h_va @ v)
    return np.concatenate([v, vdot])


def integrate_euler_lagrange(
    energy,
    make_chart,
    start_point: np.ndarray,
    start_velocity: np.ndarray,
    t_final: float,
    step: float = 1e-2,
    fd_step: float = 1e-4,
    recenter_radius: float = 0.1,
):
    """RK4 flow of the chart Euler-Lagrange system with chart re-centering.

    ``energy(chart, A, V)`` evaluates E batched; ``make_chart(point, e1_hint)``
    builds a fresh chart.  Returns times, ambient points, ambient velocities
    and the list of steps at which the chart was re-centered.
    """
    chart = make_chart(start_point, None)
    v0 = chart.velocity_coords(np.asarray(start_velocity, dtype=float))
    h_v = fd_step * max(np.linalg.norm(v0), 1e-9)
    h_a = fd_step

    n_steps = int(round(t_final / step))
    state = np.concatenate([np.zeros(2), v0])
    times = [0.0]
    pts = [chart.embed(state[:2])[0]]
    vels = [chart.tangent(state[:2], state[2:])[0]]
    recenters: list[int] = []
    for k in range(n_steps):
        k1 = _el_rhs(energy, chart, state, h_a, h_v)
        k2 = _el_rhs(energy, chart, state + 0.5 * step * k1, h_a, h_v)
        k3 = _el_rhs(energy, chart, state + 0.5 * step * k2, h_a, h_v)
        k4 = _el_rhs(energy, chart, state + step * k3, h_a, h_v)
        state = state + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(state)):
            raise RuntimeError("geodesic integration diverged")
        if np.linalg.norm(state[:2]) > recenter_radius:
            point = chart.embed(state[:2])[0]
            w = chart.tangent(state[:2], state[2:])[0]
            chart = make_chart(point, chart.e1)
            state = np.concatenate([np.zeros(2), chart.velocity_coords(w)])
            recenters.append(k + 1)
        times.append((k + 1) * step)
        pts.append(chart.embed(state[:2])[0])
        vels.append(chart.tangent(state[:2], state[2:])[0])
    return np.array(times), np.array(pts), np.array(vels), recenters


@dataclass
class GeodesicTrace:
    times: np.ndarray
    points: np.ndarray
    velocities: np.ndarray
    f_values: np.ndarray
    step: float
    recenters: list


def geodesic_trace(
    field: KappaField,
    density: MeasureDensity,
    element: ContactElement,
    t_final: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    step: float = 1e-2,
) -> GeodesicTrace:
    """Integrate the metric geodesic from a contact element, F-normalized.

    The initial velocity is the element tangent scaled to F = 1; the returned
    F values along the trace are the energy-conservation diagnostic.
    """
    p = element.point
    f0 = float(finsler_F_batch(field, density, p[None, :], element.tangent[None, :], spec)[0])
    if not np.isfinite(f0) or f0 <= 0.0:
        raise ValueError("cannot normalize: F vanishes on the initial velocity")
    v0 = element.tangent / f0

    energy = SphereChartEnergy(field, density, spec)
    times, pts, vels, recenters = integrate_euler_lagrange(
        energy,
        lambda c, e1: SphereChart(c, e1),
        p,
        v0,
        t_final,
        step=step,
        fd_step=spec.fd_step,
    )
    f_vals = finsler_F_batch(field, density, pts, vels, spec)
    return GeodesicTrace(times=times, points=pts, velocities=vels, f_values=f_vals,
                         step=step, recenters=recenters)


def circle_deviation(trace: GeodesicTrace, circle: SphereCircle) -> float:
    """Max over trace vertices of | angle(x, axis) - radius |."""
    ang = arc_angle(trace.points, circle.axis)
    return float(np.max(np.abs(ang - circle.radius)))


def local_minimality_check(
    field: KappaField,
    density: MeasureDensity,
    element: ContactElement,
    arc_len: float = 0.4,
    n_perturbations: int = 20,
    seed: int = 0,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> bool:
    """Compare the tangent-circle arc against seeded same-endpoint bumps.

    True when every nontrivial smooth perturbation is strictly longer than the
    arc segment (beyond quadrature tolerance).
    """
    if arc_len > 0.5:
        raise ValueError("minimality check is local: arc_len <= 0.5")
    _, circle = tangent_circle(field, element)
    s0 = circle_phase(circle, element.point)
    base = circle_arc(circle, s0, s0 + arc_len, 65)
    l_base = finsler_length(field, density, base, spec)

    s = np.linspace(0.0, 1.0, base.shape[0])
    nu = (circle.axis - np.cos(circle.radius) * base) / np.sin(circle.radius)
    rng = np.random.default_rng(seed)
    ok = True
    for _ in range(n_perturbations):
        amp = rng.uniform(0.01, 0.05)
        mode = int(rng.integers(1, 4))
        delta = amp * np.sin(mode * np.pi * s)
        pert = normalize(base + delta[:, None] * nu)
        l_pert = finsler_length(field, density, pert, spec)
        if l_pert < l_base * (1.0 + 1e-6):
            ok = False
    return ok


def circle_phase(circle: SphereCircle, point: np.ndarray) -> float:
    """Arclength parameter of a point on the circle (inverse of circle_point)."""
    e1, e2 = tangent_frame(circle.axis)
    c1, c2 = e2, np.cross(circle.axis, e2)
    w = np.asarray(point, dtype=float) - np.cos(circle.radius) * circle.axis
    u = np.arctan2(w @ c2, w @ c1)
    return float(u * np.sin(circle.radius))


# ---------------------------------------------------------------------------
# Legendre transform and measure recovery
# ---------------------------------------------------------------------------

def _chart_embed(centers, e1, e2, a):
    y = centers + a[..., :1] * e1 + a[..., 1:] * e2
    return normalize(y), np.linalg.norm(y, axis=-1)


def _chart_tangent(centers, e1, e2, a, v):
    x, ny = _chart_embed(centers, e1, e2, a)
    w = v[..., :1] * e1 + v[..., 1:] * e2
    w = w - x * np.sum(x * w, axis=-1, keepdims=True)
    return w / ny[..., None]


def _chart_velocity_coords(centers, e1, e2, a, t):
    """Chart components of ambient tangent vectors t at chart position a."""
    x, ny = _chart_embed(centers, e1, e2, a)
    xe1 = np.sum(x * e1, axis=-1)
    xe2 = np.sum(x * e2, axis=-1)
    g11 = 1.0 - xe1 * xe1
    g22 = 1.0 - xe2 * xe2
    g12 = -xe1 * xe2
    b1 = ny * np.sum(t * e1, axis=-1)
    b2 = ny * np.sum(t * e2, axis=-1)
    det = g11 * g22 - g12 * g12
    return np.stack([(g22 * b1 - g12 * b2) / det, (g11 * b2 - g12 * b1) / det], axis=-1)


def _covectors_in_charts(field, density, centers, e1, e2, a, t_chart, spec):
    """dF/dv in chart components, batched over rows of per-row charts.

    One fiber profile per row; the four finite-difference velocities reuse it.
    """
    h = spec.fd_step
    offs = np.array([(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)])
    v4 = t_chart[:, None, :] + offs[None, :, :]          # (n, 4, 2)
    pts, ny = _chart_embed(centers, e1, e2, a)
    frames = transported_frame(pts, e1)
    w = _chart_tangent(
        np.repeat(centers, 4, axis=0), np.repeat(e1, 4, axis=0), np.repeat(e2, 4, axis=0),
        np.repeat(a, 4, axis=0), v4.reshape(-1, 2),
    ).reshape(a.shape[0], 4, 3)
    f = finsler_F_multi(field, density, pts, w, spec, frames=frames)
    return np.stack([(f[:, 0] - f[:, 1]) / (2 * h), (f[:, 2] - f[:, 3]) / (2 * h)], axis=-1)


def legendre_covector(
    field: KappaField,
    density: MeasureDensity,
    element: ContactElement,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> np.ndarray:
    """dF/dv along a contact element, in the deterministic frame at its point.

    The velocity gradient of a degree-one homogeneous norm is scale invariant,
    so it is evaluated directly at the unit tangent; it pairs to 1 with the
    F-unit velocity along the element (Euler identity).
    """
    e1, e2 = tangent_frame(element.point)
    t_chart = np.array([element.tangent @ e1, element.tangent @ e2])
    return _covectors_in_charts(
        field, density,
        element.point[None, :], e1[None, :], e2[None, :],
        np.zeros((1, 2)), t_chart[None, :], spec,
    )[0]


@dataclass
class RecoveredDensity:
    points: np.ndarray      # (G, 3) fiber-sphere labels
    m_hat: np.ndarray       # (G,) recovered density values


def recover_measure(
    field: KappaField,
    density: MeasureDensity,
    grid_level: int = 4,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    phase: float = 0.0,
    points: np.ndarray | None = None,
) -> RecoveredDensity:
    """Reconstruct the fiber density from the metric via the symplectic form.

    At each label x: take a contact element of its circle (at arclength
    ``phase``), vary it along the circle normal and along the fiber rotation,
    lift both variation curves to the cotangent bundle with
    :func:`legendre_covector`, and set

        m_hat(x) = (1/4) |omega_can(W1, W2)| / |dA(u1, u2)|

    where u_i are the corresponding label-variation velocities.  Matches the
    even part of the input density.
    """
    if points is None:
        grid_pts = sphere_grid(grid_level).vertices
    else:
        grid_pts = np.atleast_2d(np.asarray(points, dtype=float))
    g = grid_pts.shape[0]
    axes, radii = realize_circles_batch(field, grid_pts)

    # base contact element of each circle at the requested phase
    e1x, e2x = tangent_frame(axes)
    c1, c2 = e2x, np.cross(axes, e2x)
    u = phase / np.sin(radii)
    p0 = (np.cos(radii)[:, None] * axes
          + np.sin(radii)[:, None] * (np.cos(u)[:, None] * c1 + np.sin(u)[:, None] * c2))
    p0 = normalize(p0)
    t0 = normalize(np.cross(axes, p0))
    nu = np.cross(p0, t0)

    h = spec.fd_step
    pa_p = np.cos(h) * p0 + np.sin(h) * nu
    pa_m = np.cos(h) * p0 - np.sin(h) * nu
    ta_p = normalize(t0 - pa_p * np.sum(pa_p * t0, axis=-1, keepdims=True))
    ta_m = normalize(t0 - pa_m * np.sum(pa_m * t0, axis=-1, keepdims=True))
    tb_p = np.cos(h) * t0 + np.sin(h) * nu
    tb_m = np.cos(h) * t0 - np.sin(h) * nu

    all_p = np.stack([pa_p, pa_m, p0, p0], axis=1).reshape(-1, 3)
    all_t = np.stack([ta_p, ta_m, tb_p, tb_m], axis=1).reshape(-1, 3)
    x_var = tangent_circles_batch(field, all_p, all_t)[0].reshape(g, 4, 3)
    u_a = (x_var[:, 0] - x_var[:, 1]) / (2 * h)
    u_b = (x_var[:, 2] - x_var[:, 3]) / (2 * h)
    area = np.sum(grid_pts * np.cross(u_a, u_b), axis=-1)
    if np.any(np.abs(area) < 1e-8):
        raise RuntimeError("degenerate label variations; retry with another phase")

    # per-label chart at p0; all four varied elements expressed in that chart
    ch_e1, ch_e2 = tangent_frame(p0)
    centers = np.repeat(p0, 4, axis=0)
    ce1 = np.repeat(ch_e1, 4, axis=0)
    ce2 = np.repeat(ch_e2, 4, axis=0)
    pts_var = np.stack([pa_p, pa_m, p0, p0], axis=1).reshape(-1, 3)
    t_var = np.stack([ta_p, ta_m, tb_p, tb_m], axis=1).reshape(-1, 3)
    dot = np.sum(pts_var * centers, axis=-1)
    a_rows = np.stack(
        [np.sum(pts_var * ce1, axis=-1) / dot, np.sum(pts_var * ce2, axis=-1) / dot], axis=-1
    )
    t_rows = _chart_velocity_coords(centers, ce1, ce2, a_rows, t_var)
    xi = _covectors_in_charts(field, density, centers, ce1, ce2, a_rows, t_rows, spec)

    a_rows = a_rows.reshape(g, 4, 2)
    xi = xi.reshape(g, 4, 2)
    w_a_p = (a_rows[:, 0] - a_rows[:, 1]) / (2 * h)
    w_b_xi = (xi[:, 2] - xi[:, 3]) / (2 * h)
    # omega_can(W_a, W_b) = W_a^xi . W_b^p - W_b^xi . W_a^p, and the fiber
    # rotation keeps the base point fixed (W_b^p = 0)
    omega = -np.einsum("ij,ij->i", w_b_xi, w_a_p)
    m_hat = 0.25 * np.abs(omega) / np.abs(area)
    return RecoveredDensity(points=grid_pts, m_hat=m_hat)
