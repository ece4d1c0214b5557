"""Crofton-type metrics on the sphere built from a circle family and a measure.

Given an admissible curvature field and a positive density m on the fiber
sphere (declared against the unit-sphere area element), every point p carries
a fiber density rho(p, theta) over its unit covector circle, and

    F(p, v) = integral over theta of |xi_theta(v)| rho(p, theta)

is a reversible Finsler norm whose length functional equals the weighted
intersection count against the circle family.  The brute-force intersection
count (grid or Monte-Carlo) is kept as an independent oracle.

The theta quadrature interpolates the sampled integrand linearly and
integrates the product |s(theta)| * rho(theta) exactly on each interval,
splitting at the sign change of s.  A plain trapezoid sum has the same
O(N^-2) accuracy for values of F, but its |.|-kinks sit at quadrature nodes
and make finite-difference Hessians of F blow up whenever a kink crosses a
node inside the stencil; the split rule keeps the discretized F smooth in v.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .circles import count_intersections_batch
from .pathgeometry import KappaField, FiberSolveSpec, DEFAULT_SOLVE, _fiber_solve_batch, \
    _lift_contacts, realize_circles_batch
from .sphere import normalize, slerp, slerp_velocity, sphere_grid, tangent_frame

_SOLVE_CHUNK = 200_000  # max fiber-solve instances per vectorized batch


@dataclass(frozen=True)
class QuadratureSpec:
    n_theta: int = 256
    fd_step: float = 1e-4
    sphere_grid_level: int = 6
    mc_samples: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n_theta < 16:
            raise ValueError("n_theta must be >= 16")
        if self.fd_step <= 0:
            raise ValueError("fd_step must be positive")


DEFAULT_QUADRATURE = QuadratureSpec()


class MeasureDensity:
    """Positive density on the fiber sphere w.r.t. the unit-sphere area element."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], check_level: int = 2):
        self._fn = fn
        grid = sphere_grid(check_level)
        vals = np.asarray(fn(grid.vertices), dtype=float)
        if np.any(vals <= 0.0):
            raise ValueError("measure density must be positive")

    @classmethod
    def constant(cls, value: float = 1.0) -> "MeasureDensity":
        value = float(value)
        return cls(lambda x: np.full(np.asarray(x).shape[:-1], value))

    @classmethod
    def linear(cls, base: float, direction, amplitude: float) -> "MeasureDensity":
        d = normalize(np.asarray(direction, dtype=float))
        if not abs(amplitude) < 1.0:
            raise ValueError("linear perturbation needs |amplitude| < 1")
        return cls(lambda x: base * (1.0 + amplitude * (np.asarray(x) @ d)))

    @classmethod
    def from_callable(cls, fn) -> "MeasureDensity":
        return cls(fn)

    def value(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self._fn(np.asarray(x, dtype=float)), dtype=float)

    def even_part(self) -> "MeasureDensity":
        return MeasureDensity(lambda x: 0.5 * (self.value(x) + self.value(-np.asarray(x))))


# ---------------------------------------------------------------------------
# Fiber density profiles
# ---------------------------------------------------------------------------

@dataclass
class FiberProfile:
    """rho over the theta grid at a batch of base points, plus their frames."""

    thetas: np.ndarray      # (N,)
    rho: np.ndarray         # (B, N)
    e1: np.ndarray          # (B, 3)
    e2: np.ndarray          # (B, 3)
    points: np.ndarray      # (B, 3)


def fiber_profile_batch(
    field: KappaField,
    density: MeasureDensity,
    points: np.ndarray,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    frames: tuple[np.ndarray, np.ndarray] | None = None,
    solve: FiberSolveSpec = DEFAULT_SOLVE,
    _w_theta_shear: float = 0.0,
) -> FiberProfile:
    """Fiber density rho(p, theta) for each p over the uniform theta grid.

    rho = m(x) |dA(u1, u2)| / |xi(Dpi1 W)| with u1 the theta-derivative and u2
    the derivative along the normal variation W of the base point, both taken
    of the fiber-point map by central differences of step ``spec.fd_step``.
    ``_w_theta_shear`` adds a multiple of the theta direction to W (the result
    must not depend on it; exposed for the factorization test).
    """
    p = np.atleast_2d(np.asarray(points, dtype=float))
    nb = p.shape[0]
    n = spec.n_theta
    h = spec.fd_step
    e1, e2 = tangent_frame(p) if frames is None else frames
    e1 = np.atleast_2d(e1)
    e2 = np.atleast_2d(e2)

    thetas = 2.0 * np.pi * np.arange(n) / n

    def tangent_at(th):
        return np.cos(th)[None, :, None] * e1[:, None, :] + np.sin(th)[None, :, None] * e2[:, None, :]

    t_c = tangent_at(thetas)                       # (B, N, 3)
    t_p = tangent_at(thetas + h)
    t_m = tangent_at(thetas - h)
    p_bn = np.broadcast_to(p[:, None, :], t_c.shape)
    n_th = np.cross(p_bn, t_c)

    pw_p = np.cos(h) * p_bn + np.sin(h) * n_th
    pw_m = np.cos(h) * p_bn - np.sin(h) * n_th

    def transport(base, t):
        tt = t - base * np.sum(base * t, axis=-1, keepdims=True)
        return normalize(tt)

    tw_p = transport(pw_p, t_c)
    tw_m = transport(pw_m, t_c)
    if _w_theta_shear != 0.0:
        ang = _w_theta_shear * h
        tw_p = np.cos(ang) * tw_p + np.sin(ang) * np.cross(pw_p, tw_p)
        tw_m = np.cos(ang) * tw_m - np.sin(ang) * np.cross(pw_m, tw_m)

    all_p = np.stack([p_bn, p_bn, pw_p, pw_m, p_bn], axis=2).reshape(-1, 3)
    all_t = np.stack([t_p, t_m, tw_p, tw_m, t_c], axis=2).reshape(-1, 3)

    x = np.empty_like(all_p)
    total = all_p.shape[0]
    step = max(_SOLVE_CHUNK, 5 * n)
    for lo in range(0, total, step):
        hi = min(lo + step, total)
        q = _lift_contacts(all_p[lo:hi], all_t[lo:hi])
        x[lo:hi] = _fiber_solve_batch(field, q, solve)[0]
    x = x.reshape(nb, n, 5, 3)

    u1 = (x[:, :, 0] - x[:, :, 1]) / (2.0 * h)
    u2 = (x[:, :, 2] - x[:, :, 3]) / (2.0 * h)
    xc = x[:, :, 4]
    # W projects to (sin h / h) * n_theta under the base-point map, and the
    # contact covector is 1 on the unit normal
    denom = np.sin(h) / h
    if denom < 1e-8:
        raise RuntimeError("degenerate normal variation in fiber density")
    tri = np.abs(np.sum(xc * np.cross(u1, u2), axis=-1))
    rho = density.value(xc) * tri / denom
    return FiberProfile(thetas=thetas, rho=rho, e1=e1, e2=e2, points=p)


def fiber_density(
    field: KappaField,
    density: MeasureDensity,
    p: np.ndarray,
    theta: np.ndarray | float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> np.ndarray:
    """rho(p, theta) at arbitrary angles (profile machinery at single angles)."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    p = np.asarray(p, dtype=float)
    prof = fiber_profile_batch(field, density, p[None, :], spec)
    # interpolate the periodic profile at the requested angles
    n = spec.n_theta
    pos = theta % (2 * np.pi) / (2 * np.pi) * n
    i0 = np.floor(pos).astype(int) % n
    i1 = (i0 + 1) % n
    w = pos - np.floor(pos)
    out = (1 - w) * prof.rho[0, i0] + w * prof.rho[0, i1]
    return out if out.shape != (1,) else float(out[0])


# ---------------------------------------------------------------------------
# Quadrature of |xi(v)| against the profile
# ---------------------------------------------------------------------------

def _abs_product_integral(s0, s1, r0, r1, width):
    """Exact integral of |lerp(s)| * lerp(r) over one interval of given width."""
    same = s0 * s1 >= 0.0
    i_same = (np.abs(s0) * (2.0 * r0 + r1) + np.abs(s1) * (r0 + 2.0 * r1)) / 6.0
    denom = np.where(same, 1.0, s0 - s1)
    tau = s0 / denom
    r_tau = r0 + tau * (r1 - r0)
    i_cross = (tau * np.abs(s0) * (2.0 * r0 + r_tau)
               + (1.0 - tau) * np.abs(s1) * (r_tau + 2.0 * r1)) / 6.0
    return width * np.where(same, i_same, i_cross)


def profile_norm_values(profile: FiberProfile, v: np.ndarray) -> np.ndarray:
    """F values for ambient tangent vectors v of shape (B, K, 3)."""
    v = np.asarray(v, dtype=float)
    a = np.sum(v * profile.e2[:, None, :], axis=-1)   # coefficient of cos
    b = -np.sum(v * profile.e1[:, None, :], axis=-1)  # coefficient of sin
    th = profile.thetas
    s = a[..., None] * np.cos(th) + b[..., None] * np.sin(th)   # (B, K, N)
    s_next = np.roll(s, -1, axis=-1)
    r = profile.rho[:, None, :]
    r_next = np.roll(r, -1, axis=-1)
    width = 2.0 * np.pi / th.size
    return _abs_product_integral(s, s_next, r, np.broadcast_to(r_next, s.shape), width).sum(axis=-1)


def finsler_F_batch(
    field: KappaField,
    density: MeasureDensity,
    points: np.ndarray,
    vectors: np.ndarray,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    frames=None,
) -> np.ndarray:
    """F(p_i, v_i) for batched points/vectors (radial components are ignored)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    nb = points.shape[0]
    chunk = max(1, _SOLVE_CHUNK // (5 * spec.n_theta))
    out = np.empty(nb)
    for lo in range(0, nb, chunk):
        hi = min(lo + chunk, nb)
        fr = None if frames is None else (frames[0][lo:hi], frames[1][lo:hi])
        prof = fiber_profile_batch(field, density, points[lo:hi], spec, frames=fr)
        out[lo:hi] = profile_norm_values(prof, vectors[lo:hi, None, :])[:, 0]
    return out


def finsler_F_multi(
    field: KappaField,
    density: MeasureDensity,
    points: np.ndarray,
    vectors: np.ndarray,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    frames=None,
) -> np.ndarray:
    """F(p_i, v_ik) for several vectors per point: one fiber profile per point.

    ``vectors`` has shape (B, K, 3); returns (B, K).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    vectors = np.asarray(vectors, dtype=float)
    nb, nk = vectors.shape[0], vectors.shape[1]
    chunk = max(1, _SOLVE_CHUNK // (5 * spec.n_theta))
    out = np.empty((nb, nk))
    for lo in range(0, nb, chunk):
        hi = min(lo + chunk, nb)
        fr = None if frames is None else (frames[0][lo:hi], frames[1][lo:hi])
        prof = fiber_profile_batch(field, density, points[lo:hi], spec, frames=fr)
        out[lo:hi] = profile_norm_values(prof, vectors[lo:hi])
    return out


def finsler_F(
    field: KappaField,
    density: MeasureDensity,
    p: np.ndarray,
    v: np.ndarray,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """The metric value F(p, v); positively homogeneous and reversible in v."""
    v = np.asarray(v, dtype=float)
    if np.linalg.norm(v) == 0.0:
        return 0.0
    return float(finsler_F_batch(field, density, np.asarray(p, dtype=float)[None, :], v[None, :], spec)[0])


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(4)
_GL_NODES = (_GL_NODES + 1.0) / 2.0
_GL_WEIGHTS = _GL_WEIGHTS / 2.0


def finsler_length(
    field: KappaField,
    density: MeasureDensity,
    polyline: np.ndarray,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Length of a great-arc polyline: per-segment 4-node Gauss-Legendre of F."""
    poly = np.asarray(polyline, dtype=float)
    if poly.ndim != 2 or poly.shape[0] < 2:
        return 0.0
    a, b = poly[:-1], poly[1:]
    n_seg = a.shape[0]
    s = _GL_NODES
    pts = slerp(a[:, None, :], b[:, None, :], np.broadcast_to(s[None, :], (n_seg, 4)))
    vel = slerp_velocity(a[:, None, :], b[:, None, :], np.broadcast_to(s[None, :], (n_seg, 4)))
    f_vals = finsler_F_batch(field, density, pts.reshape(-1, 3), vel.reshape(-1, 3), spec)
    return float(np.sum(f_vals.reshape(n_seg, 4) * _GL_WEIGHTS))


# ---------------------------------------------------------------------------
# Crofton oracle
# ---------------------------------------------------------------------------

def _jitter_directions(seed: int, attempt: int, indices: np.ndarray) -> np.ndarray:
    dirs = np.empty((indices.size, 3))
    for row, idx in enumerate(indices):
        g = np.random.Generator(np.random.Philox(key=seed + 977 * attempt, counter=[int(idx), 0, 0, 0]))
        dirs[row] = g.standard_normal(3)
    return dirs


def crofton_counts(
    field: KappaField,
    samples: np.ndarray,
    polyline: np.ndarray,
    seed: int,
    indices: np.ndarray | None = None,
) -> np.ndarray:
    """Intersection counts of the circles labeled by ``samples`` with a polyline.

    Tangency-flagged samples are nudged by a deterministic 1e-7 jitter and
    re-evaluated (growing tenfold per retry); the events have measure zero, so
    the nudge does not bias the integral.  ``indices`` keys the jitter stream
    so that chunked evaluation matches the monolithic one bit for bit.
    """
    x = np.asarray(samples, dtype=float).copy()
    if indices is None:
        indices = np.arange(x.shape[0])
    axes, radii = realize_circles_batch(field, x)
    counts, flags = count_intersections_batch(axes, radii, polyline)
    scale = 1e-7
    for attempt in range(3):
        idx = np.nonzero(flags)[0]
        if idx.size == 0:
            break
        dirs = _jitter_directions(seed, attempt, indices[idx])
        x[idx] = normalize(x[idx] + scale * dirs)
        axes, radii = realize_circles_batch(field, x[idx])
        counts[idx], flags[idx] = count_intersections_batch(axes, radii, polyline)
        scale *= 10.0
    return counts


def crofton_length(
    field: KappaField,
    density: MeasureDensity,
    polyline: np.ndarray,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Independent length oracle: weighted intersection count over the fiber sphere.

    Uses cell-area weights on the icosahedral grid of level
    ``spec.sphere_grid_level``, or a seeded uniform Monte-Carlo sample when
    ``spec.mc_samples`` is set.
    """
    poly = np.asarray(polyline, dtype=float)
    if poly.ndim != 2 or poly.shape[0] < 2:
        return 0.0
    if spec.mc_samples:
        g = np.random.Generator(np.random.Philox(key=spec.seed))
        x = normalize(g.standard_normal((spec.mc_samples, 3)))
        w = np.full(spec.mc_samples, 4.0 * np.pi / spec.mc_samples)
    else:
        grid = sphere_grid(spec.sphere_grid_level)
        x = grid.centroids
        w = grid.areas
    counts = crofton_counts(field, x, poly, spec.seed)
    return float(np.sum(w * density.value(x) * counts))


# ---------------------------------------------------------------------------
# Convexity diagnostics
# ---------------------------------------------------------------------------

@dataclass
class HessianReport:
    frame: tuple[np.ndarray, np.ndarray]
    hessian_energy: np.ndarray       # Hessian of F^2/2, (2, 2)
    energy_eigenvalues: np.ndarray
    hessian_norm: np.ndarray         # Hessian of F, (2, 2)
    norm_eigenvalues: np.ndarray
    null_direction: np.ndarray       # ambient eigenvector of the near-null mode


def hessian_F2(
    field: KappaField,
    density: MeasureDensity,
    p: np.ndarray,
    v: np.ndarray,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> HessianReport:
    """Central-difference velocity Hessians of F^2/2 and of F at (p, v)."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    e1, e2 = tangent_frame(p)
    v2 = np.array([np.dot(v, e1), np.dot(v, e2)])
    vn = np.linalg.norm(v2)
    if vn == 0.0:
        raise ValueError("hessian requires a nonzero tangent vector")
    h = spec.fd_step * vn
    if h < 1e-13 * vn or h == 0.0:
        raise ValueError("finite-difference step underflow")

    offsets = np.array(
        [
            (0.0, 0.0),
            (1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0),
            (1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0),
        ]
    )
    vv = v2[None, :] + h * offsets
    amb = vv[:, 0, None] * e1 + vv[:, 1, None] * e2
    prof = fiber_profile_batch(field, density, p[None, :], spec)
    f_vals = profile_norm_values(prof, amb[None, :, :])[0]

    def hess(vals):
        c = vals[0]
        d11 = (vals[1] - 2 * c + vals[2]) / h**2
        d22 = (vals[3] - 2 * c + vals[4]) / h**2
        d12 = (vals[5] - vals[6] - vals[7] + vals[8]) / (4 * h**2)
        return np.array([[d11, d12], [d12, d22]])

    h_f = hess(f_vals)
    h_e = hess(0.5 * f_vals**2)
    ev_e = np.linalg.eigvalsh(h_e)
    ew_f, evec_f = np.linalg.eigh(h_f)
    null_idx = int(np.argmin(np.abs(ew_f)))
    nd = evec_f[0, null_idx] * e1 + evec_f[1, null_idx] * e2
    return HessianReport(
        frame=(e1, e2),
        hessian_energy=h_e,
        energy_eigenvalues=ev_e,
        hessian_norm=h_f,
        norm_eigenvalues=ew_f,
        null_direction=normalize(nd),
    )


def indicatrix_sample(
    field: KappaField,
    density: MeasureDensity,
    p: np.ndarray,
    n: int,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> np.ndarray:
    """(theta, 1/F(p, t(theta))) rows sampling the unit ball boundary at p."""
    if n < 8:
        raise ValueError("need at least 8 samples")
    p = np.asarray(p, dtype=float)
    e1, e2 = tangent_frame(p)
    th = 2.0 * np.pi * np.arange(n) / n
    t = np.cos(th)[:, None] * e1 + np.sin(th)[:, None] * e2
    prof = fiber_profile_batch(field, density, p[None, :], spec)
    f_vals = profile_norm_values(prof, t[None, :, :])[0]
    return np.stack([th, 1.0 / f_vals], axis=-1)
