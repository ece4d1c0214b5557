"""Oriented circles on the unit two-sphere.

A circle is stored as (axis n, spherical radius r in (0, pi)); traversal is
counterclockwise as seen from n, so the unit tangent at a point p is
n x p / sin r and the geodesic curvature is cot r.  Orientation reversal maps
(n, r) to (-n, pi - r).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quathopf as qh
from .sphere import arc_angle, check_unit, normalize, tangent_frame

TANGENCY_TOL = 1e-10


@dataclass(frozen=True)
class ContactElement:
    """Point and unit tangent direction on the sphere (an oriented line element)."""

    point: np.ndarray
    tangent: np.ndarray

    def __post_init__(self):
        p = check_unit(self.point, what="contact point")
        t = check_unit(self.tangent, what="contact tangent")
        if abs(float(np.dot(p, t))) > 1e-12:
            raise ValueError("tangent is not orthogonal to the base point")
        object.__setattr__(self, "point", np.asarray(p, dtype=float))
        object.__setattr__(self, "tangent", np.asarray(t, dtype=float))

    def reversed(self) -> "ContactElement":
        return ContactElement(self.point, -self.tangent)


@dataclass(frozen=True)
class SphereCircle:
    axis: np.ndarray
    radius: float

    def __post_init__(self):
        n = check_unit(self.axis, what="circle axis")
        object.__setattr__(self, "axis", np.asarray(n, dtype=float))
        if not 0.0 < self.radius < np.pi:
            raise ValueError("spherical radius must lie in (0, pi)")

    @property
    def curvature(self) -> float:
        return 1.0 / np.tan(self.radius)

    def reversed(self) -> "SphereCircle":
        return SphereCircle(-self.axis, np.pi - self.radius)

    def circumference(self) -> float:
        return 2.0 * np.pi * np.sin(self.radius)


def circle_from_contact(element: ContactElement, kappa: float) -> SphereCircle:
    """The circle through a contact element with geodesic curvature kappa.

    Positive kappa curves toward p x t; the axis is
    (kappa*p + p x t)/sqrt(1 + kappa^2), cos r = kappa/sqrt(1 + kappa^2).
    """
    p, t = element.point, element.tangent
    s = 1.0 / np.sqrt(1.0 + kappa * kappa)
    axis = s * (kappa * p + np.cross(p, t))
    radius = float(np.arctan2(1.0, kappa))
    return SphereCircle(normalize(axis), radius)


def circles_from_contacts(points: np.ndarray, tangents: np.ndarray, kappas: np.ndarray):
    """Batched circle_from_contact; returns (axes (B,3), radii (B,))."""
    kappas = np.asarray(kappas, dtype=float)
    s = 1.0 / np.sqrt(1.0 + kappas * kappas)
    axes = s[..., None] * (kappas[..., None] * points + np.cross(points, tangents))
    radii = np.arctan2(1.0, kappas)
    return normalize(axes), radii


def _circle_frame(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # phase-zero direction chosen so that the equator about e_z starts at e_x
    e1, e2 = tangent_frame(axis)
    return e2, np.cross(axis, e2)


def circle_point(circle: SphereCircle, s: np.ndarray | float) -> np.ndarray:
    """Unit-speed (arclength) parameterization; period = circumference."""
    s = np.asarray(s, dtype=float)
    u = s / np.sin(circle.radius)
    c1, c2 = _circle_frame(circle.axis)
    return (
        np.cos(circle.radius) * circle.axis
        + np.sin(circle.radius) * (np.cos(u)[..., None] * c1 + np.sin(u)[..., None] * c2)
    )


def circle_tangent_at(circle: SphereCircle, p: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Unit tangent of the oriented circle at a point p on it."""
    p = np.asarray(p, dtype=float)
    if np.max(np.abs(np.sum(p * circle.axis, axis=-1) - np.cos(circle.radius))) > tol:
        raise ValueError("point does not lie on the circle")
    return normalize(np.cross(circle.axis, p))


def fit_circle(samples: np.ndarray) -> tuple[SphereCircle, float]:
    """Least-squares circle through ordered sphere samples.

    The axis is the smallest-eigenvalue direction of the centered sample
    covariance, oriented by the traversal order of the samples; returns the
    circle and the residual max |x.n - cos r|.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 2 or x.shape[0] < 4:
        raise ValueError("need at least 4 samples")
    mean = x.mean(axis=0)
    cov = (x - mean).T @ (x - mean)
    evals, evecs = np.linalg.eigh(cov)
    if evals[1] < 1e-12 * max(evals[2], 1.0):
        raise ValueError("degenerate samples: circle is not determined")
    n = evecs[:, 0]
    # orient by the signed traversal order
    swept = float(np.sum(np.sum(np.cross(x[:-1], x[1:]) * n, axis=-1)))
    if abs(swept) < 1e-12:
        swept = float(np.dot(mean, n)) or 1.0
    if swept < 0:
        n = -n
    d = float(np.clip(np.mean(x @ n), -1.0, 1.0))
    radius = float(np.arccos(d))
    radius = min(max(radius, 1e-12), np.pi - 1e-12)
    circle = SphereCircle(n, radius)
    residual = float(np.max(np.abs(x @ n - d)))
    return circle, residual


def hopf_project_circle(q: np.ndarray, kappa: float, n_samples: int = 128) -> tuple[SphereCircle, float]:
    """Project the great circle through q with parameter kappa down to S^2.

    Samples the projected curve, fits the circle, and measures the (constant)
    speed of the projection; the image closes after parameter time pi.
    """
    t = np.linspace(0.0, np.pi, n_samples, endpoint=False)
    pts = qh.hopf(qh.great_circle_point(np.asarray(q, dtype=float), kappa, t))
    circle, residual = fit_circle(pts)
    if residual > 1e-8:
        raise RuntimeError(f"projected samples do not close up to a circle ({residual:.2e})")
    dt = 1e-6
    p0 = qh.hopf(qh.great_circle_point(q, kappa, dt))
    m0 = qh.hopf(qh.great_circle_point(q, kappa, -dt))
    speed = float(arc_angle(p0, m0) / (2 * dt))
    return circle, speed


# ---------------------------------------------------------------------------
# Intersection counting
# ---------------------------------------------------------------------------

def _arc_crossings(alpha, beta, phi, d, tol=TANGENCY_TOL):
    """Transversal zero count of x(s).n - d along great arcs, vectorized.

    alpha, beta: endpoint heights A.n and B.n; phi: arc angles; d: cos(radius).
    Along the arc the height is R cos(u - psi), u = s*phi in [0, phi).
    Returns (counts, tangency flags).
    """
    sin_phi = np.sin(phi)
    ok = phi > 1e-12
    sin_safe = np.where(ok, sin_phi, 1.0)
    gamma = (beta - alpha * np.cos(phi)) / sin_safe
    r_amp = np.hypot(alpha, gamma)
    psi = np.arctan2(gamma, alpha)

    graze = np.abs(r_amp - np.abs(d)) < tol
    reachable = np.abs(d) < r_amp
    with np.errstate(invalid="ignore", divide="ignore"):
        c = np.arccos(np.clip(np.where(reachable, d / np.where(r_amp == 0, 1, r_amp), 2.0), -1.0, 1.0))

    counts = np.zeros(np.broadcast(alpha, d).shape, dtype=np.int64)
    flags = graze & ok
    end_tol = 1e-9
    for k in (-1.0, 0.0, 1.0):
        for sgn in (1.0, -1.0):
            u = psi + sgn * c + 2.0 * np.pi * k
            inside = reachable & ok & (u >= 0.0) & (u < phi)
            counts += inside.astype(np.int64)
            near_end = reachable & ok & ((np.abs(u) < end_tol) | (np.abs(u - phi) < end_tol))
            flags |= near_end
    # the +c and -c roots coincide when c == 0 (counted twice above)
    double = reachable & ok & (c < 1e-15)
    counts -= np.where(double & (counts >= 2), 1, 0)
    return counts, flags


def count_intersections(circle: SphereCircle, polyline: np.ndarray) -> tuple[int, bool]:
    """Number of transversal crossings of a great-arc polyline with the circle.

    Returns (count, tangency_flag); flagged results are near-degenerate and
    should be discarded or jittered by the caller.
    """
    counts, flags = count_intersections_batch(
        circle.axis[None, :], np.array([circle.radius]), polyline
    )
    return int(counts[0]), bool(flags[0])


def count_intersections_batch(axes: np.ndarray, radii: np.ndarray, polyline: np.ndarray):
    """Crossing counts of one polyline against a batch of circles."""
    poly = np.asarray(polyline, dtype=float)
    axes = np.asarray(axes, dtype=float)
    radii = np.asarray(radii, dtype=float)
    n_circ = axes.shape[0]
    if poly.ndim != 2 or poly.shape[0] < 2:
        return np.zeros(n_circ, dtype=np.int64), np.zeros(n_circ, dtype=bool)
    a, b = poly[:-1], poly[1:]
    phi = arc_angle(a, b)
    if np.any(phi > np.pi - 1e-9):
        raise ValueError("antipodal polyline vertices")
    alpha = axes @ a.T  # (C, S)
    beta = axes @ b.T
    d = np.cos(radii)[:, None]
    counts, flags = _arc_crossings(alpha, beta, phi[None, :], d)
    return counts.sum(axis=1), flags.any(axis=1)


def circle_circle_intersect(c1: SphereCircle, c2: SphereCircle, tol: float = 1e-9) -> np.ndarray:
    """Intersection points of two distinct circles; shape (k, 3), k in {0, 1, 2}."""
    n1, n2 = c1.axis, c2.axis
    d1, d2 = np.cos(c1.radius), np.cos(c2.radius)
    dot = float(np.dot(n1, n2))
    same = (np.allclose(n1, n2, atol=tol) and abs(d1 - d2) < tol) or (
        np.allclose(n1, -n2, atol=tol) and abs(d1 + d2) < tol
    )
    if same:
        raise ValueError("identical circles")
    denom = 1.0 - dot * dot
    if denom < tol * tol:
        return np.zeros((0, 3))  # coaxial but distinct: no intersection
    a = (d1 - d2 * dot) / denom
    b = (d2 - d1 * dot) / denom
    base = a * n1 + b * n2
    gamma_sq = (1.0 - (a * a + b * b + 2 * a * b * dot)) / denom
    if gamma_sq < -tol:
        return np.zeros((0, 3))
    if gamma_sq < tol:
        return normalize(base)[None, :]
    g = np.sqrt(gamma_sq)
    cr = np.cross(n1, n2)
    return np.stack([base + g * cr, base - g * cr], axis=0)


def polyline_from_circle(circle: SphereCircle, n: int = 256, closed: bool = True) -> np.ndarray:
    """Polyline sampling of a circle; closed repeats the first vertex at the end."""
    s = np.linspace(0.0, circle.circumference(), n, endpoint=False)
    pts = circle_point(circle, s)
    if closed:
        pts = np.vstack([pts, pts[:1]])
    return pts


def circle_arc(circle: SphereCircle, s0: float, s1: float, n: int = 65) -> np.ndarray:
    """Polyline along the circle between arclength parameters s0 and s1."""
    s = np.linspace(s0, s1, n)
    return circle_point(circle, s)
