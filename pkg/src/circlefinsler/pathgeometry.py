"""Families of circles on the sphere parameterized by an odd curvature field.

A smooth odd function kappa on the unit sphere, subject to the slope bound
sup ||grad kappa|| / (1 + kappa^2) < 1, selects for every contact element of
S^2 a unique circle; the selection is computed by lifting the element to the
three-sphere and solving a fixed-point equation whose contraction factor is
exactly that slope ratio.

Scaling note: points of the plus factor sphere (radius 1/sqrt(2)) are
represented throughout by unit vectors x; the graph map into the minus factor
then has operator norm ||df|| = ||grad kappa|| / (1 + kappa^2) measured in the
unit-sphere metric.  (Write f = (alpha, 0, beta), alpha = kappa/sqrt(2+2k^2),
beta = 1/sqrt(2+2k^2): then |df/dkappa| = (1/sqrt2)(1+k^2)^-1, while pulling
kappa back to the radius-1/sqrt2 sphere scales its gradient by sqrt2; the two
factors of sqrt2 cancel.)  This identity is what makes the unit-vector
convention exact rather than approximate, and it is covered by a test.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import quathopf as qh
from .circles import ContactElement, SphereCircle, circle_from_contact, circles_from_contacts
from .sphere import normalize, sphere_grid, tangent_frame

# cubic monomial exponents (i <= j <= k) in lexicographic order
_CUBIC_MONOMIALS = [
    (0, 0, 0), (0, 0, 1), (0, 0, 2), (0, 1, 1), (0, 1, 2),
    (0, 2, 2), (1, 1, 1), (1, 1, 2), (1, 2, 2), (2, 2, 2),
]


@dataclass(frozen=True)
class FiberSolveSpec:
    tolerance: float = 1e-12
    max_iterations: int = 200

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


DEFAULT_SOLVE = FiberSolveSpec()


class FibrationSolveError(RuntimeError):
    """Raised when the fixed-point fiber solve fails to converge."""


@dataclass(frozen=True)
class AdmissibilityReport:
    ok: bool
    margin: float
    worst_point: np.ndarray


class KappaField:
    """Odd smooth curvature field on the unit sphere.

    Built-in families (odd linear + odd cubic polynomials) carry analytic
    tangential gradients; arbitrary callables are odd-symmetrized and
    differentiated by central differences with step ``h_grad``.
    """

    def __init__(
        self,
        linear: np.ndarray | None = None,
        cubic: np.ndarray | None = None,
        constant: float = 0.0,
        evaluator: Callable[[np.ndarray], np.ndarray] | None = None,
        h_grad: float = 1e-5,
    ):
        self.linear = None if linear is None else np.asarray(linear, dtype=float)
        self.cubic = None if cubic is None else np.asarray(cubic, dtype=float)
        self.constant = float(constant)
        self.evaluator = evaluator
        self.h_grad = float(h_grad)
        if self.linear is not None and self.linear.shape != (3,):
            raise ValueError("linear coefficients must be a 3-vector")
        if self.cubic is not None and self.cubic.shape != (10,):
            raise ValueError("cubic coefficients must be a 10-vector")
        if evaluator is not None and (linear is not None or cubic is not None):
            raise ValueError("provide either built-in coefficients or an evaluator")

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls) -> "KappaField":
        return cls(linear=np.zeros(3))

    @classmethod
    def from_linear(cls, a, constant: float = 0.0) -> "KappaField":
        return cls(linear=a, constant=constant)

    @classmethod
    def from_linear_cubic(cls, a, c, constant: float = 0.0) -> "KappaField":
        return cls(linear=a, cubic=c, constant=constant)

    @classmethod
    def from_callable(cls, fn, h_grad: float = 1e-5) -> "KappaField":
        return cls(evaluator=fn, h_grad=h_grad)

    # -- evaluation --------------------------------------------------------
    def value(self, x: np.ndarray) -> np.ndarray:
        """kappa at unit vectors x; odd by construction."""
        x = np.asarray(x, dtype=float)
        if self.evaluator is not None:
            return 0.5 * (np.asarray(self.evaluator(x)) - np.asarray(self.evaluator(-x)))
        out = np.zeros(x.shape[:-1])
        if self.linear is not None:
            out = out + x @ self.linear
        if self.cubic is not None:
            for coef, (i, j, k) in zip(self.cubic, _CUBIC_MONOMIALS):
                if coef != 0.0:
                    out = out + coef * x[..., i] * x[..., j] * x[..., k]
        return out

    def _ambient_gradient(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.evaluator is not None:
            h = self.h_grad
            grads = []
            for axis in range(3):
                e = np.zeros(3)
                e[axis] = h
                grads.append((self.value(normalize(x + e)) - self.value(normalize(x - e))) / (2 * h))
            # central differences through renormalized points already give the
            # tangential gradient; return as-is and let the projection below
            # clean up the radial residue
            return np.stack(grads, axis=-1)
        g = np.zeros_like(x)
        if self.linear is not None:
            g = g + self.linear
        if self.cubic is not None:
            for coef, mono in zip(self.cubic, _CUBIC_MONOMIALS):
                if coef == 0.0:
                    continue
                for axis in range(3):
                    mult = mono.count(axis)
                    if mult == 0:
                        continue
                    rest = list(mono)
                    rest.remove(axis)
                    term = np.full(x.shape[:-1], float(mult))
                    for m in rest:
                        term = term * x[..., m]
                    g[..., axis] += coef * term
        return g

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Tangential gradient of kappa at unit vectors x."""
        x = np.asarray(x, dtype=float)
        g = self._ambient_gradient(x)
        return g - x * np.sum(g * x, axis=-1, keepdims=True)

    def slope_ratio(self, x: np.ndarray) -> np.ndarray:
        """||grad kappa|| / (1 + kappa^2), the fixed-point contraction factor."""
        k = self.value(x)
        return np.linalg.norm(self.gradient(x), axis=-1) / (1.0 + k * k)


def admissibility(field: KappaField, grid_level: int = 5) -> AdmissibilityReport:
    """Scan the slope ratio on an icosahedral grid; ok iff margin > 0."""
    grid = sphere_grid(grid_level)
    pts = np.vstack([grid.vertices, grid.centroids])
    ratio = field.slope_ratio(pts)
    worst = int(np.argmax(ratio))
    margin = float(1.0 - ratio[worst])
    return AdmissibilityReport(ok=margin > 0.0, margin=margin, worst_point=pts[worst])


def f_kappa(field: KappaField, x: np.ndarray) -> np.ndarray:
    """Graph map into the minus factor: (kappa, 0, 1)/sqrt(2 + 2 kappa^2)."""
    x = np.asarray(x, dtype=float)
    k = field.value(x)
    s = 1.0 / np.sqrt(2.0 + 2.0 * k * k)
    zeros = np.zeros_like(k)
    return np.stack([k * s, zeros, s], axis=-1)


def big_x(q: np.ndarray, kappa_val: np.ndarray | float) -> np.ndarray:
    """Unit plus-half of the plane through q in direction q*u(kappa_val)."""
    return _big_x_fused(np.asarray(q, dtype=float), np.asarray(kappa_val, dtype=float))


def _big_x_fused(q: np.ndarray, kappa_val: np.ndarray) -> np.ndarray:
    # inlined quat_mul(q, (kappa i + k)/sqrt(1+kappa^2)) and the plus-half of
    # the plane coordinates; the common 1/sqrt factors drop in normalization
    qw, qx, qy, qz = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    k = kappa_val
    uw = -qx * k - qz
    ux = qw * k + qy
    uy = -qx + qz * k
    uz = qw - qy * k
    p1 = (qw * ux - qx * uw) + (qy * uz - qz * uy)
    p2 = (qw * uy - qy * uw) - (qx * uz - qz * ux)
    p3 = (qw * uz - qz * uw) + (qx * uy - qy * ux)
    out = np.stack([p1, p2, p3], axis=-1)
    return out / np.sqrt(p1 * p1 + p2 * p2 + p3 * p3)[..., None]


def fiber_through(
    field: KappaField,
    q: np.ndarray,
    spec: FiberSolveSpec = DEFAULT_SOLVE,
    x0: np.ndarray | None = None,
    return_history: bool = False,
):
    """Solve x = big_x(q, kappa(x)) for the fiber of the circle family through q.

    Plain fixed-point iteration; admissibility makes the map a contraction
    with factor bounded by the slope ratio, and the update norm equals the
    fixed-point residual of the previous iterate, so iteration stops once the
    residual drops below ``spec.tolerance``.
    """
    q = np.asarray(q, dtype=float)
    single = q.ndim == 1
    qb = q[None, :] if single else q
    x, k, history = _fiber_solve_batch(field, qb, spec, None if x0 is None else np.atleast_2d(x0),
                                       track_history=return_history)
    if single:
        x, k = x[0], float(k[0])
    if return_history:
        return x, k, history
    return x, k


def _fiber_solve_batch(field, q, spec=DEFAULT_SOLVE, x0=None, track_history=False):
    """Vectorized fiber solve; converged entries freeze so results do not
    depend on how instances are batched together."""
    q = np.asarray(q, dtype=float)
    lead = q.shape[:-1]
    qf = q.reshape(-1, 4)
    n = qf.shape[0]
    if x0 is None:
        x = big_x(qf, np.zeros(n))
    else:
        x = np.broadcast_to(np.asarray(x0, dtype=float), (n, 3)).copy()
    history: list[float] = []
    active = np.arange(n)
    x_out = x.copy()
    for _ in range(spec.max_iterations):
        x_new = big_x(qf[active], field.value(x_out[active]))
        upd = np.linalg.norm(x_new - x_out[active], axis=-1)
        if track_history:
            history.append(float(upd.max()))
        x_out[active] = x_new
        still = upd >= spec.tolerance
        active = active[still]
        if active.size == 0:
            k = field.value(x_out)
            return x_out.reshape(lead + (3,)), k.reshape(lead), history
    raise FibrationSolveError(
        f"fibration solve failed: {active.size} of {n} instances not converged "
        f"after {spec.max_iterations} iterations"
    )


def _lift_contacts(points: np.ndarray, tangents: np.ndarray) -> np.ndarray:
    frames = np.stack([points, tangents, np.cross(points, tangents)], axis=-1)
    return qh._quat_of_frame_unchecked(frames)


def tangent_circle(
    field: KappaField, element: ContactElement, spec: FiberSolveSpec = DEFAULT_SOLVE
) -> tuple[np.ndarray, SphereCircle]:
    """Fiber point and circle of the family tangent to a contact element."""
    q = _lift_contacts(element.point, element.tangent)
    x, k = fiber_through(field, q, spec)
    return x, circle_from_contact(element, k)


def tangent_circles_batch(field, points, tangents, spec=DEFAULT_SOLVE):
    """Batched tangent-circle solve: returns (x (B,3), kappa (B,), axes, radii)."""
    q = _lift_contacts(np.asarray(points, dtype=float), np.asarray(tangents, dtype=float))
    x, k = _fiber_solve_batch(field, q, spec)[:2]
    axes, radii = circles_from_contacts(points, tangents, k)
    return x, k, axes, radii


def pi2_map(
    field: KappaField,
    p: np.ndarray,
    theta: np.ndarray | float,
    spec: FiberSolveSpec = DEFAULT_SOLVE,
    frame: tuple[np.ndarray, np.ndarray] | None = None,
) -> np.ndarray:
    """Fiber point of the circle tangent to (p, t(theta)).

    t(theta) = cos(theta) E1(p) + sin(theta) E2(p) in the deterministic
    tangent frame; pass ``frame`` to use transported frames near the seam.
    """
    p = np.asarray(p, dtype=float)
    theta = np.asarray(theta, dtype=float)
    e1, e2 = tangent_frame(p) if frame is None else frame
    t = np.cos(theta)[..., None] * e1 + np.sin(theta)[..., None] * e2
    pb = np.broadcast_to(p, t.shape)
    q = _lift_contacts(pb, t)
    x, _ = _fiber_solve_batch(field, q, spec)[:2]
    return x.reshape(t.shape)


def realize_circle(
    field: KappaField, x: np.ndarray, spec: FiberSolveSpec = DEFAULT_SOLVE
) -> SphereCircle:
    """Circle of the family labeled by the unit fiber point x.

    Builds the plane with minus-half f_kappa(x) and plus-half x/sqrt(2), cuts
    it against the three-sphere and projects the resulting great circle down;
    the image passes through the projection of any plane point with the
    projected velocity direction and curvature kappa(x).
    """
    axes, radii = realize_circles_batch(field, np.asarray(x, dtype=float)[None, :])
    return SphereCircle(axes[0], float(radii[0]))


def realize_circles_batch(field: KappaField, x: np.ndarray):
    """Batched realize_circle; returns (axes (B,3), radii (B,))."""
    x = np.asarray(x, dtype=float)
    k = field.value(x)
    coords = np.concatenate([f_kappa(field, x), x / np.sqrt(2.0)], axis=-1)
    a, b = qh.bivector_to_plane(coords)
    p0 = qh.hopf(a)
    # image velocity of the projection at p0
    vel = (qh.quat_mul(qh.quat_mul(b, qh.QUAT_I), qh.quat_conj(a))
           + qh.quat_mul(qh.quat_mul(a, qh.QUAT_I), qh.quat_conj(b)))[..., 1:]
    t0 = normalize(vel)
    return circles_from_contacts(p0, t0, k)
