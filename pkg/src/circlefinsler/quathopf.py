"""Quaternions, the Hopf fibration and oriented-plane (bivector) coordinates.

Quaternions are float arrays (..., 4) in (w, x, y, z) order with Hamilton
products i*j = k, j*k = i, k*i = j.  Oriented 2-planes of R^4 are encoded by
six coordinates against the orthonormalized wedge basis in which the set of
unit decomposable bivectors splits as a product of two spheres of radius
1/sqrt(2); the first three coordinates form the "minus" half, the last three
the "plus" half.
"""

from __future__ import annotations

import numpy as np

from .sphere import normalize

QUAT_ONE = np.array([1.0, 0.0, 0.0, 0.0])
QUAT_I = np.array([0.0, 1.0, 0.0, 0.0])
QUAT_J = np.array([0.0, 0.0, 1.0, 0.0])
QUAT_K = np.array([0.0, 0.0, 0.0, 1.0])

HALF_NORM = 1.0 / np.sqrt(2.0)  # radius of each factor sphere


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product, broadcasting over leading axes."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    bw, bx, by, bz = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def quat_conj(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def quat_norm(q: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.asarray(q, dtype=float), axis=-1)


def check_unit_quat(q: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    err = np.abs(quat_norm(q) - 1.0)
    if np.any(err > tol):
        raise ValueError(f"quaternion is not unit (|norm-1| = {float(np.max(err)):.3e})")
    return q


def _conjugate_vector(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Imaginary part of q * v * conj(q) for a pure-imaginary basis vector v."""
    return quat_mul(quat_mul(q, v), quat_conj(q))[..., 1:]


def hopf(q: np.ndarray) -> np.ndarray:
    """Hopf fibration S^3 -> S^2, q |-> q i conj(q)."""
    q = check_unit_quat(q)
    return _conjugate_vector(q, QUAT_I)


def hopf_tangent(q: np.ndarray) -> np.ndarray:
    """q j conj(q): the unit tangent carried along with hopf(q)."""
    q = check_unit_quat(q)
    return _conjugate_vector(q, QUAT_J)


def sigma(q: np.ndarray) -> np.ndarray:
    """Rotation matrix with columns q i conj(q), q j conj(q), q k conj(q)."""
    q = check_unit_quat(q)
    cols = [_conjugate_vector(q, v) for v in (QUAT_I, QUAT_J, QUAT_K)]
    return np.stack(cols, axis=-1)


def check_rotation(r: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    ident = np.broadcast_to(np.eye(3), r.shape)
    ortho = np.max(np.abs(np.swapaxes(r, -1, -2) @ r - ident))
    det = np.linalg.det(r)
    if ortho > tol or np.any(np.abs(det - 1.0) > tol):
        raise ValueError("matrix is not a rotation (orthogonality/det check failed)")
    return r


def quat_of_frame(r: np.ndarray) -> np.ndarray:
    """Unit quaternion q (up to sign) with sigma(q) = r.

    Uses the numerically stable branch on the largest of trace and diagonal
    entries; the sign is fixed by w >= 0, ties broken by the first nonzero
    component positive.
    """
    r = check_rotation(r)
    return _quat_of_frame_unchecked(r)


def _quat_of_frame_unchecked(r: np.ndarray) -> np.ndarray:
    """quat_of_frame without the rotation check, for frames built in-process."""
    r = np.asarray(r, dtype=float)
    m00, m11, m22 = r[..., 0, 0], r[..., 1, 1], r[..., 2, 2]
    tr = m00 + m11 + m22

    # four branch candidates, each valid where its pivot dominates
    s_w = np.sqrt(np.maximum(1.0 + tr, 0.0))
    q_w = np.stack(
        [
            0.5 * s_w,
            0.5 * (r[..., 2, 1] - r[..., 1, 2]) / np.where(s_w == 0, 1, s_w),
            0.5 * (r[..., 0, 2] - r[..., 2, 0]) / np.where(s_w == 0, 1, s_w),
            0.5 * (r[..., 1, 0] - r[..., 0, 1]) / np.where(s_w == 0, 1, s_w),
        ],
        axis=-1,
    )
    s_x = np.sqrt(np.maximum(1.0 + m00 - m11 - m22, 0.0))
    q_x = np.stack(
        [
            0.5 * (r[..., 2, 1] - r[..., 1, 2]) / np.where(s_x == 0, 1, s_x),
            0.5 * s_x,
            0.5 * (r[..., 0, 1] + r[..., 1, 0]) / np.where(s_x == 0, 1, s_x),
            0.5 * (r[..., 0, 2] + r[..., 2, 0]) / np.where(s_x == 0, 1, s_x),
        ],
        axis=-1,
    )
    s_y = np.sqrt(np.maximum(1.0 - m00 + m11 - m22, 0.0))
    q_y = np.stack(
        [
            0.5 * (r[..., 0, 2] - r[..., 2, 0]) / np.where(s_y == 0, 1, s_y),
            0.5 * (r[..., 0, 1] + r[..., 1, 0]) / np.where(s_y == 0, 1, s_y),
            0.5 * s_y,
            0.5 * (r[..., 1, 2] + r[..., 2, 1]) / np.where(s_y == 0, 1, s_y),
        ],
        axis=-1,
    )
    s_z = np.sqrt(np.maximum(1.0 - m00 - m11 + m22, 0.0))
    q_z = np.stack(
        [
            0.5 * (r[..., 1, 0] - r[..., 0, 1]) / np.where(s_z == 0, 1, s_z),
            0.5 * (r[..., 0, 2] + r[..., 2, 0]) / np.where(s_z == 0, 1, s_z),
            0.5 * (r[..., 1, 2] + r[..., 2, 1]) / np.where(s_z == 0, 1, s_z),
            0.5 * s_z,
        ],
        axis=-1,
    )

    pivots = np.stack([tr, m00, m11, m22], axis=-1)
    choice = np.argmax(pivots, axis=-1)
    q = np.choose(choice[..., None], [q_w, q_x, q_y, q_z])
    q = normalize(q)

    # sign convention: w >= 0; on a w == 0 tie the first nonzero of (x, y, z)
    # is made positive
    w = q[..., 0]
    tie = np.abs(w) < 1e-14
    first = np.where(
        np.abs(q[..., 1]) > 1e-14,
        q[..., 1],
        np.where(np.abs(q[..., 2]) > 1e-14, q[..., 2], q[..., 3]),
    )
    sign = np.where(tie, np.sign(first), np.sign(np.where(w == 0, 1.0, w)))
    sign = np.where(sign == 0, 1.0, sign)
    return q * sign[..., None]


def circle_direction(kappa: np.ndarray | float) -> np.ndarray:
    """The unit imaginary quaternion (kappa*i + k)/sqrt(1 + kappa^2)."""
    kappa = np.asarray(kappa, dtype=float)
    s = 1.0 / np.sqrt(1.0 + kappa * kappa)
    zeros = np.zeros_like(kappa)
    return np.stack([zeros, kappa * s, zeros, s], axis=-1)


def great_circle_point(q: np.ndarray, kappa: np.ndarray | float, t: np.ndarray | float) -> np.ndarray:
    """Point at angle t on the great circle through q in direction q*u(kappa)."""
    q = np.asarray(q, dtype=float)
    t = np.asarray(t, dtype=float)
    qu = quat_mul(q, circle_direction(kappa))
    return np.cos(t)[..., None] * q + np.sin(t)[..., None] * qu


# ---------------------------------------------------------------------------
# Bivector coordinates of oriented 2-planes
# ---------------------------------------------------------------------------

def plane_coords(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Six coordinates of the oriented plane spanned by the orthonormal pair (a, b).

    With B_uv = a_u b_v - a_v b_u the components are
        x1 = (B01 - B23)/sqrt2   x4 = (B01 + B23)/sqrt2
        x2 = (B02 + B13)/sqrt2   x5 = (B02 - B13)/sqrt2
        x3 = (B03 - B12)/sqrt2   x6 = (B03 + B12)/sqrt2
    and both halves (x1,x2,x3), (x4,x5,x6) have norm 1/sqrt(2).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na = np.abs(np.linalg.norm(a, axis=-1) - 1.0)
    nb = np.abs(np.linalg.norm(b, axis=-1) - 1.0)
    dot = np.abs(np.sum(a * b, axis=-1))
    if np.any(na > tol) or np.any(nb > tol) or np.any(dot > tol):
        raise ValueError("plane_coords expects an orthonormal pair")
    return _plane_coords_unchecked(a, b)


def _plane_coords_unchecked(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    def bc(u, v):
        return a[..., u] * b[..., v] - a[..., v] * b[..., u]

    b01, b02, b03 = bc(0, 1), bc(0, 2), bc(0, 3)
    b12, b13, b23 = bc(1, 2), bc(1, 3), bc(2, 3)
    s = HALF_NORM
    return np.stack(
        [
            (b01 - b23) * s,
            (b02 + b13) * s,
            (b03 - b12) * s,
            (b01 + b23) * s,
            (b02 - b13) * s,
            (b03 + b12) * s,
        ],
        axis=-1,
    )


def check_bivector(x: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Validate the decomposable-unit invariant: both halves have norm 1/sqrt2."""
    x = np.asarray(x, dtype=float)
    minus = np.linalg.norm(x[..., :3], axis=-1)
    plus = np.linalg.norm(x[..., 3:], axis=-1)
    if np.any(np.abs(minus**2 - 0.5) > tol) or np.any(np.abs(plus**2 - 0.5) > tol):
        raise ValueError("not a 2-plane")
    return x


def bivector_to_plane(x: np.ndarray, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal (a, b) spanning the oriented plane with coordinates x.

    Inverse of :func:`plane_coords` up to rotation of (a, b) within the plane.
    """
    x = check_bivector(x, tol)
    s = HALF_NORM
    b01 = (x[..., 0] + x[..., 3]) * s
    b23 = (x[..., 3] - x[..., 0]) * s
    b02 = (x[..., 1] + x[..., 4]) * s
    b13 = (x[..., 1] - x[..., 4]) * s
    b03 = (x[..., 2] + x[..., 5]) * s
    b12 = (x[..., 5] - x[..., 2]) * s

    zeros = np.zeros_like(b01)
    m = np.stack(
        [
            np.stack([zeros, b01, b02, b03], axis=-1),
            np.stack([-b01, zeros, b12, b13], axis=-1),
            np.stack([-b02, -b12, zeros, b23], axis=-1),
            np.stack([-b03, -b13, -b23, zeros], axis=-1),
        ],
        axis=-2,
    )
    # columns of m lie in the plane; m applied to an in-plane vector rotates it
    # by 90 degrees there, so (column, m @ column) is an orthonormal basis
    col_norms = np.linalg.norm(m, axis=-2)
    pick = np.argmax(col_norms, axis=-1)
    a = normalize(np.take_along_axis(m, pick[..., None, None], axis=-1)[..., 0])
    b = normalize(np.einsum("...ij,...j->...i", m, a))

    # fix orientation so plane_coords reproduces x rather than -x
    coords = _plane_coords_unchecked(a, b)
    flip = np.sum(coords * x, axis=-1) < 0.0
    a_out = np.where(flip[..., None], b, a)
    b_out = np.where(flip[..., None], a, b)
    return a_out, b_out
