"""Unit-sphere primitives shared across the library.

Conventions: points of S^2 are unit 3-vectors, batched arrays have the
3-component axis last.  Tangent frames, great-arc interpolation and the
recursively subdivided icosahedral quadrature grid all live here.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

UNIT_TOL = 1e-12

_POLE_SEAM = 1.0 - 1e-6


def normalize(v: np.ndarray) -> np.ndarray:
    """Normalize along the last axis."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    return v / n


def check_unit(v: np.ndarray, tol: float = UNIT_TOL, what: str = "vector") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    err = np.abs(np.linalg.norm(v, axis=-1) - 1.0)
    if np.any(err > tol):
        raise ValueError(f"{what} is not unit length (|norm-1| = {float(np.max(err)):.3e})")
    return v


def tangent_frame(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal tangent frame (E1, E2) at p with E2 = p x E1.

    E1 = normalize(e_ref x p) with e_ref = e_z, falling back to e_x when p is
    within 1e-6 of a pole.  Smooth away from the fallback seam; callers that
    differentiate across the seam should supply their own transported frame.
    """
    p = np.asarray(p, dtype=float)
    near_pole = np.abs(p[..., 2]) > _POLE_SEAM
    e_ref = np.where(near_pole[..., None], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0])
    e1 = normalize(np.cross(e_ref, p))
    e2 = np.cross(p, e1)
    return e1, e2


def transported_frame(p: np.ndarray, e1_ref: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Frame at p obtained by projecting a reference tangent vector onto T_p."""
    p = np.asarray(p, dtype=float)
    e1 = e1_ref - p * np.sum(p * e1_ref, axis=-1, keepdims=True)
    e1 = normalize(e1)
    return e1, np.cross(p, e1)


def arc_angle(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Angle between unit vectors, stable for nearly equal/antipodal pairs."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    cr = np.linalg.norm(np.cross(a, b), axis=-1)
    dt = np.sum(a * b, axis=-1)
    return np.arctan2(cr, dt)


def slerp(a: np.ndarray, b: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Great-arc interpolation x(s) from a (s=0) to b (s=1)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    s = np.asarray(s, dtype=float)
    phi = arc_angle(a, b)
    if np.any(phi > np.pi - 1e-9):
        raise ValueError("antipodal vertices: great arc undefined")
    small = phi < 1e-12
    phi_safe = np.where(small, 1.0, phi)
    w0 = np.where(small, 1.0 - s, np.sin((1.0 - s) * phi_safe) / np.sin(phi_safe))
    w1 = np.where(small, s, np.sin(s * phi_safe) / np.sin(phi_safe))
    return w0[..., None] * a + w1[..., None] * b


def slerp_velocity(a: np.ndarray, b: np.ndarray, s: np.ndarray) -> np.ndarray:
    """d/ds of slerp(a, b, s); magnitude equals the arc angle."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    s = np.asarray(s, dtype=float)
    phi = arc_angle(a, b)
    small = phi < 1e-12
    phi_safe = np.where(small, 1.0, phi)
    w0 = np.where(small, -1.0, -phi * np.cos((1.0 - s) * phi_safe) / np.sin(phi_safe))
    w1 = np.where(small, 1.0, phi * np.cos(s * phi_safe) / np.sin(phi_safe))
    return w0[..., None] * a + w1[..., None] * b


def random_unit_vectors(rng: np.random.Generator, n: int) -> np.ndarray:
    return normalize(rng.standard_normal((n, 3)))


# ---------------------------------------------------------------------------
# Icosahedral grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SphereGrid:
    """Recursively subdivided icosahedron projected to the unit sphere.

    ``vertices``  unit vertex array (V, 3)
    ``faces``     index triples (F, 3)
    ``centroids`` normalized face centroids (F, 3)
    ``areas``     spherical triangle areas (F,), summing to 4*pi
    """

    level: int
    vertices: np.ndarray
    faces: np.ndarray
    centroids: np.ndarray
    areas: np.ndarray


def _base_icosahedron() -> tuple[np.ndarray, np.ndarray]:
    g = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            (-1, g, 0), (1, g, 0), (-1, -g, 0), (1, -g, 0),
            (0, -1, g), (0, 1, g), (0, -1, -g), (0, 1, -g),
            (g, 0, -1), (g, 0, 1), (-g, 0, -1), (-g, 0, 1),
        ],
        dtype=float,
    )
    faces = np.array(
        [
            (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
            (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
            (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
            (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
        ],
        dtype=np.int64,
    )
    return normalize(verts), faces


def spherical_triangle_areas(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Solid angle of the spherical triangle (a, b, c) via Van Oosterom-Strackee."""
    num = np.abs(np.sum(a * np.cross(b, c), axis=-1))
    den = 1.0 + np.sum(a * b, axis=-1) + np.sum(b * c, axis=-1) + np.sum(c * a, axis=-1)
    return 2.0 * np.arctan2(num, den)


@lru_cache(maxsize=8)
def sphere_grid(level: int) -> SphereGrid:
    if level < 0:
        raise ValueError("grid level must be >= 0")
    verts, faces = _base_icosahedron()
    verts = [tuple(v) for v in verts]
    for _ in range(level):
        midpoint: dict[tuple[int, int], int] = {}
        new_faces = []

        def mid(i: int, j: int) -> int:
            key = (i, j) if i < j else (j, i)
            idx = midpoint.get(key)
            if idx is None:
                m = np.asarray(verts[i]) + np.asarray(verts[j])
                m = m / np.linalg.norm(m)
                idx = len(verts)
                verts.append(tuple(m))
                midpoint[key] = idx
            return idx

        for i, j, k in faces:
            a, b, c = mid(i, j), mid(j, k), mid(k, i)
            new_faces += [(i, a, c), (j, b, a), (k, c, b), (a, b, c)]
        faces = np.array(new_faces, dtype=np.int64)

    v = np.array(verts, dtype=float)
    pa, pb, pc = v[faces[:, 0]], v[faces[:, 1]], v[faces[:, 2]]
    centroids = normalize((pa + pb + pc) / 3.0)
    areas = spherical_triangle_areas(pa, pb, pc)
    return SphereGrid(level=level, vertices=v, faces=faces, centroids=centroids, areas=areas)
