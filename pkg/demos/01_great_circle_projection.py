"""Great circles of the three-sphere project to circles of every curvature.

A unit quaternion q and a real parameter kappa pick out a great circle
through q; pushing it down to the two-sphere by q |-> q i conj(q) yields the
circle through the projected point, tangent to the carried direction, with
geodesic curvature exactly kappa and constant speed 2/sqrt(1 + kappa^2).
This script samples a few (q, kappa) pairs and checks the fit numerically.
"""

import numpy as np

from circlefinsler import (
    ContactElement,
    circle_from_contact,
    great_circle_point,
    hopf,
    hopf_project_circle,
    hopf_tangent,
    sigma,
)

rng = np.random.default_rng(1)

print("projected circles vs the direct contact-element construction")
print(f"{'kappa':>7} {'fit kappa':>12} {'speed':>10} {'2/sqrt(1+k^2)':>14} {'axis gap':>10}")
for kappa in (0.0, 0.5, -1.0, 2.0):
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    projected, speed = hopf_project_circle(q, kappa)
    direct = circle_from_contact(ContactElement(hopf(q), hopf_tangent(q)), kappa)
    axis_gap = np.abs(projected.axis - direct.axis).max()
    print(f"{kappa:7.2f} {projected.curvature:12.8f} {speed:10.6f} "
          f"{2 / np.sqrt(1 + kappa**2):14.6f} {axis_gap:10.2e}")

print()
print("the rotation attached to each circle point is its Frenet frame")
q = rng.standard_normal(4)
q /= np.linalg.norm(q)
kappa = 0.8
dt = 1e-6
for t in (0.0, 1.0, 2.2):
    here = great_circle_point(q, kappa, t)
    frame = sigma(here)
    x = hopf(here)
    vel = (hopf(great_circle_point(q, kappa, t + dt))
           - hopf(great_circle_point(q, kappa, t - dt))) / (2 * dt)
    vel /= np.linalg.norm(vel)
    err = np.abs(frame - np.stack([x, vel, np.cross(x, vel)], axis=-1)).max()
    print(f"  t = {t:.1f}: max |sigma - (x, v, x cross v)| = {err:.2e}")
