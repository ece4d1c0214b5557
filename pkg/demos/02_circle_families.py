"""Circle families on the sphere from an odd curvature field.

An odd function kappa on the unit sphere with slope ratio
||grad kappa|| / (1 + kappa^2) < 1 assigns to every contact element a unique
circle, found by a contracting fixed-point solve on the label sphere.  The
labels behave like a second sphere: reversing the element flips the label,
and realizing a label reproduces the circle that solves back to it.
"""

import numpy as np

from circlefinsler import (
    ContactElement,
    KappaField,
    admissibility,
    circle_point,
    circle_tangent_at,
    fiber_through,
    realize_circle,
    tangent_circle,
)

field = KappaField.from_linear([0.0, 0.0, 0.5])

print("admissibility scan for kappa = a * x3")
for a in (0.25, 0.5, 0.75, 2.0):
    report = admissibility(KappaField.from_linear([0, 0, a]), grid_level=4)
    status = "ok" if report.ok else "FAIL"
    print(f"  a = {a:4.2f}: {status:4} margin = {report.margin:+.4f}")

print()
print("fixed-point fiber solve through a few lifts")
rng = np.random.default_rng(7)
for _ in range(3):
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    label, kappa_val, history = fiber_through(field, q, return_history=True)
    print(f"  converged in {len(history):2d} iterations to kappa = {kappa_val:+.4f}, "
          f"label = [{label[0]:+.3f} {label[1]:+.3f} {label[2]:+.3f}]")

print()
print("tangent circle through a contact element, then the label roundtrip")
p = np.array([1.0, 0.0, 0.0])
t = np.array([0.0, 1.0, 0.0])
label, circle = tangent_circle(field, ContactElement(p, t))
print(f"  circle axis {circle.axis.round(4)}, radius {circle.radius:.4f}, "
      f"curvature {circle.curvature:+.4f}")
print(f"  label {label.round(6)}")
rebuilt = realize_circle(field, label)
probe = circle_point(rebuilt, 0.9)
label_back, _ = tangent_circle(field, ContactElement(probe, circle_tangent_at(rebuilt, probe)))
print(f"  realize + re-solve from another point: label error {np.abs(label_back - label).max():.2e}")

print()
print("reversing the element flips the label and the orientation")
label_rev, circle_rev = tangent_circle(field, ContactElement(p, -t))
print(f"  label + reversed label: {np.abs(label + label_rev).max():.2e}")
print(f"  radius + reversed radius - pi: {abs(circle.radius + circle_rev.radius - np.pi):.2e}")
