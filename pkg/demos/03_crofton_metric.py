"""From a measure on circle labels to a metric, and the counting oracle.

Weighting the circle family by a positive density m turns intersection
counting into a length functional: the metric F is the fiberwise cosine
transform of an induced density, and independently the length of any curve
equals the m-weighted count of family circles crossing it.  The round check:
with kappa = 0 and m = 1 every great circle crosses the equator twice, so the
equator has length 2 * area(S^2) = 8 pi, i.e. F = 4 |v|.
"""

import numpy as np

from circlefinsler import (
    ContactElement,
    KappaField,
    MeasureDensity,
    QuadratureSpec,
    SphereCircle,
    circle_arc,
    circle_from_contact,
    crofton_length,
    finsler_F,
    finsler_length,
    hessian_F2,
    indicatrix_sample,
    polyline_from_circle,
)

spec = QuadratureSpec()
round_field, unit = KappaField.zero(), MeasureDensity.constant(1.0)

print("round configuration")
f_val = finsler_F(round_field, unit, np.array([1.0, 0, 0]), np.array([0.0, 1, 0]), spec)
print(f"  F(p, unit v) = {f_val:.8f}   (4 from the 8 pi equator count)")
equator = polyline_from_circle(SphereCircle(np.array([0.0, 0, 1]), np.pi / 2), 128)
print(f"  metric equator length  = {finsler_length(round_field, unit, equator, spec):.6f}")
print(f"  counting oracle length = {crofton_length(round_field, unit, equator, spec):.6f}")
print(f"  8 pi                   = {8 * np.pi:.6f}")

print()
print("a tilted family: lengths still agree with the oracle")
field = KappaField.from_linear([0.0, 0.0, 0.5])
rng = np.random.default_rng(3)
for i in range(3):
    p = rng.standard_normal(3); p /= np.linalg.norm(p)
    t = np.cross(rng.standard_normal(3), p); t /= np.linalg.norm(t)
    circle = circle_from_contact(ContactElement(p, t), rng.uniform(-1, 1))
    arc = circle_arc(circle, 0.0, rng.uniform(0.3, 0.9), 33)
    lf = finsler_length(field, unit, arc, spec)
    lc = crofton_length(field, unit, arc, spec)
    print(f"  arc {i}: metric {lf:.6f}  oracle {lc:.6f}  gap {abs(lf - lc) / lc:.2%}")

print()
print("the unit ball is quadratically convex (velocity Hessian of F^2/2)")
p = np.array([0.6, 0.0, 0.8])
v = np.array([0.0, 1.0, 0.0])
report = hessian_F2(field, unit, p, v, spec)
print(f"  energy Hessian eigenvalues: {report.energy_eigenvalues.round(4)}")
print(f"  norm Hessian eigenvalues:   {report.norm_eigenvalues.round(6)} "
      "(one null mode, along v)")

rows = indicatrix_sample(field, unit, p, 8, spec)
print()
print("indicatrix radii at 8 directions (1/F on unit tangents):")
print("  " + "  ".join(f"{r:.5f}" for r in rows[:, 1]))
