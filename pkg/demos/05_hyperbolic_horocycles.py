"""Horocycles of the hyperbolic plane: where the construction turns subtle.

Horocycles form a cooriented family, and that changes the story: the
invariant measure still yields a metric (a constant multiple of the
hyperbolic one, value 4 on unit vectors, matching the round-sphere constant),
but weighting it by xi3 gives a conformal multiple with genuinely different
unparameterized geodesics.
"""

import numpy as np

from circlefinsler import horocycle as hc

apex = np.array([0.0, 0.0, 1.0])
e1 = np.array([1.0, 0.0, 0.0])

print("horocycle through the apex, cooriented by e1")
xi = hc.horocycle_of(apex, e1)
pts = hc.horocycle_points(xi, apex, np.linspace(-2, 2, 5))
print(f"  label xi = {xi},  [xi, xi] = {hc.pair(xi, xi):.1e}")
for s, p in zip(np.linspace(-2, 2, 5), pts):
    print(f"  s = {s:+.1f}: x = [{p[0]:+.4f} {p[1]:+.4f} {p[2]:+.4f}], "
          f"[xi, x] = {hc.pair(xi, p):.12f}")

print()
print("the invariant-measure metric is a constant multiple of hyperbolic")
print(f"  value at the apex: {hc.finsler_F_h('unit', apex, e1):.6f}  (the constant is 4)")
rng = np.random.default_rng(2)
vals = []
for _ in range(5):
    iso = hc.random_isometry(rng)
    x, v = iso @ apex, iso @ e1
    f_u = hc.finsler_F_h("unit", x, v)
    f_c = hc.finsler_F_h("xi3", x, v)
    vals.append(f_u)
    print(f"  boosted sample: F = {f_u:.6f},  F_conformal / F = {f_c / f_u:.6f} vs x3 = {x[2]:.6f}")
print(f"  spread of F across isometries: {max(vals) - min(vals):.2e}")

print()
print("length of a geodesic segment via horocycle counting (expect 4 L)")
for length in (0.5, 1.0):
    val = hc.horocycle_crofton_length(apex, e1, length)
    print(f"  L = {length}: oracle {val:.5f}  vs  {4 * length}")

print()
print("conformal weight bends geodesics (constant weight does not)")
x0 = np.array([np.sinh(1.0), 0.0, np.cosh(1.0)])
v0 = np.array([0.0, 1.0, 0.0])
print(f"  divergence from the true geodesic after T = 1: "
      f"{hc.conformal_divergence(x0, v0, 1.0):.4f}")
print(f"  control with constant weight:                  "
      f"{hc.conformal_divergence(x0, v0, 1.0, exponent=0.0):.1e}")
