"""Acceptance suite: one test per shipped guarantee, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one summary line per
criterion alongside the pass/fail status.
"""

import io
import time

import numpy as np
import pytest

from circlefinsler import (
    ContactElement,
    KappaField,
    MeasureDensity,
    QuadratureSpec,
    SphereCircle,
    admissibility,
    circle_arc,
    circle_deviation,
    circle_from_contact,
    crofton_length,
    finsler_length,
    geodesic_trace,
    fiber_through,
    hessian_F2,
    hopf_project_circle,
    local_minimality_check,
    pi2_map,
    polyline_from_circle,
    recover_measure,
    sigma,
    tangent_circle,
    great_circle_point,
    hopf,
)
from circlefinsler import horocycle as hc
from circlefinsler.cli import main as cli_main
from circlefinsler.metric import finsler_F_batch
from circlefinsler.sphere import normalize
from conftest import random_contact

SPEC = QuadratureSpec()

ROUND = (KappaField.zero(), MeasureDensity.constant(1.0))
TILT = (KappaField.from_linear([0.0, 0.0, 0.5]), MeasureDensity.constant(1.0))
MIXED = (
    KappaField.from_linear([0.3, 0.0, 0.2]),
    MeasureDensity.linear(1.0, [0.0, 1.0, 0.0], 0.2).even_part(),
)


def report(name, detail, started):
    print(f"\nPASS {name}: {detail}  [{time.time() - started:.1f}s]")


def random_arc(rng):
    p, t = random_contact(rng)
    circle = circle_from_contact(ContactElement(p, t), rng.uniform(-1.0, 1.0))
    length = rng.uniform(0.3, 0.9)
    start = rng.uniform(0, circle.circumference())
    return circle_arc(circle, start, start + length, 33)


def test_criterion_1_round_case_constant():
    started = time.time()
    field, density = ROUND
    rng = np.random.default_rng(101)
    pts, vecs = [], []
    for _ in range(50):
        p, t = random_contact(rng)
        pts.append(p)
        vecs.append(rng.uniform(0.2, 3.0) * t)
    pts, vecs = np.array(pts), np.array(vecs)
    ratios = finsler_F_batch(field, density, pts, vecs, SPEC) / np.linalg.norm(vecs, axis=1)
    worst = float(np.max(np.abs(ratios - 4.0))) / 4.0
    assert worst < 0.005

    equator = polyline_from_circle(SphereCircle(np.array([0.0, 0.0, 1.0]), np.pi / 2), 128)
    oracle = crofton_length(field, density, equator, SPEC)
    gap = abs(oracle - 8 * np.pi) / (8 * np.pi)
    assert gap < 0.01
    report("criterion 1", f"F/|v| = 4 within {worst:.2%} (50 samples); "
                          f"equator oracle 8pi within {gap:.2%}", started)


def test_criterion_2_crofton_consistency():
    started = time.time()
    rng = np.random.default_rng(202)
    worst = 0.0
    for field, density in (TILT, MIXED):
        for _ in range(5):
            poly = random_arc(rng)
            lf = finsler_length(field, density, poly, SPEC)
            lc = crofton_length(field, density, poly, SPEC)
            worst = max(worst, abs(lf - lc) / lc)
    assert worst < 0.01
    report("criterion 2", f"metric vs oracle length gap < 1% "
                          f"(worst {worst:.2%} over 10 random polylines)", started)


def test_criterion_3_geodesics_are_circles():
    started = time.time()
    rng = np.random.default_rng(303)
    worst_dev = 0.0
    for field, density in (TILT, MIXED):
        for _ in range(20):
            p, t = random_contact(rng)
            element = ContactElement(p, t)
            _, target = tangent_circle(field, element)
            trace = geodesic_trace(field, density, element, 1.0, SPEC)
            worst_dev = max(worst_dev, circle_deviation(trace, target))
        assert worst_dev < 1e-3
        p, t = random_contact(rng)
        assert local_minimality_check(field, density, ContactElement(p, t),
                                      arc_len=0.4, n_perturbations=20, seed=11, spec=SPEC)
    report("criterion 3", f"20+20 traces stay on their circles "
                          f"(worst deviation {worst_dev:.1e}); minimality holds (K=20)", started)


def test_criterion_4_quadratic_convexity():
    started = time.time()
    rng = np.random.default_rng(404)
    min_eig = np.inf
    worst_null = 0.0
    worst_align = 0.0
    for i in range(50):
        field, density = TILT if i % 2 == 0 else MIXED
        p, t = random_contact(rng)
        v = rng.uniform(0.5, 2.0) * t
        rep = hessian_F2(field, density, p, v, SPEC)
        min_eig = min(min_eig, float(rep.energy_eigenvalues.min()))
        eigs = np.sort(np.abs(rep.norm_eigenvalues))
        worst_null = max(worst_null, eigs[0] / eigs[1])
        worst_align = max(worst_align, float(np.linalg.norm(np.cross(rep.null_direction, normalize(v)))))
        assert rep.norm_eigenvalues.max() > 0.0
    assert min_eig > 0.0
    assert worst_null < 0.01
    assert worst_align < 1e-3
    report("criterion 4", f"energy Hessian positive definite (min eig {min_eig:.3f}); "
                          f"norm Hessian null mode along v (align err {worst_align:.1e})", started)


def test_criterion_5_admissibility_boundary():
    started = time.time()
    for a in (0.25, 0.5, 0.75):
        rep = admissibility(KappaField.from_linear([0, 0, a]), 5)
        assert rep.ok
        assert rep.margin == pytest.approx(1.0 - a, abs=1e-3)
    assert not admissibility(KappaField.from_linear([0, 0, 2.0]), 5).ok

    rng = np.random.default_rng(505)
    worst_flip = 0.0
    for a in (0.25, 0.5, 0.75):
        field = KappaField.from_linear([0, 0, a])
        q = normalize(rng.standard_normal((50, 4)))
        fiber_through(field, q)  # raises on any non-convergence
        for _ in range(10):
            p, t = random_contact(rng)
            theta = rng.uniform(0, 2 * np.pi)
            x1 = pi2_map(field, p, np.array([theta]))[0]
            x2 = pi2_map(field, p, np.array([theta + np.pi]))[0]
            worst_flip = max(worst_flip, float(np.max(np.abs(x1 + x2))))
    assert worst_flip < 1e-9
    report("criterion 5", "margins 1-a exact on grid, a=2 rejected; all admissible "
                          f"solves converge; half-turn flip err {worst_flip:.1e}", started)


def test_criterion_6_hopf_projection():
    started = time.time()
    rng = np.random.default_rng(606)
    worst_kappa = worst_speed = worst_frenet = 0.0
    for kappa in (0.0, 0.5, -0.5, 1.0, -1.0, 2.0):
        for _ in range(10):
            q = normalize(rng.standard_normal(4))
            circle, speed = hopf_project_circle(q, kappa)
            worst_kappa = max(worst_kappa, abs(circle.curvature - kappa))
            worst_speed = max(worst_speed, abs(speed - 2.0 / np.sqrt(1 + kappa**2)))
            # Frenet-frame identity along the lifted circle
            t_val = rng.uniform(0, np.pi)
            here = great_circle_point(q, kappa, t_val)
            frame = sigma(here)
            dt = 1e-6
            vel = (hopf(great_circle_point(q, kappa, t_val + dt))
                   - hopf(great_circle_point(q, kappa, t_val - dt))) / (2 * dt)
            vel /= np.linalg.norm(vel)
            x = hopf(here)
            expected = np.stack([x, vel, np.cross(x, vel)], axis=-1)
            worst_frenet = max(worst_frenet, float(np.max(np.abs(frame - expected))))
    assert worst_kappa < 1e-4
    assert worst_speed < 1e-6
    assert worst_frenet < 1e-8
    report("criterion 6", f"fitted curvature err {worst_kappa:.1e}, speed err "
                          f"{worst_speed:.1e}, Frenet identity err {worst_frenet:.1e}", started)


def test_criterion_7_measure_recovery():
    started = time.time()
    cases = [
        (*ROUND, "round"),
        (*TILT, "tilt"),
        (KappaField.from_linear([0, 0, 0.5]),
         MeasureDensity.linear(1.0, [0.0, 0.0, 1.0], 0.3), "odd-perturbed"),
    ]
    worst = 0.0
    for field, density, _ in cases:
        rec = recover_measure(field, density, grid_level=4, spec=SPEC)
        target = density.even_part().value(rec.points)
        worst = max(worst, float(np.max(np.abs(rec.m_hat - target) / target)))
    assert worst < 0.02
    report("criterion 7", f"recovered density matches even part within {worst:.2%} "
                          "at grid level 4 (3 configs)", started)


def test_criterion_8_hyperbolic_horocycles():
    started = time.time()
    apex = np.array([0.0, 0.0, 1.0])
    e1 = np.array([1.0, 0.0, 0.0])
    c0 = hc.finsler_F_h("unit", apex, e1, SPEC.n_theta)
    assert c0 == pytest.approx(4.0, abs=1e-3)

    rng = np.random.default_rng(808)
    vals, ratio_err = [], 0.0
    for _ in range(20):
        iso = hc.random_isometry(rng)
        x, v = iso @ apex, iso @ e1
        f_unit = hc.finsler_F_h("unit", x, v, SPEC.n_theta)
        f_conf = hc.finsler_F_h("xi3", x, v, SPEC.n_theta)
        vals.append(f_unit)
        ratio_err = max(ratio_err, abs(f_conf / f_unit - x[2]) / x[2])
    vals = np.array(vals)
    spread = float((vals.max() - vals.min()) / vals.mean())
    assert spread < 1e-3
    assert ratio_err < 1e-3

    x0 = np.array([np.sinh(1.0), 0.0, np.cosh(1.0)])
    v0 = np.array([0.0, 1.0, 0.0])
    div = hc.conformal_divergence(x0, v0, 1.0)
    ctrl = hc.conformal_divergence(x0, v0, 1.0, exponent=0.0)
    assert div > 0.01
    assert ctrl < 1e-6
    report("criterion 8", f"c0 = {c0:.5f}, invariance spread {spread:.1e}, conformal "
                          f"ratio err {ratio_err:.1e}, divergence {div:.3f} vs control {ctrl:.1e}",
           started)


def test_criterion_9_determinism():
    started = time.time()
    tilt = ["--set", "kappa.family=linear", "--set", "kappa.coefficients=0,0,0.5"]
    commands = [
        ["roundtrip", "--grid-level", "1", *tilt],
        ["crofton-check", "--curve", "random:2", *tilt],
        ["fibration-export", "--grid-level", "1", *tilt],
    ]
    for argv in commands:
        outputs = []
        for workers in (1, 4, 8):
            buf = io.StringIO()
            assert cli_main(["--workers", str(workers), *argv], out=buf) == 0
            outputs.append(buf.getvalue())
        assert outputs[0] == outputs[1] == outputs[2], f"worker-dependent output for {argv}"
    report("criterion 9", "byte-identical command output under 1, 4, 8 workers "
                          "(roundtrip, crofton-check, fibration-export)", started)
