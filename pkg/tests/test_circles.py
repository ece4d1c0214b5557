import numpy as np
import pytest

from circlefinsler import (
    ContactElement,
    SphereCircle,
    circle_circle_intersect,
    circle_from_contact,
    circle_point,
    circle_tangent_at,
    count_intersections,
    fit_circle,
    hopf_project_circle,
    hopf,
    hopf_tangent,
    polyline_from_circle,
)
from conftest import random_contact

EX = np.array([1.0, 0.0, 0.0])
EY = np.array([0.0, 1.0, 0.0])
EZ = np.array([0.0, 0.0, 1.0])


def random_unit_quat(rng):
    q = rng.standard_normal(4)
    return q / np.linalg.norm(q)


class TestCircleFromContact:
    def test_great_circle(self):
        c = circle_from_contact(ContactElement(EX, EY), 0.0)
        assert np.allclose(c.axis, EZ)
        assert c.radius == pytest.approx(np.pi / 2)
        assert c.curvature == pytest.approx(0.0, abs=1e-15)

    def test_unit_curvature(self):
        c = circle_from_contact(ContactElement(EX, EY), 1.0)
        assert np.allclose(c.axis, [1 / np.sqrt(2), 0, 1 / np.sqrt(2)])
        assert c.radius == pytest.approx(np.pi / 4)
        assert EX @ c.axis == pytest.approx(np.cos(c.radius))

    def test_reversal_convention(self, rng):
        p, t = random_contact(rng)
        kappa = 0.7
        c = circle_from_contact(ContactElement(p, t), kappa)
        c_rev = circle_from_contact(ContactElement(p, -t), -kappa)
        assert np.allclose(c_rev.axis, -c.axis, atol=1e-14)
        assert c_rev.radius == pytest.approx(np.pi - c.radius)

    def test_contact_element_validation(self):
        with pytest.raises(ValueError):
            ContactElement(EX, EX)
        with pytest.raises(ValueError):
            ContactElement(EX, np.zeros(3))


class TestCirclePoint:
    def test_equator_phase(self):
        eq = SphereCircle(EZ, np.pi / 2)
        assert np.allclose(circle_point(eq, 0.0), EX, atol=1e-15)
        assert np.allclose(circle_tangent_at(eq, EX), EY, atol=1e-15)

    def test_period(self):
        c = SphereCircle(np.array([0.6, 0.0, 0.8]), 0.7)
        s = 1.234
        assert np.allclose(circle_point(c, s), circle_point(c, s + c.circumference()), atol=1e-12)

    def test_on_cone(self, rng):
        p, t = random_contact(rng)
        c = circle_from_contact(ContactElement(p, t), -0.4)
        pts = circle_point(c, np.linspace(0, 3, 17))
        assert np.max(np.abs(pts @ c.axis - np.cos(c.radius))) < 1e-14

    def test_tangent_off_circle_rejected(self):
        eq = SphereCircle(EZ, np.pi / 2)
        with pytest.raises(ValueError):
            circle_tangent_at(eq, EZ)


class TestFitCircle:
    def test_exact_equator(self):
        pts = polyline_from_circle(SphereCircle(EZ, np.pi / 2), 32, closed=False)
        c, residual = fit_circle(pts)
        assert residual < 1e-12
        assert c.radius == pytest.approx(np.pi / 2)
        assert np.allclose(c.axis, EZ, atol=1e-12)

    def test_roundtrip_curvature(self):
        base = circle_from_contact(ContactElement(EX, EY), 1.0)
        pts = circle_point(base, np.linspace(0, base.circumference(), 40, endpoint=False))
        c, _ = fit_circle(pts)
        assert c.curvature == pytest.approx(1.0, abs=1e-10)

    def test_degenerate_antipodal(self):
        pts = np.array([EX, -EX, EX, -EX])
        with pytest.raises(ValueError):
            fit_circle(pts)

    def test_too_few(self):
        with pytest.raises(ValueError):
            fit_circle(np.array([EX, EY, EZ]))


class TestHopfProjection:
    def test_flat_case(self):
        c, speed = hopf_project_circle(np.array([1.0, 0, 0, 0]), 0.0)
        assert np.allclose(c.axis, EZ, atol=1e-12)
        assert c.radius == pytest.approx(np.pi / 2)
        assert speed == pytest.approx(2.0, abs=1e-9)

    def test_unit_curvature(self):
        c, speed = hopf_project_circle(np.array([1.0, 0, 0, 0]), 1.0)
        assert c.curvature == pytest.approx(1.0, abs=1e-10)
        assert speed == pytest.approx(np.sqrt(2.0), abs=1e-9)

    def test_sign_invariance(self, rng):
        q = random_unit_quat(rng)
        c1, _ = hopf_project_circle(q, 0.6)
        c2, _ = hopf_project_circle(-q, 0.6)
        assert np.allclose(c1.axis, c2.axis, atol=1e-10)
        assert c1.radius == pytest.approx(c2.radius, abs=1e-10)

    @pytest.mark.parametrize("kappa", [0.0, 0.5, -1.0, 2.0])
    def test_matches_contact_construction(self, rng, kappa):
        # the projected circle passes through the projected point, tangent to
        # the carried direction, with the prescribed geodesic curvature
        q = random_unit_quat(rng)
        projected, speed = hopf_project_circle(q, kappa)
        direct = circle_from_contact(ContactElement(hopf(q), hopf_tangent(q)), kappa)
        assert np.max(np.abs(projected.axis - direct.axis)) < 1e-8
        assert projected.radius == pytest.approx(direct.radius, abs=1e-8)
        assert speed == pytest.approx(2 / np.sqrt(1 + kappa**2), abs=1e-8)


class TestIntersections:
    def test_equator_meridian(self):
        eq = SphereCircle(EZ, np.pi / 2)
        meridian = polyline_from_circle(SphereCircle(EY, np.pi / 2), 63)
        count, flag = count_intersections(eq, meridian)
        assert count == 2 and not flag

    def test_disjoint_hemispheres(self):
        south = SphereCircle(-EZ, 0.4)
        north_cap = polyline_from_circle(SphereCircle(EZ, 0.3), 64)
        count, flag = count_intersections(south, north_cap)
        assert count == 0 and not flag

    def test_two_great_circles(self, rng):
        for _ in range(10):
            n1 = rng.standard_normal(3); n1 /= np.linalg.norm(n1)
            n2 = rng.standard_normal(3); n2 /= np.linalg.norm(n2)
            poly = polyline_from_circle(SphereCircle(n2, np.pi / 2), 127)
            count, flag = count_intersections(SphereCircle(n1, np.pi / 2), poly)
            if not flag:
                assert count == 2

    def test_orientation_reversal_invariance(self, rng):
        c = SphereCircle(np.array([0.6, 0, 0.8]), 0.9)
        poly = polyline_from_circle(SphereCircle(np.array([0.0, 0.8, 0.6]), 1.1), 57)
        count1, _ = count_intersections(c, poly)
        count2, _ = count_intersections(c.reversed(), poly)
        assert count1 == count2

    def test_empty_polyline(self):
        c = SphereCircle(EZ, 0.5)
        assert count_intersections(c, np.zeros((0, 3)))[0] == 0


class TestCircleCircle:
    def test_orthogonal_great_circles(self):
        pts = circle_circle_intersect(SphereCircle(EZ, np.pi / 2), SphereCircle(EX, np.pi / 2))
        assert pts.shape == (2, 3)
        assert np.max(np.abs(np.linalg.norm(pts, axis=1) - 1)) < 1e-12

    def test_coaxial_disjoint(self):
        assert circle_circle_intersect(SphereCircle(EZ, 0.3), SphereCircle(EZ, 0.5)).shape == (0, 3)

    def test_tangent_pair(self):
        r1, r2 = np.pi / 4, np.pi / 3
        x0 = np.array([np.sin(r1), 0, np.cos(r1)])
        outward = (EZ - np.cos(r1) * x0) / np.sin(r1)
        n2 = np.cos(r2) * x0 + np.sin(r2) * outward
        pts = circle_circle_intersect(SphereCircle(EZ, r1), SphereCircle(n2, r2))
        assert pts.shape == (1, 3)

    def test_identical_rejected(self):
        eq = SphereCircle(EZ, np.pi / 2)
        with pytest.raises(ValueError):
            circle_circle_intersect(eq, eq)
