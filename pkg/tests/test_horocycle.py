import numpy as np
import pytest

from circlefinsler import horocycle as hc

APEX = np.array([0.0, 0.0, 1.0])
E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])


class TestLorentzBasics:
    def test_pairing_signature(self):
        assert hc.pair(APEX, APEX) == 1.0
        assert hc.pair(E1, E1) == -1.0

    def test_point_validation(self):
        with pytest.raises(ValueError):
            hc.check_point(np.array([0.0, 0.0, -1.0]))
        with pytest.raises(ValueError):
            hc.check_tangent(APEX, np.array([0.0, 0.0, 0.5]))

    def test_frame(self, rng):
        for _ in range(10):
            iso = hc.random_isometry(rng)
            x = iso @ APEX
            e1, e2 = hc.tangent_frame_h(x)
            assert hc.pair(e1, e1) == pytest.approx(-1.0, abs=1e-12)
            assert hc.pair(e2, e2) == pytest.approx(-1.0, abs=1e-12)
            assert hc.pair(e1, e2) == pytest.approx(0.0, abs=1e-12)
            assert hc.pair(e1, x) == pytest.approx(0.0, abs=1e-12)


class TestHorocycles:
    def test_label_of_apex_element(self):
        xi = hc.horocycle_of(APEX, E1)
        assert np.allclose(xi, [1.0, 0.0, 1.0])
        assert hc.pair(xi, xi) == pytest.approx(0.0, abs=1e-14)
        assert hc.pair(xi, APEX) == pytest.approx(1.0)

    def test_rotation_equivariance(self):
        rot = hc.rotation_matrix(0.9)
        xi = hc.horocycle_of(APEX, rot @ E1)
        assert np.allclose(xi, rot @ hc.horocycle_of(APEX, E1), atol=1e-14)

    def test_parabolic_parameterization(self):
        xi = hc.horocycle_of(APEX, E1)
        s = np.linspace(-5.0, 5.0, 41)
        pts = hc.horocycle_points(xi, APEX, s)
        assert np.allclose(pts[20], APEX)
        on_sheet = np.abs(hc.pair(pts, pts) - 1.0)
        incidence = np.abs(hc.pair(np.broadcast_to(xi, pts.shape), pts) - 1.0)
        assert np.max(on_sheet) < 1e-10
        assert np.max(incidence) < 1e-10

    def test_base_point_must_be_incident(self):
        xi = hc.horocycle_of(APEX, E1)
        far = hc.hyp_geodesic(APEX, E2, 1.0)
        with pytest.raises(ValueError):
            hc.horocycle_points(xi, far, np.array([0.0]))


class TestHyperbolicGeodesics:
    def test_stays_on_sheet_unit_speed(self, rng):
        for t in (0.0, 0.8, 2.5):
            g = hc.hyp_geodesic(APEX, E1, t)
            assert hc.pair(g, g) == pytest.approx(1.0, abs=1e-12)
            assert hc.hyp_distance(APEX, g) == pytest.approx(abs(t), abs=1e-12)

    def test_distance_to_geodesic(self):
        # boost the apex off the geodesic through (apex, e1) by a known amount
        off = hc.hyp_geodesic(APEX, E2, 0.7)
        assert hc.distance_to_geodesic(off, APEX, E1) == pytest.approx(0.7, abs=1e-12)


class TestHorocycleMetrics:
    def test_apex_value(self):
        assert hc.finsler_F_h("unit", APEX, E1) == pytest.approx(4.0, abs=1e-3)

    def test_isometry_invariance(self, rng):
        vals = []
        for _ in range(20):
            iso = hc.random_isometry(rng)
            vals.append(hc.finsler_F_h("unit", iso @ APEX, iso @ E1))
        vals = np.array(vals)
        assert (vals.max() - vals.min()) / vals.mean() < 1e-3

    def test_conformal_factor(self, rng):
        for _ in range(10):
            iso = hc.random_isometry(rng)
            x, v = iso @ APEX, iso @ E1
            ratio = hc.finsler_F_h("xi3", x, v) / hc.finsler_F_h("unit", x, v)
            assert ratio == pytest.approx(x[2], rel=1e-3)

    def test_bad_weight(self):
        with pytest.raises(ValueError):
            hc.finsler_F_h("bogus", APEX, E1)


class TestHorocycleCrofton:
    def test_segment_length_oracle(self):
        for length in (0.5, 1.0):
            val = hc.horocycle_crofton_length(APEX, E1, length)
            assert val == pytest.approx(4.0 * length, rel=2e-2)

    def test_boosted_segment(self, rng):
        iso = hc.random_isometry(rng)
        val = hc.horocycle_crofton_length(iso @ APEX, iso @ E1, 0.7)
        assert val == pytest.approx(2.8, rel=2e-2)


class TestConformalDivergence:
    def test_proof_scenario_diverges(self):
        x0 = np.array([np.sinh(1.0), 0.0, np.cosh(1.0)])
        v0 = np.array([0.0, 1.0, 0.0])
        assert hc.conformal_divergence(x0, v0, 1.0) > 0.01

    def test_constant_weight_control(self):
        x0 = np.array([np.sinh(1.0), 0.0, np.cosh(1.0)])
        v0 = np.array([0.0, 1.0, 0.0])
        assert hc.conformal_divergence(x0, v0, 1.0, exponent=0.0) < 1e-6

    def test_zero_time(self):
        assert hc.conformal_divergence(APEX, E1, 0.0) == 0.0

    def test_apex_symmetry_keeps_geodesic(self):
        # the conformal factor is rotation invariant about the apex, so the
        # conformal geodesic through the apex stays on the hyperbolic one
        assert hc.conformal_divergence(APEX, E1, 1.0) < 1e-8


class TestRegressionAcrossModels:
    def test_apex_constant_matches_round_sphere_constant(self, round_field, unit_measure, quad_spec):
        # both fiber constructions integrate |cos| against a unit fiber
        # density, so the hyperbolic apex value and the round-sphere constant
        # must coincide
        from circlefinsler import finsler_F

        f_sphere = finsler_F(round_field, unit_measure, np.array([1.0, 0, 0]),
                             np.array([0.0, 1, 0]), quad_spec)
        f_hyp = hc.finsler_F_h("unit", APEX, E1, quad_spec.n_theta)
        assert f_hyp == pytest.approx(f_sphere, rel=1e-4)
