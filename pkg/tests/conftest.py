import numpy as np
import pytest

from circlefinsler import KappaField, MeasureDensity, QuadratureSpec


@pytest.fixture(scope="session")
def round_field():
    return KappaField.zero()


@pytest.fixture(scope="session")
def tilt_field():
    return KappaField.from_linear([0.0, 0.0, 0.5])


@pytest.fixture(scope="session")
def mixed_field():
    return KappaField.from_linear([0.3, 0.0, 0.2])


@pytest.fixture(scope="session")
def unit_measure():
    return MeasureDensity.constant(1.0)


@pytest.fixture(scope="session")
def quad_spec():
    return QuadratureSpec()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_point(rng):
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def random_contact(rng):
    p = random_point(rng)
    t = np.cross(rng.standard_normal(3), p)
    return p, t / np.linalg.norm(t)
