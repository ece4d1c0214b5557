"""Finsler metrics on the two-sphere whose geodesics are circles.

Circle families are labeled by points of a sphere through an odd curvature
field; a positive density on the labels produces a reversible Finsler metric
by a cosine transform of the fiber density, with an intersection-counting
length oracle, a geodesic integrator that verifies the circles are geodesics,
a measure-recovery roundtrip, and the horocycle contrast case on the
hyperbolic plane.
"""

from .circles import (
    ContactElement,
    SphereCircle,
    circle_arc,
    circle_circle_intersect,
    circle_from_contact,
    circle_point,
    circle_tangent_at,
    count_intersections,
    fit_circle,
    hopf_project_circle,
    polyline_from_circle,
)
from .geodesics import (
    GeodesicTrace,
    RecoveredDensity,
    circle_deviation,
    geodesic_trace,
    legendre_covector,
    local_minimality_check,
    recover_measure,
)
from .metric import (
    MeasureDensity,
    QuadratureSpec,
    crofton_length,
    fiber_density,
    finsler_F,
    finsler_length,
    hessian_F2,
    indicatrix_sample,
)
from .pathgeometry import (
    AdmissibilityReport,
    FiberSolveSpec,
    FibrationSolveError,
    KappaField,
    admissibility,
    big_x,
    f_kappa,
    fiber_through,
    pi2_map,
    realize_circle,
    tangent_circle,
)
from .quathopf import (
    bivector_to_plane,
    great_circle_point,
    hopf,
    hopf_tangent,
    plane_coords,
    quat_conj,
    quat_mul,
    quat_of_frame,
    sigma,
)

__all__ = [
    "AdmissibilityReport",
    "ContactElement",
    "FiberSolveSpec",
    "FibrationSolveError",
    "GeodesicTrace",
    "KappaField",
    "MeasureDensity",
    "QuadratureSpec",
    "RecoveredDensity",
    "SphereCircle",
    "admissibility",
    "big_x",
    "bivector_to_plane",
    "circle_arc",
    "circle_circle_intersect",
    "circle_deviation",
    "circle_from_contact",
    "circle_point",
    "circle_tangent_at",
    "count_intersections",
    "crofton_length",
    "f_kappa",
    "fiber_density",
    "fiber_through",
    "finsler_F",
    "finsler_length",
    "fit_circle",
    "geodesic_trace",
    "great_circle_point",
    "hessian_F2",
    "hopf",
    "hopf_project_circle",
    "hopf_tangent",
    "indicatrix_sample",
    "legendre_covector",
    "local_minimality_check",
    "pi2_map",
    "plane_coords",
    "polyline_from_circle",
    "quat_conj",
    "quat_mul",
    "quat_of_frame",
    "realize_circle",
    "recover_measure",
    "sigma",
    "tangent_circle",
]
