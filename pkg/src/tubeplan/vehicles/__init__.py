"""Vehicle models, gust filters and desired-trajectory providers."""

from .dryden import (
    FixedWingGustFilters,
    fixedwing_filters,
    longitudinal_coeffs,
    transverse_coeffs,
)
from .fixedwing import (
    EPS_SING,
    FixedWingModel,
    FixedWingParams,
    inner_loop,
    outer_lateral,
    outer_longitudinal,
    wind_to_inertial,
)
from .quadrotor import QuadrotorModel, QuadrotorParams
from .reference import (
    FixedWingPolylineProfile,
    FixedWingRef,
    LateralSinusoidProfile,
    PolylineProfile3D,
    QuadrotorRef,
    ascent_cruise_descent,
)

__all__ = [
    "EPS_SING",
    "FixedWingGustFilters",
    "FixedWingModel",
    "FixedWingParams",
    "FixedWingPolylineProfile",
    "FixedWingRef",
    "LateralSinusoidProfile",
    "PolylineProfile3D",
    "QuadrotorModel",
    "QuadrotorParams",
    "QuadrotorRef",
    "ascent_cruise_descent",
    "fixedwing_filters",
    "inner_loop",
    "longitudinal_coeffs",
    "outer_lateral",
    "outer_longitudinal",
    "transverse_coeffs",
    "wind_to_inertial",
]
