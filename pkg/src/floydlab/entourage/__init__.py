"""Entourage calculus on a sampled circle."""
from .circle import DEFAULT_GENERATORS, Circle, HyperbolicDisk, MoebiusMap
from .entourage import (
    ConventionError,
    Entourage,
    PreconditionError,
    delta,
    delta_tilde,
    diameter,
    is_between,
    is_linked,
    is_small,
    point_neighborhood,
    shadow,
    shadow_by_intersection,
    shadow_by_union,
)
from .twosat import TwoSat
