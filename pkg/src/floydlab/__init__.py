"""Floyd metrics, entourage calculus and quasiconvexity experiments on free products."""
from .groups import (
    CayleyBall,
    FiniteCyclic,
    FreeAbelian,
    GroupElement,
    GroupSpec,
    cayley_ball,
    group_op,
    invert,
    normal_form,
    parabolic_distance,
    word_distance,
)

__version__ = "0.1.0"
