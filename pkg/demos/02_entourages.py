"""
Entourages on a circle
======================

Geometric entourages from hyperbolic disks, linkedness, shadows and the
orbit system of the two generators of Gamma(2).
"""

import numpy as np

from floydlab.entourage import Circle, Entourage, is_linked
from floydlab.entourage.entourage import shadow_by_intersection, shadow_by_union
from floydlab.entourage.system import moebius_orbit

C = Circle(256)
a = Entourage.geometric(C, 0.8 + 0.0j, 2.0, strict=False)
b = Entourage.geometric(C, -0.8 + 0.0j, 2.0, strict=False)
print("linked:", is_linked(a, b))

# the two shadow formulas give the same set of circle points
s = shadow_by_union(a, b)
assert np.array_equal(s, shadow_by_intersection(a, b))
print(f"shadow of b seen from a covers {s.sum()} of {C.N} points")

# images of a base disk under reduced words of length <= 4
S = moebius_orbit(L=4, circle=512)
print(f"{S.M} members, {S.dropped} dropped, {S.merged} merged")
print(f"linked pairs: {int(S.linked.sum() - S.M) // 2}")

# horosphere of the fixed point of z -> z + 2 (grid point 0) grows with L
for L in (2, 3, 4):
    T = S.restrict(L).horosphere(0, 4)
    print(f"L={L}: horosphere has {T.size} members")
