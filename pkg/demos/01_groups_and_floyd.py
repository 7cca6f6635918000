"""
Cayley balls and Floyd distances
================================

Build a ball in the free product Z^2 * Z, then compare word distance with
the Floyd distance for two scaling functions.
"""

from floydlab import GroupSpec, cayley_ball, normal_form, word_distance
from floydlab.floyd import FloydWeightedBall, ScalingFunction, floyd_distance, lambda_threshold

# generators: a, b for the Z^2 factor and c for the Z factor
spec = GroupSpec("Z^2, Z")
ball = cayley_ball(spec, 6)
print(f"ball of radius 6: {ball.n} elements")

g = normal_form(spec, "a a b")
h = normal_form(spec, "a b c")
print(f"{g} and {h} are {word_distance(g, h)} apart in the word metric")

# Floyd distances shrink far from the basepoint.  A result is certified
# exact when no path leaving the ball could be cheaper.  Geometric weights
# make leaving the ball cheap, so that value is only an upper bound here.
x, y = ball.index(g), ball.index(h)
for f in (ScalingFunction.geometric(0.5), ScalingFunction.polynomial(2)):
    d = floyd_distance(FloydWeightedBall.from_cayley(ball, f), x, y)
    print(f"{f.describe():14s} delta = {d.value:.6f} ({d.certificate})")

# below lambda_threshold(r), Floyd geodesics of length r are graph geodesics
for r in (1, 2, 3):
    print(f"lambda_threshold({r}) = {lambda_threshold(r):.6f}")
