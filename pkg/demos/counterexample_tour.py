"""A function that is convex away from a product of fat Cantor sets, yet not convex.

Run:  python demos/counterexample_tour.py

The obstacle is K x K where K is a fat Cantor set built from five levels of
gaps. Off the obstacle every point gets a ball on which the function is
provably convex. Along the diagonal the midpoint inequality still fails.
"""
from collections import Counter
from fractions import Fraction

import numpy as np

from cremovable import counterexample as cx
from cremovable.intervals import fat_cantor

K, gaps = fat_cantor(Fraction(1, 12), 5)
P = cx.build_params(gaps, "uniform")
print(f"fat Cantor set: {len(gaps)} gaps, measure of K = {K.measure()}")

# The exact midpoint defect along the diagonal.
gap = cx.nonconvexity_gap(P)
print(f"f(-1,-1) + f(1,1) - 2 f(0,0) = {gap.G}  (closed form {gap.closed_form})")
print(f"so f(0,0) exceeds the chord midpoint by {gap.midpoint_violation}")

# Local convexity: certify a batch of random points off the obstacle.
rng = np.random.default_rng(0)
cases, smallest = Counter(), None
for _ in range(300):
    p = rng.uniform(-2, 2, 2)
    if cx.in_obstacle(P, p[0]) and cx.in_obstacle(P, p[1]):
        continue
    cert = cx.certify_local_convexity(P, p)
    cases[cert.case.value] += 1
    smallest = cert.radius if smallest is None else min(smallest, cert.radius)
print("certificate cases:", dict(cases))
print(f"smallest certified radius: {float(smallest):.3e}")

# A Hessian at a point in one of the horizontal stripes.
H = cx.hessian_at(P, (0, 2))
print(f"Hessian at (0, 2): fxx={H.fxx} fxy={H.fxy} fyy={H.fyy}")
