"""The holey staircase: thin along both axes, but not thin.

Run:  python demos/staircase_thinness.py

The set is the graph of the Cantor function restricted to the Cantor set.
Any horizontal or vertical segment can be nudged to miss it. A segment
running uphill from the lower left to the upper right can never be nudged
off, because its last crossing with the full staircase lands on the set.
"""
from fractions import Fraction

from cremovable import holey_staircase, last_graph_crossing, line_intersection_count
from cremovable.intervals import cantor_function, ternary_cantor
from cremovable.thinness import ThinnessQuery, find_transparent_segment

S = holey_staircase()

for x in (Fraction(1, 4), Fraction(3, 4), Fraction(1, 10)):
    v, err = cantor_function(x, 30)
    print(f"h({x}) = {float(v):.10f} (+/- {float(err):.1e})")

# A vertical query through a set point, and the witness found near it.
q = ThinnessQuery((0.25, -0.5), (0.25, 1.5), eps=0.01, direction=(0, 1))
w = find_transparent_segment(q, S)
print(f"vertical query: moved to {w.x_prime} -> {w.y_prime}, clearance {w.clearance:.2e}")

# Uphill segments: the rightmost crossing is on the Cantor set.
C = ternary_cantor(20)
for a, b in [((-0.3, 0.2), (1.2, 0.8)), ((-0.1, 0.4), (1.4, 0.55))]:
    c = last_graph_crossing((a, b))
    cl = C.classify(Fraction(c.point.x))
    print(f"segment {a}->{b}: last crossing x={c.point.x:.6f}, on C to depth 20: "
          f"{cl.inside or cl.distance <= Fraction(1, 2 ** 18)}")

# Horizontal lines at dyadic heights meet the set twice.
lc = line_intersection_count(((0, 0.25), (1, 0.25)), S, depth=6)
print(f"line y=1/4 meets the set in between {lc.lower} and {lc.upper} points")
