"""Recovering a convex function across the holey staircase.

Run:  python demos/extension_demo.py

The function is only sampled off the set. Its value at a set point is read
off from averages over shrinking balls, and the extended function is then
checked for midpoint convexity on random segments.
"""
import numpy as np

from cremovable import PartialFn, extend_at, extension_report, holey_staircase

S = holey_staircase()


def f(x, y):
    return x * x + 3 * y * y - x * y + x


pf = PartialFn(f, S, (0, 1))
rng = np.random.default_rng(3)
digits = rng.integers(0, 2, (5, 30))
pts = np.column_stack([(2 * digits * 3.0 ** -np.arange(1, 31)).sum(axis=1),
                       (digits * 2.0 ** -np.arange(1, 31)).sum(axis=1)])

for p in pts:
    e = extend_at(pf, p, tol=1e-6)
    print(f"at ({p[0]:.5f}, {p[1]:.5f}): extended {e.value:.10f}  true {f(*p):.10f}  "
          f"radius {e.radius:.1e}  samples {e.samples}")

rep = extension_report(pf, pts, n_segments=50)
print("report verdict:", rep.verdict, "| consistency:", rep.metrics["consistency"])
