"""Divergent lower bounds along the Koch curve.

Run:  python demos/koch_bounds.py

Each refinement level multiplies the bound by a ratio slightly above 1 and
adds 2. The product of ratios stays bounded, so the bound grows at least
linearly in the level.
"""
from cremovable.koch import bounds_table, koch_product, landmarks

print(" k   lower bound      2k")
for k, L, two_k in bounds_table(12):
    print(f"{k:2d}   {float(L):12.4f}  {two_k:4d}")

print(f"product of ratios at k=30: {koch_product(30)} ~ {float(koch_product(30)):.6f}")

lm = landmarks(2)
for name, pt in lm.as_floats().items():
    print(f"landmark {name} at level 2: ({pt[0]:.5f}, {pt[1]:.5f})")
