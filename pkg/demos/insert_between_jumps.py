"""
Threading a Lipschitz curve between jumping bounds
==================================================

Both bounds jump at t = 1: the floor from 0 to 1, the ceiling from 1/2
to 2.  No continuous selection can follow either bound, yet the gap
between them never closes, so a Lipschitz field fits strictly inside.
The same machinery pins prescribed values on a subset and produces
decreasing approximations that squeeze onto a target from above.
"""

import numpy as np

from lipkit import LocalWitness, Subset, Tabulated
from lipkit.metric_space import MetricSpace
from lipkit.selection import (IntervalMapping, decreasing_approx,
                              graph_open_check, insert, select)

space = MetricSpace.from_grid(0.0, 2.0, 0.25)
t = space.coords[:, 0]
high = t >= 1.0
lower = Tabulated(space, np.where(high, 1.0, 0.0))
upper = Tabulated(space, np.where(high, 2.0, 0.5))
window = IntervalMapping(space, lower, upper)

f = select(window)
v = f.values()
print("a Lipschitz selection through jumping bounds")
print(f"{'t':>5} {'floor':>6} {'f':>7} {'ceiling':>8}")
for p in range(space.n):
    print(f"{t[p]:>5.2f} {lower.values()[p]:>6.2f} {v[p]:>7.3f} "
          f"{upper.values()[p]:>8.2f}")
print(f"strict at every sample: {window.strict_mask(f).all()}, "
      f"dyadic depth {f.grid_depth}, levels {sorted(f.chosen_levels)}")

# the window graph is open around the selection: nearby samples accept
# the same probe interval
margins = np.minimum(v - lower.values(), upper.values() - v)
x = int(np.argmin(margins))
m = margins[x] / 4.0
rep = graph_open_check(window, x, v[x] - m, v[x] + m)
print(f"openness probe at t = {t[x]:.2f}: radius {rep.radius:.3f}, "
      f"ok: {rep.ok}")

# pin the value 0.3 at t = 0.5 and keep everything strict
A = Subset(space, [2])
pinned = insert(space, lower, upper, A=A, phi=np.array([0.3]),
                witness=LocalWitness.from_triples([(2, 0.5, 0.0)]))
pv = pinned.values()
print(f"\npinned insertion: value at t = 0.5 is {pv[2]} (asked 0.3), "
      f"strict: {window.strict_mask(pinned).all()}")

# approximations from above that halve their gap to |t - 1| each step
target = Tabulated(space, np.abs(t - 1.0))
chain = decreasing_approx(target, 6)
print("\ndecreasing approximation of |t - 1|")
print(f"{'n':>3} {'sup gap':>10} {'bound 2^(1-n)':>14}")
for n, g in enumerate(chain, start=1):
    gap = float((g.values() - target.values()).max())
    print(f"{n:>3} {gap:>10.6f} {2.0 ** (1 - n):>14.6f}")
strict_chain = all((a.values() > b.values()).all()
                   for a, b in zip(chain, chain[1:]))
print(f"each step strictly below the last: {strict_chain}")
