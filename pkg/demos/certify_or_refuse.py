"""
Certificates that name their witnesses
======================================

Every checker in the toolbox either passes or hands back the exact
samples that broke the claim.  A mileage chart with a typo is refused
with the bad triangle, sin(1/t) is refused a global slope bound by a
crest-trough pair, and a cusp curve is refused a uniform local rate by
the two branch points that straddle the cusp.
"""

import numpy as np

from lipkit import LocalWitness, certify_local_witness, global_lip
from lipkit.fixtures import cusp_curve, sin_reciprocal_pairs
from lipkit.metric_space import MetricSpace

# a four-town mileage chart, with 0 <-> 3 fat-fingered as 9 miles
chart = np.array([
    [0.0, 2.0, 4.0, 9.0],
    [2.0, 0.0, 2.0, 4.0],
    [4.0, 2.0, 0.0, 2.0],
    [9.0, 4.0, 2.0, 0.0],
])
space = MetricSpace.from_matrix(chart, validate=False)
report = space.validate()
print(f"mileage chart metric check: ok = {report.ok}")
for v in report.violations:
    print(f"  {v.kind} violation on towns {v.ids}, excess {v.magnitude}")
chart[0, 3] = chart[3, 0] = 6.0
print(f"after fixing the typo: ok = "
      f"{MetricSpace.from_matrix(chart, validate=False).validate().ok}")

# sin(1/t): crest-trough pairs certify that no global slope bound exists
space, f, pairs = sin_reciprocal_pairs(20)
v = f.values()
print("\nsin(1/t) crest-trough slopes keep growing")
for k in (1, 10, 20):
    i, j = pairs[k - 1]
    print(f"  pair {k:>2}: slope {abs(v[i] - v[j]) / space.dist(i, j):>10.1f}")
est = global_lip(f, pairs=pairs)
print(f"largest witnessed slope {est.value:.1f} at pair {est.witness}")

# the cusp curve: fine along each branch, hopeless across the cusp
space, f, pairs = cusp_curve()
v = f.values()
delta = 4.0 * space.dist(*pairs[0])
uniform = LocalWitness.from_triples([(p, delta, 5.0)
                                     for p in range(space.n)])
cert = certify_local_witness(f, uniform)
entry, (i, j) = cert.witness
print(f"\ncusp curve with a uniform local rate of 5: passed = {cert.passed}")
print(f"refuting pair ({i}, {j}) sits on opposite branches: "
      f"{v[i] * v[j] < 0}, needed rate "
      f"{abs(v[i] - v[j]) / space.dist(i, j):.1f}")
