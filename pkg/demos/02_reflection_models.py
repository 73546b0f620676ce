"""Reflection models compared on one phase subproblem.

With the beamformer fixed, the surface update maximizes the concave
quadratic ``f2(phi) = -phi^H U phi + 2 Re{V^H phi}``.  When amplitudes may
shrink inside the unit disk the problem is convex and is solved exactly
through its dual.  Unit-modulus phases, continuous or on a ``kappa``-point
grid, are handled by majorization-minimization.  The disk problem relaxes
the unit-modulus ones, so its optimum bounds them from above.
"""

import numpy as np

from risma import ris
from risma.checks import brute_force_dps, dps_instance, random_quadratic

rng = np.random.default_rng(1)
q = random_quadratic(rng, M=16, rank=4)
phi0 = np.exp(2j * np.pi * rng.uniform(size=16))

irc = ris.optimize_phases(q, phi0, "irc")
print(f"disk-constrained optimum  f2 = {q.value(irc):9.4f}   (min |phi| = {np.abs(irc).min():.3f})")

phi, values = phi0, [q.value(phi0)]
for _ in range(30):
    phi = ris.mm_step(q, phi)
    values.append(q.value(phi))
print(f"unit-modulus MM           f2 = {values[-1]:9.4f}   first steps "
      + " ".join(f"{v:.2f}" for v in values[:6]))
assert np.all(np.diff(values) >= -1e-10 * np.abs(values[:-1]).clip(1))

for levels in (2, 4, 16, 1024):
    dps = ris.optimize_phases(q, ris.quantize_phases(phi0, levels), "dps", levels=levels)
    print(f"{levels:4d}-level phases          f2 = {q.value(dps):9.4f}")

# On a problem small enough to enumerate, the discrete search can be graded.
_, small, start = dps_instance(seed=4)
found = small.value(ris.optimize_phases(small, start, "dps", levels=2))
print(f"\n8 elements, binary phases: search {found:.6g} vs exhaustive {brute_force_dps(small, 2):.6g}")
