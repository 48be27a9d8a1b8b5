"""Input period 2a samples the zone edge, where the singularity lives.

The field then grows and never comes back. Tilting the input by
exp(2 pi i x / 3a) moves the sampled wave numbers off the singular point and
restores the revival at z_T / p^2 = 72 pi.
"""
from fractions import Fraction

import numpy as np

from pttalbot import Scenario, deviation_at, one_singularity, propagate

pot = one_singularity()
zt = (2 * 2 * np.pi) ** 2 / (2 * np.pi)
tr = propagate(Scenario(pot, 2, 1, z_samples=np.linspace(0, 3 * zt, 7)))
for z, d, n in zip(tr.z, tr.delta, tr.norm):
    print(f"z={z:6.2f}  Delta={d:8.3f}  norm={n:8.3f}")

tilted = Scenario(pot, 2, 1, Fraction(1, 3))
print(f"tilted z_T = {tilted.revival_distance:.2f}")
print("Delta at tilted z_T:", deviation_at(tilted, [tilted.revival_distance])[0])
