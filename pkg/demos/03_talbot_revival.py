"""Self-imaging of a Gaussian train in a complex crystal.

With input period (3/2)a the train revives at z_T = (3a)^2 / 2pi = 18 pi.
The Hermitian part of the same lattice does not revive, and the PT crystal
does not produce the half-period-shifted image of free space.
"""
import numpy as np

from pttalbot import Profile, Scenario, deviation_at, one_singularity, propagate
from pttalbot.propagation import trace_samples

pot = one_singularity()
scen = Scenario(pot, 3, 2, profile=Profile("GAUSSIAN_TRAIN", 0.1))
zt = scen.revival_distance
print(f"z_T = {zt:.4f}")
print("Delta at z_T, 2 z_T:", deviation_at(scen, [zt, 2 * zt]))

tr = propagate(Scenario(pot, 3, 2, z_samples=trace_samples(zt, 2, 16)))
for z, d, h in zip(tr.z[::4], tr.delta[::4], tr.delta_half[::4]):
    print(f"  z={z:7.2f}  Delta={d:9.3e}  Delta_half={h:9.3e}")

herm = Scenario(pot.real_part(), 3, 2)
print("Hermitian part, Delta(z_T):", deviation_at(herm, [zt])[0])
