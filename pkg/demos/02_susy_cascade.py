"""Building the gapless crystals by two Darboux steps from free space."""
import numpy as np

from pttalbot import grid as g
from pttalbot.susy import cascade, jordan_chain

a, rho = 2 * np.pi, 1.0
first, second = cascade(a, rho)
x = first.grid.x

err1 = np.abs(first.output_samples - g.one_singularity_profile(x, a, rho)).max()
err2 = np.abs(second.output_samples - g.two_singularity_profile(x, a, rho)).max()
print(f"step 1 vs closed form: {err1:.1e}")
print(f"step 2 vs closed form: {err2:.1e}")
print(f"W1(0) = {first.superpotential[0]:.6f}")

# The singular level E1 = 1/4 carries a Jordan chain at the zone edge.
chain = jordan_chain(first.output_potential, 0.25, -0.5)
print(f"Jordan chain residuals: {chain.residuals[0]:.1e}, {chain.residuals[1]:.1e}")
print(f"||v||^2 = {chain.v.power:.3f}, <u, v> = {abs(np.vdot(chain.u.amplitudes, chain.v.amplitudes)):.1e}")
