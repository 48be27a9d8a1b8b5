"""Launching the Jordan associated vector: linear growth of the field norm."""
import numpy as np

from pttalbot import one_singularity
from pttalbot.propagation import secular_growth_fit
from pttalbot.susy import jordan_chain

pot = one_singularity()
chain = jordan_chain(pot, 0.25, -0.5)
fit = secular_growth_fit(pot, chain, z_max=200.0)
print(f"max deviation from exp(-iEz)(v - i z u): {fit.law_error:.1e}")
print(f"norm slope {fit.slope:.5f}, ||u|| = {chain.norm_u:.5f}")
for z, n in zip(fit.z, fit.norms):
    print(f"  z={z:6.1f}  ||psi||={n:8.3f}")
