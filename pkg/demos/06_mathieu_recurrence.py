"""Approximate recurrence in the real Mathieu lattice.

Gaps break exact self-imaging. The field still comes back close to its
input now and then; this scans the deviation up to z = 500.
"""
import numpy as np

from pttalbot import Scenario, mathieu, propagate, recurrence_search
from pttalbot.propagation import trace_samples

for v0 in (0.0, 1.0, 2.0):
    scen = Scenario(mathieu(v0), 1, 1, z_samples=trace_samples(2 * np.pi, 500 / (2 * np.pi)))
    tr = propagate(scen)
    late = tr.z >= 1.0
    i = np.argmin(np.where(late, tr.delta, np.inf))
    print(f"V0={v0}: deepest return Delta={tr.delta[i]:.3f} at z={tr.z[i]:.2f}; "
          f"first return below 0.05: {recurrence_search(tr, 0.05)}; "
          f"norm drift {np.abs(tr.norm - 1).max():.1e}")
