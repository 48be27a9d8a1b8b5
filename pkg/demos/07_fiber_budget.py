"""Round-trip budget for a 100 m recirculating loop."""
from pttalbot import one_singularity
from pttalbot.fiber import FiberParams, design, drive_coefficients, peak_to_peak, reference_check

p = FiberParams.from_engineering(1560.0, 50.0, loop_length=100.0, modulation_frequency=3e9)
d = design(p)
print(f"total dispersion {d.total_dispersion:.4e} s^2")
print(f"n_T = {d.n_T:.4g} round trips, pulse spacing {d.pulse_spacing * 1e9:.2f} ns")
print(f"loop holds {d.max_pulses} pulses")

pm, am = drive_coefficients(one_singularity(), p)
print(f"PM depth {peak_to_peak(pm):.2e} rad, AM depth {peak_to_peak(am):.2e}")

for a in reference_check():
    print(f"{a.status:18s} {a.quantity}: {a.computed:.4g} vs {a.reference:.4g}")
