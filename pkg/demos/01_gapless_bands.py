"""Band structure of one-sided complex crystals.

Potentials built only from positive harmonics give lower-triangular Bloch
matrices, so the bands are the free parabola folded into the zone. The
degeneracies of that parabola are either ordinary crossings or defective
(Jordan) points, and the census below tells them apart.
"""
import numpy as np

from pttalbot import band_diagram, detect_singularities, exp_potential, mathieu
from pttalbot import one_singularity, two_singularity

a = 2 * np.pi
crystals = {
    "one singularity": one_singularity(a, 1.0),
    "two singularities": two_singularity(a, 1.0),
    "exp(ix)": exp_potential(1.0, a),
}

for name, pot in crystals.items():
    d = band_diagram(pot, q_count=64, alpha_max=6)
    rep = detect_singularities(pot, 6)
    print(f"{name:18s} parabola deviation {d.parabola_deviation().max():.1e}"
          f"   defective levels {rep.defective_levels}")

# A real cosine lattice opens gaps instead.
d = band_diagram(mathieu(2.0, a), 64, 6)
print(f"{'Mathieu V0=2':18s} parabola deviation {d.parabola_deviation().max():.2f}")

# Per-level detail for the single-singularity crystal
for r in detect_singularities(crystals["one singularity"], 4).records:
    kind = "defective" if r.defective else "diabolic"
    print(f"  E_{r.n} = {r.energy:.4f} at q = {r.q_loc:+.2f}: {kind} (kernel {r.kernel_dim})")
