"""Talbot self-imaging in PT-symmetric gapless complex crystals."""
from .bands import (BandDiagram, SingularityReport, band_diagram, bloch_matrix,
                    detect_singularities, theorem1_applicable)
from .errors import *  # noqa: F401,F403
from .fiber import FiberParams, design, design_report, roundtrips_for_revival
from .grid import (ComplexPotential, Family, Grid, Wavefield, check_pt_symmetry, exp_potential,
                   free_space, make_potential, mathieu, one_singularity, to_modes, to_samples,
                   two_singularity)
from .propagation import (PropagationTrace, Profile, Scenario, deviation_at, evolve,
                          gaussian_train, predict_revival, propagate, recurrence_search,
                          secular_growth_test, split_step_oracle)
from .susy import cascade, darboux_partner, jordan_chain, synthesize_two_singularities

__version__ = "0.1.0"
