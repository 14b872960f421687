"""Hitting distributions of line segments for planar lattice random walks."""

from .continuum import (SegmentSpec, SlitPoint, AnisotropicMap, h_minus, h_plus, h_segment_exterior,
                        h_segment_interior, slit_plane_kernel, anisotropic_kernel, q_continuum,
                        interior_identity_check)
from .edge import axis_overstep_law, compute_mu, compute_nu, corollary1_probe, harmonic_measure_probe
from .errors import *  # noqa: F401,F403
from .halfline import hit_halfline, hit_halfline_truncated
from .montecarlo import McConfig, hit_segment_mc
from .oracle import HittingDistribution, hit_axis, hit_finite_set, hit_segment
from .potential import PotentialKernel, potential_kernel
from .series import bound_probe, build_Q, eta_resolvent_check, lambda_series, reconstruct_segment_hit
from .walk_model import WalkLaw, load_law, make_simple_walk, make_skew_walk, validate

__version__ = "0.1.0"
