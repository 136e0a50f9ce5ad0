"""Shifted Funk transforms on the sphere.

Forward transforms over sections by planes through an interior center,
their factorization through the classical Funk transform, inversion on the
a-even class and reconstruction from two centers.
"""
__version__ = "0.1.0"

from .funk import (
    SectionField,
    apply_M,
    apply_M_inverse,
    apply_N,
    apply_N_inverse,
    factorized_funk,
    forward_funk,
    funk_data,
    point_pair_transform,
)
from .inversion import (
    HarmonicCoeffs,
    IllConditionedError,
    funk_multipliers,
    invert_funk_a,
    invert_funk_o_harmonic,
    invert_funk_o_meanvalue,
    mean_value_profile,
    single_center_inverse,
)
from .moebius import Center, MobiusMap, cov_weight_mobius, cov_weight_reflection, mobius_apply, reflect
from .parity import WeightedReflection, apply_W, even_part, odd_part
from .phantoms import Phantom, make_phantom
from .planes import Frame, PlaneFamily, PlaneThrough, map_central_to_plane, map_plane_to_central, sample_plane_family
from .sphere import GridFunction, SphereGrid, build_polar_grid, build_sphere_grid, lp_norm, sup_norm_outside_cap
from .two_center import (
    ConvergenceReport,
    TwoCenterSystem,
    alternating_odd_projection,
    attractor_escape_time,
    chord_endpoints,
    convergence_diagnostics,
    iterate_W,
    reconstruct_two_center,
    reconstruct_two_center_k1,
)
from .estimators import SingleCenterFunkInverter, TwoCenterReconstructor
