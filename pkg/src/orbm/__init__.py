"""Obliquely reflected Brownian motion in planar domains.

Analytic correspondences between boundary reflection-angle fields,
stationary densities with rotation numbers, and rotation-rate fields on the
unit disk; Monte Carlo simulation of the reflected paths and their winding
statistics; excursion-reflected motion for tangential boundary behavior;
and conformal transfer to general simply connected domains.
"""

__version__ = "0.1.0"

from .config import DEFAULT, Tolerances
from .harmonic import (
    BoundaryField,
    FieldKind,
    HarmonicFn,
    RotationField,
    SigmaMeasure,
    StationaryPair,
    angle_to_pair,
    conjugate,
    hitting_test,
    measure_singularity_test,
    mobius_transfer,
    oscillation_bounds,
    pair_from_rotation,
    pair_to_angle,
    poisson_extend,
    rotation_field,
    tangential_arc_check,
)
from .disk import (
    DiskPath,
    JumpRecord,
    PolarHistogram,
    cauchy_limit_test,
    local_time_rate,
    mollify,
    occupation_density,
    simulate,
    simulate_half_plane,
)
from .paths import (
    WindingSeries,
    m1_distance,
    rotation_rate,
    winding,
    winding_star,
)
from .erbm import (
    Excursion,
    ErbmPath,
    angular_flow,
    assemble_erbm,
    excursion_acceptance,
    sample_excursion,
    tangential_limit_experiment,
)
from .conformal import (
    ConformalMap,
    MobiusMap,
    PolynomialMap,
    ScaledMap,
    TransferredPath,
    clock,
    domain_approx_sequence,
    l1_pushforward_norm,
    mobius_selfmap_check,
    nearest_point_angles,
    transfer,
)
from .quadrature import Verdict
