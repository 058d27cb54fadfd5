"""Expanding degree-2 circle maps with prescribed derivative regularity.

Builds maps that provably preserve a chosen absolutely continuous measure
(either a density pinned to 1 + omega near 0, or Lebesgue itself), checks
the invariance and smoothness claims numerically, classifies moduli by
Dini integrability, and measures distortion growth over injectivity
domains.
"""

from .construct import (
    build_acip_map,
    build_lebesgue_member,
    check_extension_condition,
    crosscheck_density_ode,
    crosscheck_lebesgue_ode,
    lebesgue_extend,
)
from .densities import (
    CertificationError,
    DensityProfile,
    build_density,
    certify,
    profile_from_callable,
    uniform_profile,
)
from .distortion import (
    DistortionReport,
    chain_log_derivative,
    classify_distortion,
    distortion_level,
    lower_bound,
    witness_sequence,
)
from .maps import (
    C1CircleReport,
    DomainPartition,
    ExpandingCircleMap,
    c1_modulus_distance,
    check_c1_circle,
    circle_distance,
    doubling_map,
    linear_two_branch,
)
from .moduli import (
    DiniResult,
    EquivalenceResult,
    MembershipReport,
    Modulus,
    ModulusEstimate,
    canonical_modulus_estimate,
    dini_classify,
    equivalent,
    is_in_K,
    make_almost_lipschitz,
    make_holder,
    make_log_nondini,
    make_zero,
    parse_modulus,
    scaled,
)
from .solvers import ConvergenceError, bisect_root, invert_monotone, rk4_path
from .transfer import (
    GridFunction,
    birkhoff_average,
    fixed_point_iterate,
    invariance_residual,
    transfer_apply,
)

__version__ = "0.1.0"
