"""Concentration-of-measure functionals on finite metric measure spaces,
the l^p-ball reduction map and cone-measure experiments on l^p spheres."""

from .certify import (
    Bracket,
    SuiteReport,
    antipodal_lower,
    lpball_reduce_bound,
    obsdiam_bracket_R,
    run_inequality_suite,
)
from .experiments import ExperimentConfig, ExperimentRecord, emit, run_experiment
from .lp import (
    ReductionParams,
    SignedPermutation,
    canonicalize,
    f_trunc,
    group_apply,
    group_compose,
    group_inverse,
    k_eps,
    lq_dist,
    project_Ak,
    reduce_F,
    reduce_F_batch,
)
from .mmspace import (
    FiniteMMSpace,
    InstanceTooLargeError,
    SepQuery,
    Target,
    WeightedCloud,
    concentration_function,
    partial_diameter_exact,
    pushforward,
    sep_exact,
    sep_lower_greedy,
)
from .sphere import SphereSampleSet, empirical_mmspace, median_concentration_profile, sample_cone

__version__ = "0.1.0"
