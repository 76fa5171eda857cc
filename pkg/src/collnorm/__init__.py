"""Unbiased, instance-optimal estimation of the collision norm ||mu||_2^2 from samples."""

from .advice import estimate_t_directly, find_advice_medium, find_advice_small
from .dist import (
    ExplicitDistribution,
    InvalidDistribution,
    chebyshev_tail,
    collision_variance_bound,
    delta_vector,
    exact_l2_sq,
    exact_l3_cube,
    exact_t,
    read_csv,
    tv_distance,
    write_csv,
)
from .finite import (
    Partition,
    estimate_sum_cubes,
    estimate_sum_squares,
    estimate_t_friendly,
    exact_good_partition,
    find_advice_large,
    is_friendly,
    is_good_partition,
    t_friendly_lower_bound,
)
from .kernels import BACKEND
from .norms import (
    estimate_l2_base,
    estimate_l2_bc,
    estimate_l2_moments,
    estimate_l3,
    estimate_l3_amplified,
    estimate_l3_magnitude,
)
from .oracle import BudgetExceeded, CollisionTally, SampleOracle, derive_seed, tally_ingest
from .params import AdviceReport, EstimateReport, EstimatorParams, Scaling
from .primitives import (
    ConditionalOracle,
    IndicatorOracle,
    RejectionCrash,
    amplify_median,
    conditional_draw,
    estimate_indicator_additive,
)
from .toplevel import estimate_l2_top_level, test_l2_magnitude
from .zoo import parse_dist_spec, zoo

__version__ = "0.1.0"
