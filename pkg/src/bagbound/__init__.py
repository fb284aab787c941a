"""Confidence bounds on optimal values and optimality gaps of data-driven
stochastic programs, via bagged resampled sample-average approximation,
batching, and single-replication procedures."""

from ._backend import NUMBA_ENABLED, backend_name
from .bounds import (
    BagOutput,
    BaggingMethod,
    BatchingMethod,
    BoundReport,
    ResampleScheme,
    SingleReplicationMethod,
    bag_bound,
    batching_bound,
    compute_lower_bound,
    resample_counts,
    single_replication_bound,
)
from .core import Dataset, RngStream, SummaryStats, mean_var, normal_quantile, t_quantile
from .gap import GapBound, GapSetup, gap_bound_bc, gap_bound_crn, make_gap_setup
from .harness import ExperimentConfig, ExperimentRow, emit, run_experiment
from .oracle import (
    OracleEstimate,
    complete_u_statistic,
    complete_v_statistic,
    estimate_gk_variance,
    estimate_wk,
    example1_program,
)
from .programs import (
    GapProgram,
    SaaSolution,
    StochasticProgram,
    cvar1d,
    gap_program,
    get_program,
    item_selection_ip,
    portfolio_cvar,
    toy_lp,
)

__version__ = "0.1.0"
