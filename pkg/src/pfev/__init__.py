"""Multi-objective Bayesian optimization with truncation-mixture acquisition."""

from .acquisition import (
    AcquisitionSampleSet,
    FantasySet,
    LambdaPolicy,
    cmi_parallel,
    lb_map,
    lb_naive_mc,
    lb_noisy,
    make_fantasies,
    optimize_lambda,
    pi_lower_bound,
    prepare_samples,
    theta_map,
)
from .benchmarks import (
    Problem,
    make_combined,
    make_named,
    make_synthetic_gp,
    reference_frontier,
)
from .direct import DirectConfig, direct_maximize
from .domain import Box, unit_box
from .errors import CellLimitError, ConfigError, NumericalError
from .geometry import (
    Cell,
    CellDecomposition,
    TruncationQuantities,
    cell_probability,
    decompose_dominated,
    dominated_or_equal,
    dominates,
    flipped_decomposition,
    hypervolume,
    truncation_quantities,
)
from .gp import Dataset, GpPosterior, KernelParams, fit, kernel_eval, predict
from .harness import (
    ProblemSpec,
    RunConfig,
    RunHistory,
    estimator_study,
    gap_study,
    rhv,
    run_bo,
)
from .moo import Nsga2Config, ParetoSet, non_dominated_filter, nsga2_solve
from .sampler import SampledPath, draw_path, draw_prior_path, evaluate_path

__version__ = "0.1.0"
