"""Simulation and block-regularized identification of sparse LTI systems."""

from .blocks import (
    BlockPartition,
    BlockSupport,
    block_norm_sum,
    block_range,
    support_pattern,
)
from .lti import (
    CovarianceReport,
    SystemModel,
    TrajectoryBatch,
    design_covariance,
    gen_mass_spring,
    gen_multi_agent,
    gen_synthetic,
    load_batch_csv,
    load_model,
    save_batch_csv,
    save_model,
    simulate_batch,
)
from .metrics import ErrorReport, error_norms, mismatch_error, rme, rst
from .solver import (
    EstimateResult,
    EstimatorConfig,
    LeastSquaresUndefined,
    PdwReport,
    kkt_residual,
    pdw_check,
    project_l1_ball,
    prox_linf,
    solve_block_regularized,
    solve_least_squares,
)
from .theory import (
    AssumptionReport,
    check_assumptions,
    lambda_schedule,
    min_block_magnitude,
    mutual_incoherence,
    sample_threshold,
)
from .experiments import (
    ExperimentConfig,
    ExperimentRecord,
    run_experiment,
    write_records_csv,
)

__all__ = [
    "AssumptionReport",
    "BlockPartition",
    "BlockSupport",
    "CovarianceReport",
    "ErrorReport",
    "EstimateResult",
    "EstimatorConfig",
    "ExperimentConfig",
    "ExperimentRecord",
    "LeastSquaresUndefined",
    "PdwReport",
    "SystemModel",
    "TrajectoryBatch",
    "block_norm_sum",
    "block_range",
    "check_assumptions",
    "design_covariance",
    "error_norms",
    "gen_mass_spring",
    "gen_multi_agent",
    "gen_synthetic",
    "kkt_residual",
    "lambda_schedule",
    "load_batch_csv",
    "load_model",
    "min_block_magnitude",
    "mismatch_error",
    "mutual_incoherence",
    "pdw_check",
    "project_l1_ball",
    "prox_linf",
    "rme",
    "rst",
    "run_experiment",
    "sample_threshold",
    "save_batch_csv",
    "save_model",
    "simulate_batch",
    "solve_block_regularized",
    "solve_least_squares",
    "support_pattern",
    "write_records_csv",
]

__version__ = "0.1.0"
