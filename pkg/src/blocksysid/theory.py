"""Recovery-condition checkers and the regularization/sample-count schedules.

The exact-recovery analysis of the block-regularized estimator rests on four
conditions evaluated on the design-row covariance and the true parameter:
mutual incoherence of the off-support covariance rows (A1), bounded extreme
eigenvalues (A2), a positive floor on the nonzero-block magnitudes (A3), and
polynomially bounded block sizes (A4, asymptotic; reported informationally).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .blocks import BlockPartition, BlockSupport, block_abs_max, support_pattern
from .lti import EIG_TOL, SystemModel, design_covariance


@dataclass(frozen=True)
class AssumptionReport:
    """Scalar summary of the recovery conditions for one model and horizon."""

    gamma: float
    lambda_min: float
    lambda_max: float
    t_min: float
    alpha_n: float
    alpha_m: float
    satisfied: dict

    def as_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "lambda_min": self.lambda_min,
            "lambda_max": self.lambda_max,
            "t_min": self.t_min,
            "alpha_n": self.alpha_n,
            "alpha_m": self.alpha_m,
            "satisfied": dict(self.satisfied),
        }


def mutual_incoherence(
    sigma_tilde: np.ndarray, partition: BlockPartition, support: BlockSupport
) -> float:
    """Incoherence margin gamma of the design covariance against a support.

    For each block column, the rows of ``sigma_tilde`` belonging to each
    off-support block are regressed on the on-support principal submatrix;
    gamma is one minus the largest entrywise l1 norm of those regression
    coefficients.  gamma > 0 is the recoverability condition.
    """
    sigma_tilde = np.asarray(sigma_tilde, dtype=float)
    p_total = sum(partition.row_sizes)
    if sigma_tilde.shape != (p_total, p_total):
        raise ValueError(f"covariance must be {p_total}x{p_total}, got {sigma_tilde.shape}")
    if not support.matches(partition):
        raise ValueError("support mask shape does not match the partition")
    ro = np.asarray(partition.row_offsets)
    worst = 0.0
    for j in range(1, partition.n_col_blocks + 1):
        on_blocks = support.nonzero_rows(j)
        off_blocks = support.zero_rows(j)
        if on_blocks.size == 0 or off_blocks.size == 0:
            continue
        idx_on = np.concatenate([np.arange(ro[b], ro[b + 1]) for b in on_blocks])
        idx_off = np.concatenate([np.arange(ro[b], ro[b + 1]) for b in off_blocks])
        try:
            coeffs = np.linalg.solve(
                sigma_tilde[np.ix_(idx_on, idx_on)], sigma_tilde[np.ix_(idx_on, idx_off)]
            )
        except np.linalg.LinAlgError:
            raise ValueError(
                f"incoherence undefined: singular on-support covariance in block column {j}"
            ) from None
        # per off-support block: entrywise l1 norm of its coefficient rows
        acc = np.abs(coeffs).sum(axis=0)
        pos = 0
        for b in off_blocks:
            size = ro[b + 1] - ro[b]
            worst = max(worst, float(acc[pos : pos + size].sum()))
            pos += size
    return 1.0 - worst


def min_block_magnitude(theta_star: np.ndarray, partition: BlockPartition) -> float:
    """Smallest max-abs entry among the nonzero blocks of the true parameter."""
    maxima = block_abs_max(theta_star, partition)
    nonzero = maxima[maxima > 0]
    if nonzero.size == 0:
        raise ValueError("t_min undefined: the parameter grid has no nonzero block")
    return float(nonzero.min())


def lambda_schedule(D: int, n_bar: int, m_bar: int, d: int) -> float:
    """Regularization weight sqrt(2 (D^2 + D log(n_bar+m_bar)) / d).

    Parameter-free default for the block-regularized estimator: it decays
    as 1/sqrt(d) and grows with the block size and the log of the block
    count, so no per-instance tuning is needed.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    if D < 1:
        raise ValueError("D must be at least 1")
    total = n_bar + m_bar
    if total < 1:
        raise ValueError("need at least one block")
    return math.sqrt(2.0 * (D * D + D * math.log(total)) / d)


def sample_threshold(
    kappa: float,
    k_max: int,
    D: int,
    n_bar,
    m_bar,
    delta: float,
    c_mult: float = 1.0,
    squared_k: bool = False,
) -> int:
    """Configurable sample-count threshold for reliable support recovery.

    Returns ``ceil(c_mult * kappa^2 * k * (D log(n_bar+m_bar) + D^2 log(1/delta)))``
    with ``k = k_max`` by default; ``squared_k=True`` selects the
    ``k_max^2`` variant that additionally controls the operator-norm error.
    The absolute constant is not derivable and is exposed as ``c_mult``.
    """
    if kappa <= 0 or k_max <= 0 or D <= 0 or c_mult <= 0:
        raise ValueError("kappa, k_max, D and c_mult must be positive")
    total = n_bar + m_bar
    if total <= 0:
        raise ValueError("need a positive block count")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    k = k_max * k_max if squared_k else k_max
    value = c_mult * kappa * kappa * k * (D * math.log(total) + D * D * math.log(1.0 / delta))
    return int(math.ceil(value))


def check_assumptions(model: SystemModel, T: int) -> AssumptionReport:
    """Evaluate the recovery conditions of a model at horizon T."""
    partition = model.partition
    report = design_covariance(model, T)
    support = support_pattern(model.stacked(), partition, zero_tol=0.0)
    gamma = mutual_incoherence(report.row_cov, partition, support)
    t_min = min_block_magnitude(model.stacked(), partition)

    total_blocks = partition.n_row_blocks
    log_total = math.log(total_blocks) if total_blocks > 1 else 0.0
    if log_total > 0:
        alpha_n = math.log(partition.max_state_block) / log_total
        alpha_m = (
            math.log(partition.max_input_block) / log_total if partition.max_input_block else 0.0
        )
    else:
        alpha_n = float("nan")
        alpha_m = float("nan")

    satisfied = {
        "A1": bool(gamma > 0.0),
        "A2": bool(report.lambda_min > EIG_TOL * max(report.lambda_max, 0.0)),
        "A3": bool(t_min > 0.0),
    }
    return AssumptionReport(
        gamma=gamma,
        lambda_min=report.lambda_min,
        lambda_max=report.lambda_max,
        t_min=t_min,
        alpha_n=alpha_n,
        alpha_m=alpha_m,
        satisfied=satisfied,
    )
