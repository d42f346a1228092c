import math

import numpy as np
import pytest

from blocksysid.blocks import BlockPartition, BlockSupport
from blocksysid.lti import SystemModel, gen_synthetic
from blocksysid.theory import (
    check_assumptions,
    lambda_schedule,
    min_block_magnitude,
    mutual_incoherence,
    sample_threshold,
)


def test_incoherence_diagonal_covariance_is_one():
    part = BlockPartition.scalar(2, 2)
    support = BlockSupport(np.array([[True, False], [False, True], [True, True], [False, False]]))
    gamma = mutual_incoherence(np.diag([1.0, 2.0, 3.0, 4.0]), part, support)
    assert gamma == pytest.approx(1.0)


def test_incoherence_two_by_two_hand_value():
    part = BlockPartition.scalar(1, 1)
    support = BlockSupport(np.array([[True], [False]]))
    for rho in (0.3, -0.55, 0.9):
        sigma = np.array([[1.0, rho], [rho, 1.0]])
        assert mutual_incoherence(sigma, part, support) == pytest.approx(1.0 - abs(rho))


def test_incoherence_full_support_vacuous():
    part = BlockPartition.scalar(2, 1)
    support = BlockSupport(np.ones((3, 2), dtype=bool))
    rng = np.random.default_rng(0)
    M = rng.standard_normal((3, 3))
    assert mutual_incoherence(M @ M.T + np.eye(3), part, support) == pytest.approx(1.0)


def test_incoherence_scale_invariant():
    rng = np.random.default_rng(1)
    part = BlockPartition.from_block_sizes((2, 1), (1,))
    M = rng.standard_normal((4, 4))
    sigma = M @ M.T + 0.5 * np.eye(4)
    support = BlockSupport(np.array([[True, False], [False, True], [True, False]]))
    g1 = mutual_incoherence(sigma, part, support)
    g2 = mutual_incoherence(7.3 * sigma, part, support)
    assert g1 == pytest.approx(g2)


def test_incoherence_singular_on_support_errors():
    part = BlockPartition.scalar(1, 1)
    support = BlockSupport(np.array([[True], [False]]))
    sigma = np.array([[0.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ValueError, match="incoherence undefined"):
        mutual_incoherence(sigma, part, support)


def test_min_block_magnitude_examples():
    part = BlockPartition.scalar(1, 1)
    assert min_block_magnitude(np.array([[5.0], [0.0]]), part) == 5.0

    case1 = gen_synthetic(10, 1, seed=0)
    assert min_block_magnitude(case1.stacked(), case1.partition) == pytest.approx(0.3)

    part3 = BlockPartition((1, 1, 1), (1, 1), 2, 1)
    theta = np.array([[1.0, 0.0], [0.3, 0.0], [0.0, 0.7]])
    assert min_block_magnitude(theta, part3) == pytest.approx(0.3)

    with pytest.raises(ValueError, match="t_min undefined"):
        min_block_magnitude(np.zeros((2, 1)), BlockPartition.scalar(1, 1))


def test_lambda_schedule_values():
    assert lambda_schedule(1, 1, 0, 2) == pytest.approx(1.0)
    assert lambda_schedule(1, 100, 100, 360) == pytest.approx(0.18706, abs=5e-6)
    # 1/sqrt(d) homogeneity
    assert lambda_schedule(3, 5, 5, 400) == pytest.approx(lambda_schedule(3, 5, 5, 100) / 2.0)
    # unit blocks reduce to the element-wise schedule
    n, m, d = 17, 13, 250
    assert lambda_schedule(1, n, m, d) == pytest.approx(math.sqrt(2 * (1 + math.log(n + m)) / d))


def test_lambda_schedule_monotonicity():
    base = lambda_schedule(2, 10, 10, 500)
    assert lambda_schedule(2, 10, 10, 1000) < base
    assert lambda_schedule(3, 10, 10, 500) > base
    assert lambda_schedule(2, 20, 20, 500) > base


def test_sample_threshold_examples():
    half_e = math.e / 2
    assert sample_threshold(1.0, 1, 1, half_e, half_e, delta=1 / math.e) == 2
    base = 1.0 * 1 * (2 * math.log(40) + 4 * math.log(10))
    assert sample_threshold(2.0, 1, 2, 20, 20, delta=0.1) == math.ceil(4 * base)
    # the squared variant for operator-norm control
    inner = 2 * math.log(40) + 4 * math.log(10)
    a = sample_threshold(1.0, 3, 2, 20, 20, delta=0.1)
    b = sample_threshold(1.0, 3, 2, 20, 20, delta=0.1, squared_k=True)
    assert a == math.ceil(3 * inner)
    assert b == math.ceil(9 * inner)


def test_sample_threshold_validation():
    with pytest.raises(ValueError):
        sample_threshold(1.0, 1, 1, 2, 2, delta=1.5)
    with pytest.raises(ValueError):
        sample_threshold(0.0, 1, 1, 2, 2, delta=0.5)


def test_check_assumptions_closed_form():
    # A = 0, B = I, unit input covariance, half disturbance covariance, T = 2:
    # the design covariance is diag(1.5 I, I)
    n = 3
    model = SystemModel(
        A=np.zeros((n, n)),
        B=np.eye(n),
        sigma_u=np.eye(n),
        sigma_w=0.5 * np.eye(n),
        partition=BlockPartition.scalar(n, n),
    )
    report = check_assumptions(model, 2)
    assert report.lambda_min == pytest.approx(1.0)
    assert report.lambda_max == pytest.approx(1.5)
    assert report.gamma == pytest.approx(1.0)
    assert report.t_min == pytest.approx(1.0)
    assert report.satisfied == {"A1": True, "A2": True, "A3": True}
    assert report.alpha_n == 0.0 and report.alpha_m == 0.0


def test_check_assumptions_case_study_instance():
    report = check_assumptions(gen_synthetic(10, 1, seed=0), 3)
    assert report.gamma > 0
    assert report.satisfied["A1"]
    assert report.t_min == pytest.approx(0.3)


def test_check_assumptions_zero_parameter_errors():
    n = 2
    model = SystemModel(
        A=np.zeros((n, n)),
        B=np.zeros((n, 1)),
        sigma_u=np.eye(1),
        sigma_w=np.eye(n),
        partition=BlockPartition.scalar(n, 1),
    )
    with pytest.raises(ValueError, match="t_min undefined"):
        check_assumptions(model, 2)


def test_report_serializes_to_json_dict():
    report = check_assumptions(gen_synthetic(8, 1, seed=1), 3)
    doc = report.as_dict()
    assert set(doc) == {"gamma", "lambda_min", "lambda_max", "t_min", "alpha_n", "alpha_m", "satisfied"}
    import json

    json.dumps(doc)  # must be serializable as-is


def test_block_size_exponents_reported():
    from blocksysid.lti import gen_multi_agent

    model = gen_multi_agent(10, 2, 5, 5, dt=0.2, seed=0)
    report = check_assumptions(model, 3)
    assert report.alpha_n == pytest.approx(math.log(5) / math.log(20))
    assert report.alpha_m == pytest.approx(math.log(5) / math.log(20))
