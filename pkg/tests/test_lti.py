import json

import numpy as np
import pytest

from blocksysid.blocks import BlockPartition
from blocksysid.lti import (
    SystemModel,
    TrajectoryBatch,
    design_covariance,
    load_batch_csv,
    load_model,
    save_batch_csv,
    save_model,
    simulate_batch,
    split_parameters,
    stack_parameters,
)


def scalar_model(a, b, su, sw):
    return SystemModel(
        A=np.array([[a]]),
        B=np.array([[b]]),
        sigma_u=np.array([[su]]),
        sigma_w=np.array([[sw]]),
        partition=BlockPartition.scalar(1, 1),
    )


def test_stack_roundtrip():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((3, 3))
    B = rng.standard_normal((3, 2))
    theta = stack_parameters(A, B)
    assert theta.shape == (5, 3)
    A2, B2 = split_parameters(theta, 3)
    assert np.array_equal(A, A2) and np.array_equal(B, B2)


def test_model_validation():
    part = BlockPartition.scalar(2, 1)
    eye2, eye1 = np.eye(2), np.eye(1)
    with pytest.raises(ValueError):
        SystemModel(A=np.eye(3), B=np.ones((2, 1)), sigma_u=eye1, sigma_w=eye2, partition=part)
    with pytest.raises(ValueError):
        SystemModel(
            A=np.eye(2),
            B=np.ones((2, 1)),
            sigma_u=np.array([[1.0]]),
            sigma_w=np.array([[1.0, 0.5], [0.4, 1.0]]),  # asymmetric
            partition=part,
        )
    with pytest.raises(ValueError):
        SystemModel(
            A=np.eye(2),
            B=np.ones((2, 1)),
            sigma_u=np.array([[-1.0]]),  # negative eigenvalue
            sigma_w=eye2,
            partition=part,
        )


def test_simulate_noiseless_identity_chain():
    model = scalar_model(1.0, 1.0, su=1.0, sw=0.0)
    batch = simulate_batch(model, T=2, d=17, seed=5)
    assert np.array_equal(batch.Y, batch.X @ np.array([[1.0], [1.0]]))
    assert np.array_equal(batch.W, np.zeros((17, 1)))


def test_simulate_zero_covariances_give_zero_data():
    model = scalar_model(0.7, 1.0, su=0.0, sw=0.0)
    batch = simulate_batch(model, T=4, d=9, seed=1)
    assert not batch.X.any()
    assert not batch.Y.any()


def test_simulate_identity_holds_exactly():
    rng = np.random.default_rng(2)
    part = BlockPartition.scalar(3, 2)
    model = SystemModel(
        A=0.3 * rng.standard_normal((3, 3)),
        B=rng.standard_normal((3, 2)),
        sigma_u=np.eye(2),
        sigma_w=0.5 * np.eye(3),
        partition=part,
    )
    batch = simulate_batch(model, T=5, d=64, seed=11)
    assert np.array_equal(batch.Y, batch.X @ model.stacked() + batch.W)


def test_simulate_determinism_and_substreams():
    model = scalar_model(0.5, 1.0, su=1.0, sw=0.5)
    b1 = simulate_batch(model, T=3, d=20, seed=42)
    b2 = simulate_batch(model, T=3, d=20, seed=42)
    assert np.array_equal(b1.X, b2.X) and np.array_equal(b1.Y, b2.Y)
    # trajectory streams are independent of the batch size
    b3 = simulate_batch(model, T=3, d=35, seed=42)
    assert np.array_equal(b3.X[:20], b1.X)
    assert np.array_equal(b3.W[:20], b1.W)
    b4 = simulate_batch(model, T=3, d=20, seed=43)
    assert not np.array_equal(b4.X, b1.X)


def test_simulate_rejects_bad_arguments():
    model = scalar_model(0.5, 1.0, su=1.0, sw=0.5)
    with pytest.raises(ValueError):
        simulate_batch(model, T=1, d=10, seed=0)
    with pytest.raises(ValueError):
        simulate_batch(model, T=3, d=0, seed=0)


def test_simulate_covariance_matches_analytic():
    # scalar system, moderate horizon: empirical row covariance ~ analytic
    model = scalar_model(0.5, 1.0, su=1.0, sw=0.5)
    batch = simulate_batch(model, T=3, d=50_000, seed=7)
    emp = batch.X.T @ batch.X / batch.d
    ana = design_covariance(model, 3).row_cov
    assert np.linalg.norm(emp - ana) < 0.05


def test_simulate_covariance_converges_with_d():
    rng = np.random.default_rng(9)
    part = BlockPartition.scalar(4, 3)
    model = SystemModel(
        A=0.4 * rng.standard_normal((4, 4)),
        B=rng.standard_normal((4, 3)),
        sigma_u=np.eye(3),
        sigma_w=0.5 * np.eye(4),
        partition=part,
    )
    ana = design_covariance(model, 3).row_cov
    dists = []
    for d in (1_000, 10_000, 100_000):
        batch = simulate_batch(model, 3, d, seed=13)
        emp = batch.X.T @ batch.X / d
        dists.append(np.linalg.norm(emp - ana))
    assert dists[0] > dists[1] > dists[2]


def test_design_covariance_t2_collapses_powers():
    rng = np.random.default_rng(4)
    part = BlockPartition.scalar(2, 2)
    A = rng.standard_normal((2, 2))
    B = rng.standard_normal((2, 2))
    su = np.diag([1.0, 2.0])
    sw = 0.5 * np.eye(2)
    model = SystemModel(A=A, B=B, sigma_u=su, sigma_w=sw, partition=part)
    rep = design_covariance(model, 2)
    assert np.array_equal(rep.input_stack, B)
    assert np.array_equal(rep.noise_stack, np.eye(2))
    np.testing.assert_allclose(rep.row_cov[:2, :2], B @ su @ B.T + sw, atol=1e-12)
    np.testing.assert_allclose(rep.row_cov[2:, 2:], su, atol=0)
    assert not rep.row_cov[:2, 2:].any()


def test_design_covariance_nilpotent_state():
    part = BlockPartition.scalar(2, 2)
    B = np.array([[1.0, 0.0], [1.0, 1.0]])
    model = SystemModel(A=np.zeros((2, 2)), B=B, sigma_u=np.eye(2), sigma_w=np.eye(2), partition=part)
    rep = design_covariance(model, 3)
    # stacks are [A B  B] and [A  I] with A = 0
    np.testing.assert_allclose(rep.input_stack, np.hstack([np.zeros((2, 2)), B]))
    np.testing.assert_allclose(rep.noise_stack, np.hstack([np.zeros((2, 2)), np.eye(2)]))
    np.testing.assert_allclose(rep.row_cov[:2, :2], B @ B.T + np.eye(2), atol=1e-12)


def test_design_covariance_identity_kappa():
    model = scalar_model(0.0, 1.0, su=1.0, sw=0.0)
    rep = design_covariance(model, 2)
    # row covariance is the 2x2 identity
    np.testing.assert_allclose(rep.row_cov, np.eye(2))
    assert rep.kappa == pytest.approx(1.0)
    assert rep.lambda_min == pytest.approx(1.0)
    assert rep.lambda_max == pytest.approx(1.0)
    assert rep.max_variance == pytest.approx(1.0)


def test_design_covariance_singular_gives_inf_kappa():
    model = scalar_model(0.5, 1.0, su=0.0, sw=1.0)  # input part has zero variance
    rep = design_covariance(model, 2)
    assert rep.kappa == float("inf")


def test_design_covariance_stacked_form():
    # row_cov state part equals the stacked quadratic form with repeated
    # per-step covariances
    rng = np.random.default_rng(6)
    part = BlockPartition.scalar(3, 2)
    model = SystemModel(
        A=0.5 * rng.standard_normal((3, 3)),
        B=rng.standard_normal((3, 2)),
        sigma_u=np.diag([1.0, 3.0]),
        sigma_w=0.25 * np.eye(3),
        partition=part,
    )
    T = 4
    rep = design_covariance(model, T)
    su_stacked = np.kron(np.eye(T - 1), model.sigma_u)
    sw_stacked = np.kron(np.eye(T - 1), model.sigma_w)
    expected = (
        rep.input_stack @ su_stacked @ rep.input_stack.T
        + rep.noise_stack @ sw_stacked @ rep.noise_stack.T
    )
    np.testing.assert_allclose(rep.row_cov[:3, :3], expected, atol=1e-12)


def test_design_covariance_rejects_short_horizon():
    model = scalar_model(0.5, 1.0, su=1.0, sw=0.5)
    with pytest.raises(ValueError):
        design_covariance(model, 1)


def test_model_json_roundtrip(tmp_path):
    rng = np.random.default_rng(8)
    part = BlockPartition.from_block_sizes((2, 1), (1, 1))
    model = SystemModel(
        A=rng.standard_normal((3, 3)),
        B=rng.standard_normal((3, 2)),
        sigma_u=np.eye(2),
        sigma_w=0.5 * np.eye(3),
        partition=part,
    )
    path = tmp_path / "model.json"
    save_model(model, str(path))
    doc = json.loads(path.read_text())
    assert sorted(doc) == ["A", "B", "col_sizes", "m", "n", "row_sizes", "sigma_u", "sigma_w"]
    loaded = load_model(str(path))
    assert np.array_equal(loaded.A, model.A)
    assert np.array_equal(loaded.B, model.B)
    assert loaded.partition == model.partition


def test_load_model_diagnostics(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"n": 1,\n  "m": }')
    with pytest.raises(ValueError, match="line 2"):
        load_model(str(path))
    path2 = tmp_path / "missing.json"
    path2.write_text('{"n": 1}')
    with pytest.raises(ValueError, match="missing field 'm'"):
        load_model(str(path2))


def test_batch_csv_roundtrip(tmp_path):
    model = scalar_model(0.5, 1.0, su=1.0, sw=0.5)
    batch = simulate_batch(model, T=3, d=8, seed=3)
    path = tmp_path / "batch.csv"
    save_batch_csv(batch, str(path))
    header = path.read_text().splitlines()[0]
    assert header == "x_0,u_0,y_0"
    loaded = load_batch_csv(str(path))
    assert np.array_equal(loaded.X, batch.X)
    assert np.array_equal(loaded.Y, batch.Y)
    assert loaded.W is None


def test_batch_validation():
    with pytest.raises(ValueError):
        TrajectoryBatch(X=np.zeros((3, 2)), Y=np.zeros((4, 1)))
    with pytest.raises(ValueError):
        TrajectoryBatch(X=np.zeros((3, 2)), Y=np.zeros((3, 1)), W=np.zeros((3, 2)))
