"""Config-driven experiment sweeps with machine-readable CSV output.

A sweep crosses horizons, trajectory counts, seeds, and estimators over one
generator family, producing one record per point.  Records are computed
independently (optionally in parallel) and written in config order, so a
rerun with the same config is byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .blocks import BlockPartition, support_pattern
from .lti import SystemModel, gen_mass_spring, gen_multi_agent, gen_synthetic, simulate_batch
from .metrics import error_norms, mismatch_error, rme, rst
from .solver import EstimatorConfig, LeastSquaresUndefined, solve_block_regularized, solve_least_squares
from .theory import check_assumptions, lambda_schedule

WORKERS_ENV_VAR = "BLOCKSYSID_WORKERS"

GENERATOR_KINDS = ("synthetic", "mass_spring", "multi_agent")
ESTIMATOR_NAMES = ("block_reg", "least_squares")

# Fixed CSV schema. Wall time stays out of the file so that reruns with the
# same seeds are byte-identical; it remains available on the records.
CSV_COLUMNS = (
    "generator",
    "gen_params",
    "n",
    "m",
    "T",
    "d",
    "seed",
    "estimator",
    "status",
    "lambda_d",
    "mismatch",
    "rme",
    "rst",
    "linf",
    "op_norm",
    "normalized_2",
    "kappa",
    "gamma",
    "converged",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep: a generator family crossed with horizons, sample counts, seeds."""

    generator: dict
    T_list: tuple[int, ...]
    d_list: tuple[int, ...]
    seeds: tuple[int, ...]
    lambda_mode: str = "schedule"
    estimators: tuple[str, ...] = ("block_reg",)
    standardize: bool = True
    output_path: str | None = None

    def __post_init__(self):
        if not isinstance(self.generator, dict) or "kind" not in self.generator:
            raise ValueError("generator must be a mapping with a 'kind' field")
        if self.generator["kind"] not in GENERATOR_KINDS:
            raise ValueError(f"unknown generator kind {self.generator['kind']!r}")
        object.__setattr__(self, "T_list", tuple(int(t) for t in self.T_list))
        object.__setattr__(self, "d_list", tuple(int(d) for d in self.d_list))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if not self.T_list or not self.d_list or not self.seeds or not self.estimators:
            raise ValueError("T_list, d_list, seeds and estimators must be nonempty")
        if any(t < 2 for t in self.T_list):
            raise ValueError("every horizon must be at least 2")
        if any(d < 1 for d in self.d_list):
            raise ValueError("every trajectory count must be positive")
        for name in self.estimators:
            if name not in ESTIMATOR_NAMES:
                raise ValueError(f"unknown estimator {name!r}")
        _parse_lambda_mode(self.lambda_mode)

    @classmethod
    def from_dict(cls, doc: dict, source: str = "config") -> "ExperimentConfig":
        for key in ("generator", "T_list", "d_list", "seeds"):
            if key not in doc:
                raise ValueError(f"{source}: missing field '{key}'")
        return cls(
            generator=doc["generator"],
            T_list=doc["T_list"],
            d_list=doc["d_list"],
            seeds=doc["seeds"],
            lambda_mode=doc.get("lambda_mode", "schedule"),
            estimators=tuple(doc.get("estimators", ("block_reg",))),
            standardize=bool(doc.get("standardize", True)),
            output_path=doc.get("output_path"),
        )

    @classmethod
    def from_json_file(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except json.JSONDecodeError as err:
            raise ValueError(f"{path}: line {err.lineno}: {err.msg}") from err
        if not isinstance(doc, dict):
            raise ValueError(f"{path}: expected a JSON object")
        return cls.from_dict(doc, source=path)


@dataclass(frozen=True)
class ExperimentRecord:
    """One sweep point: parameters, recovery metrics, and diagnostics."""

    generator: str
    gen_params: dict
    n: int
    m: int
    T: int
    d: int
    seed: int
    estimator: str
    status: str
    lambda_d: float | None
    mismatch: int | None
    rme: float | None
    rst: float | None
    linf: float | None
    op_norm: float | None
    normalized_2: float | None
    kappa: float
    gamma: float
    converged: bool | None
    wall_time_seconds: float = field(compare=False)


def _parse_lambda_mode(mode: str) -> float | None:
    """Returns the fixed weight, or None for the dimension-based schedule."""
    if mode == "schedule":
        return None
    if isinstance(mode, str) and mode.startswith("fixed:"):
        try:
            value = float(mode.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad lambda_mode {mode!r}: expected fixed:<number>") from None
        if not math.isfinite(value) or value < 0:
            raise ValueError("fixed lambda must be finite and nonnegative")
        return value
    raise ValueError(f"bad lambda_mode {mode!r}: expected 'schedule' or 'fixed:<number>'")


def resolve_lambda(mode: str, partition: BlockPartition, d: int) -> float:
    fixed = _parse_lambda_mode(mode)
    if fixed is not None:
        return fixed
    return lambda_schedule(
        partition.max_block_size, partition.n_state_blocks, partition.n_input_blocks, d
    )


def build_model(generator: dict, seed: int) -> SystemModel:
    """Instantiate a benchmark system from a generator description."""
    kind = generator.get("kind")
    params = {k: v for k, v in generator.items() if k != "kind"}
    try:
        if kind == "synthetic":
            return gen_synthetic(n=int(params["n"]), w=int(params["w"]), seed=seed)
        if kind == "mass_spring":
            return gen_mass_spring(N=int(params["masses"]), dt=float(params.get("dt", 0.2)))
        if kind == "multi_agent":
            return gen_multi_agent(
                agents=int(params["agents"]),
                degree=int(params["degree"]),
                state_size=int(params.get("state_size", 5)),
                input_size=int(params.get("input_size", 5)),
                dt=float(params.get("dt", 0.2)),
                seed=seed,
            )
    except KeyError as err:
        raise ValueError(f"generator {kind!r}: missing parameter {err.args[0]!r}") from None
    raise ValueError(f"unknown generator kind {kind!r}")


def _run_point(config: ExperimentConfig, T: int, d: int, seed: int) -> list[ExperimentRecord]:
    model = build_model(config.generator, seed)
    partition = model.partition
    theta_star = model.stacked()
    true_support = support_pattern(theta_star, partition, zero_tol=0.0)
    assume = check_assumptions(model, T)
    if assume.satisfied["A2"]:
        kappa = assume.lambda_max / assume.lambda_min
    else:
        kappa = float("inf")
    batch = simulate_batch(model, T, d, seed)
    gen_params = {k: v for k, v in config.generator.items() if k != "kind"}
    base = dict(
        generator=config.generator["kind"],
        gen_params=gen_params,
        n=model.n,
        m=model.m,
        T=T,
        d=d,
        seed=seed,
        kappa=kappa,
        gamma=assume.gamma,
    )

    records = []
    for estimator in config.estimators:
        start = time.perf_counter()
        if estimator == "block_reg":
            lam = resolve_lambda(config.lambda_mode, partition, d)
            result = solve_block_regularized(
                batch, partition, EstimatorConfig(lambda_d=lam, standardize=config.standardize)
            )
            mm = mismatch_error(result.support, true_support)
            errs = error_norms(result.theta_hat, theta_star)
            records.append(
                ExperimentRecord(
                    estimator=estimator,
                    status="ok",
                    lambda_d=lam,
                    mismatch=mm,
                    rme=rme(mm, partition),
                    rst=rst(d, model.n, model.m),
                    linf=errs.linf_elementwise,
                    op_norm=errs.op_norm,
                    normalized_2=errs.normalized_2,
                    converged=result.converged,
                    wall_time_seconds=time.perf_counter() - start,
                    **base,
                )
            )
        else:
            try:
                theta_ls = solve_least_squares(batch)
            except LeastSquaresUndefined:
                records.append(
                    ExperimentRecord(
                        estimator=estimator,
                        status="undefined",
                        lambda_d=None,
                        mismatch=None,
                        rme=None,
                        rst=rst(d, model.n, model.m),
                        linf=None,
                        op_norm=None,
                        normalized_2=None,
                        converged=None,
                        wall_time_seconds=time.perf_counter() - start,
                        **base,
                    )
                )
                continue
            support_ls = support_pattern(theta_ls, partition, zero_tol=0.0)
            mm = mismatch_error(support_ls, true_support)
            errs = error_norms(theta_ls, theta_star)
            records.append(
                ExperimentRecord(
                    estimator=estimator,
                    status="ok",
                    lambda_d=None,
                    mismatch=mm,
                    rme=rme(mm, partition),
                    rst=rst(d, model.n, model.m),
                    linf=errs.linf_elementwise,
                    op_norm=errs.op_norm,
                    normalized_2=errs.normalized_2,
                    converged=True,
                    wall_time_seconds=time.perf_counter() - start,
                    **base,
                )
            )
    return records


def resolve_workers(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(WORKERS_ENV_VAR)
    if env:
        return max(1, int(env))
    return 1


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> list[ExperimentRecord]:
    """Run every sweep point and return the records in config order."""
    points = [
        (T, d, seed) for T in config.T_list for d in config.d_list for seed in config.seeds
    ]
    n_workers = resolve_workers(workers)
    if n_workers == 1 or len(points) == 1:
        nested = [_run_point(config, *pt) for pt in points]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            nested = list(pool.map(lambda pt: _run_point(config, *pt), points))
    return [rec for group in nested for rec in group]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    if isinstance(value, dict):
        return json.dumps(value, sort_keys=True, separators=(",", ":"))
    return str(value)


def records_to_csv(records: list[ExperimentRecord]) -> str:
    """Render records with the fixed column schema; field order never drifts."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow([_fmt(getattr(rec, col)) for col in CSV_COLUMNS])
    return out.getvalue()


def write_records_csv(records: list[ExperimentRecord], path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(records_to_csv(records))
