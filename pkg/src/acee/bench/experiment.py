"""Replicated estimation experiments over benchmark models and CSV data.

Every ``(n, n_source, seed)`` triple is one replication with its own random
streams, so replications may run in any order or in worker processes and
still fold into identical result tables.
"""

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import repeat
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
import pandas as pd

from ..config import ExperimentConfig, Settings
from ..diffusion import (
    DiffusionGenerator,
    Schedule,
    ScoreModel,
    build_score_model,
    finetune_target,
    fit_score_model,
    pretrain_source,
)
from ..effects import (
    EffectReport,
    ObservationalDataset,
    build_conditioning,
    conditioning_layout,
    dag_conditioning_layout,
    dag_training_data,
    estimate_dag_total_effect,
    estimate_effects,
    proxy_block,
)
from ..numerics.random import make_rng
from ..proxy import FactorProxy, ResidualProxy, fit_factor_proxy, fit_residual_proxy
from ..scm import InterventionQuery, Scm, bench_model, default_query, do_total_effect, simulate, true_ate
from ..utils.error_handling import ConfigError, ErrorAggregator, ErrorContext, error_record
from .baselines import baseline_dag_regression, baseline_diff_means, baseline_reg_adjust
from .ingest import ingest_from_schema

logger = logging.getLogger(__name__)

T = TypeVar("T")

RESULT_COLUMNS = (
    "model",
    "n",
    "n_source",
    "method",
    "seed",
    "ate_hat",
    "true_ate",
    "abs_err",
    "status",
    "error",
)

_TARGET_STREAM = 0
_SOURCE_STREAM = 1
_MIXTURE_STREAM = 2
_ORACLE_STREAM = 3

_ACEE_METHODS = ("acee", "acee_bc", "acee_no_transfer")


@dataclass(frozen=True)
class ResultRow:
    model: str
    n: int
    n_source: int
    method: str
    seed: int
    ate_hat: Optional[float] = None
    true_ate: Optional[float] = None
    status: str = "ok"
    error: Optional[str] = None
    error_type: Optional[str] = None

    @property
    def abs_err(self) -> Optional[float]:
        if self.ate_hat is None or self.true_ate is None:
            return None
        return abs(self.ate_hat - self.true_ate)

    def as_dict(self) -> Dict[str, Any]:
        values = asdict(self)
        values["abs_err"] = self.abs_err
        return {column: values[column] for column in RESULT_COLUMNS}


@dataclass(frozen=True)
class ReplicationTask:
    n: int
    n_source: int
    seed: int


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: List[ResultRow]
    true_effect: Optional[float]
    failures: ErrorAggregator = field(default_factory=ErrorAggregator)

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.as_dict() for row in self.rows], columns=list(RESULT_COLUMNS))

    def mse_table(self) -> pd.DataFrame:
        """Squared-error summary per ``(model, n, n_source, method)``, failed runs excluded."""
        frame = self.frame()
        frame["abs_err"] = frame["abs_err"].astype(np.float64)
        frame["sq_err"] = frame["abs_err"] ** 2
        frame["failed"] = frame["status"] != "ok"
        table = (
            frame.groupby(["model", "n", "n_source", "method"], sort=False)
            .agg(
                runs=("seed", "size"),
                failures=("failed", "sum"),
                mse=("sq_err", "mean"),
                median_abs_err=("abs_err", "median"),
            )
            .reset_index()
        )
        table["rmse"] = np.sqrt(table["mse"])
        return table

    def summary(self) -> Dict[str, Any]:
        return {
            "config": self.config.model_dump(mode="json", exclude={"output_dir"}),
            "true_effect": self.true_effect,
            "mse": json.loads(self.mse_table().to_json(orient="records")),
            "failures": self.failures.get_error_summary(),
        }


class _Recorder:
    """Collects one row per configured method for a replication."""

    def __init__(self, config: ExperimentConfig, task: ReplicationTask, truth: Optional[float]):
        self.config = config
        self.task = task
        self.n = task.n
        self.truth = truth
        self.rows: Dict[str, ResultRow] = {}

    def _row(self, method: str, **fields: Any) -> ResultRow:
        return ResultRow(self.config.model, self.n, self.task.n_source, method, self.task.seed, **fields)

    def ok(self, method: str, value: float) -> None:
        if method in self.config.methods:
            self.rows[method] = self._row(method, ate_hat=float(value), true_ate=self.truth)

    def failed(self, methods: Sequence[str], exc: BaseException) -> None:
        record = error_record(exc)
        for method in methods:
            if method not in self.rows:
                self.rows[method] = self._row(
                    method,
                    true_ate=self.truth,
                    status="failed",
                    error=f"{record['code']}: {record['message']}",
                    error_type=record["type"],
                )

    def attempt(self, methods: Sequence[str], func: Callable[[], T]) -> Optional[T]:
        """Run one stage; on failure every method depending on it is marked failed."""
        if not methods:
            return None
        try:
            return func()
        except Exception as exc:
            logger.warning(
                "Seed %d, n=%d: %s failed for %s: %s", self.task.seed, self.n, type(exc).__name__, list(methods), exc
            )
            self.failed(methods, exc)
            return None

    def finish(self) -> List[ResultRow]:
        for method in self.config.methods:
            if method not in self.rows:
                self.rows[method] = self._row(method, true_ate=self.truth, status="skipped", error="not run")
        return [self.rows[m] for m in self.config.methods]


def _scm(config: ExperimentConfig, shift: float = 0.0) -> Scm:
    v = None if config.v is None else np.asarray(config.v, dtype=np.float64)
    return bench_model(config.model, v=v, shift=shift)


def dag_query(config: ExperimentConfig) -> Tuple[str, str]:
    if config.query.treatment and config.query.outcome:
        return config.query.treatment, config.query.outcome
    k, j = default_query(config.model)
    return config.query.treatment or k, config.query.outcome or j


def experiment_truth(config: ExperimentConfig) -> Optional[float]:
    """Closed-form ATE where one exists, otherwise the coupled do-oracle."""
    if config.model == "csv":
        return None
    scm = _scm(config)
    if config.kind == "ate":
        if scm.treatment is None or scm.outcome is None:
            raise ConfigError(f"model {config.model} has no treatment/outcome pair", model=config.model)
        closed = true_ate(config.model)
        if closed is not None:
            return closed
        query = InterventionQuery(scm.treatment, scm.outcome, draws=config.oracle_draws)
    else:
        k, j = dag_query(config)
        query = InterventionQuery(k, j, config.query.x1, config.query.x0, draws=config.oracle_draws)
    with ErrorContext(f"do-oracle {query.k}->{query.j}", level=logging.INFO):
        return do_total_effect(scm, query, make_rng(0, _ORACLE_STREAM)).estimate


def target_dataset(config: ExperimentConfig, task: ReplicationTask) -> ObservationalDataset:
    if config.model == "csv" and config.csv is not None:
        dataset = ingest_from_schema(config.csv)
        if task.n < dataset.n:
            rows = make_rng(task.seed, _TARGET_STREAM).choice(dataset.n, size=task.n, replace=False)
            dataset = dataset.take(np.sort(rows))
        return dataset
    return simulate(_scm(config), task.n, make_rng(task.seed, _TARGET_STREAM, task.n)).dataset


def source_dataset(config: ExperimentConfig, task: ReplicationTask) -> ObservationalDataset:
    """Auxiliary sample: the shifted target law, or the ``eta`` mixture with ``aux_model``."""
    n = task.n_source
    rng = make_rng(task.seed, _SOURCE_STREAM, n)
    primary = simulate(_scm(config, config.source_shift), n, rng).dataset
    if config.eta is None:
        return primary
    aux = simulate(bench_model(config.aux_model, shift=config.source_shift), n, rng).dataset
    if aux.columns != primary.columns:
        raise ConfigError(
            f"aux model {config.aux_model} has columns {list(aux.columns)}, expected {list(primary.columns)}"
        )
    pick = make_rng(task.seed, _MIXTURE_STREAM, n).random(n) < config.eta
    logger.debug("Source mixture keeps %d of %d target-law rows", int(pick.sum()), n)
    return ObservationalDataset(
        X=np.where(pick[:, None], primary.X, aux.X),
        D=None if primary.D is None or aux.D is None else np.where(pick, primary.D, aux.D),
        Y=None if primary.Y is None or aux.Y is None else np.where(pick, primary.Y, aux.Y),
        columns=primary.columns,
    )


def _fit_factor(config: ExperimentConfig, dataset: ObservationalDataset) -> FactorProxy:
    return fit_factor_proxy(dataset, config.q, config.include_x, config.include_d, config.include_y)


def ate_training_data(
    config: ExperimentConfig, dataset: ObservationalDataset
) -> Tuple[FactorProxy, Tuple[str, ...], np.ndarray]:
    proxy = _fit_factor(config, dataset)
    S, names = proxy_block(proxy, dataset.n)
    return proxy, conditioning_layout(dataset.columns, names), build_conditioning(dataset.X, S, dataset.D)


def train_generator(
    config: ExperimentConfig,
    cond: np.ndarray,
    y: np.ndarray,
    layout: Sequence[str],
    schedule: Schedule,
    source: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> ScoreModel:
    """Target-only training, or source pretraining followed by head fine-tuning.

    Standardization always comes from the target ``(cond, y)``; source rows are
    scaled through the same statistics during pretraining.
    """
    if source is None:
        return fit_score_model(y, cond, layout, config.train, config.architecture, schedule).model
    src_cond, src_y = source
    model = build_score_model(cond, y, layout, config.architecture, schedule, seed=config.train.seed)
    pretrained = pretrain_source(model, src_y, src_cond, config.train).model
    return finetune_target(pretrained, y, cond, config.finetune or config.train).model


def _record_ate(rec: _Recorder, methods: Sequence[str], report: EffectReport) -> None:
    for method in methods:
        rec.ok(method, report.ate if method == "acee" else report.ate_c)


def _run_ate(config: ExperimentConfig, task: ReplicationTask, schedule: Schedule, rec: _Recorder) -> None:
    dataset = rec.attempt(config.methods, lambda: target_dataset(config, task))
    if dataset is None:
        return
    rec.n = dataset.n
    if "diff_means" in config.methods:
        rec.attempt(["diff_means"], lambda: rec.ok("diff_means", baseline_diff_means(dataset).ate))
    if "reg_adjust" in config.methods:
        rec.attempt(["reg_adjust"], lambda: rec.ok("reg_adjust", baseline_reg_adjust(dataset).ate))

    acee = [m for m in config.methods if m in _ACEE_METHODS]
    prepared = rec.attempt(acee, lambda: ate_training_data(config, dataset))
    if prepared is None:
        return
    proxy, layout, cond = prepared
    y = dataset.Y
    main = [m for m in ("acee", "acee_bc") if m in config.methods]
    scratch = ["acee_no_transfer"] if "acee_no_transfer" in config.methods else []
    if task.n_source == 0:
        scratch, main = main + scratch, []

    def estimate(model: ScoreModel) -> EffectReport:
        return estimate_effects(
            dataset,
            proxy,
            DiffusionGenerator(model),
            M=config.M,
            N=config.neighbors_for(dataset.n),
            seed=task.seed,
            include_self=config.include_self,
        )

    if main:

        def pretrained() -> ScoreModel:
            source = source_dataset(config, task)
            _, _, src_cond = ate_training_data(config, source)
            return train_generator(config, cond, y, layout, schedule, (src_cond, source.Y))

        model = rec.attempt(main, pretrained)
        if model is not None:
            rec.attempt(main, lambda: _record_ate(rec, main, estimate(model)))
    if scratch:
        model = rec.attempt(scratch, lambda: train_generator(config, cond, y, layout, schedule))
        if model is not None:
            rec.attempt(scratch, lambda: _record_ate(rec, scratch, estimate(model)))


def _dag_proxy(config: ExperimentConfig, X: np.ndarray, columns: Sequence[str]) -> Optional[ResidualProxy]:
    return fit_residual_proxy(X, config.q, columns) if config.include_x else None


def _run_dag(config: ExperimentConfig, task: ReplicationTask, schedule: Schedule, rec: _Recorder) -> None:
    scm = _scm(config)
    k, j = dag_query(config)
    order = scm.dag.observed_order()
    data = rec.attempt(config.methods, lambda: target_dataset(config, task))
    if data is None:
        return
    X, columns = data.X, list(data.columns)
    if "reg_adjust" in config.methods:
        rec.attempt(
            ["reg_adjust"],
            lambda: rec.ok("reg_adjust", baseline_dag_regression(X, columns, order, k, j).ate),
        )

    acee = [m for m in config.methods if m in _ACEE_METHODS]
    proxy = rec.attempt(acee, lambda: _dag_proxy(config, X, columns))
    if acee and all(m in rec.rows for m in acee):
        return
    layout = dag_conditioning_layout(order, k)
    main = ["acee"] if "acee" in config.methods else []
    scratch = ["acee_no_transfer"] if "acee_no_transfer" in config.methods else []
    if task.n_source == 0:
        scratch, main = main + scratch, []

    def estimate(model: ScoreModel) -> float:
        return estimate_dag_total_effect(
            X,
            columns,
            order,
            k,
            j,
            DiffusionGenerator(model),
            config.query.x1,
            config.query.x0,
            proxy,
            M=config.M,
            seed=task.seed,
        ).tau_hat

    def training(X_: np.ndarray, proxy_: Optional[ResidualProxy]) -> Tuple[np.ndarray, np.ndarray]:
        return dag_training_data(X_, columns, order, k, j, proxy_)

    for methods, with_source in ((main, True), (scratch, False)):
        if not methods:
            continue

        def fit(with_source: bool = with_source) -> ScoreModel:
            cond, y = training(X, proxy)
            source = None
            if with_source:
                src = simulate(
                    _scm(config, config.source_shift), task.n_source, make_rng(task.seed, _SOURCE_STREAM, task.n_source)
                )
                source = training(src.dataset.X, _dag_proxy(config, src.dataset.X, columns))
            return train_generator(config, cond, y, layout, schedule, source)

        model = rec.attempt(methods, fit)
        if model is not None:
            value = rec.attempt(methods, lambda: estimate(model))
            if value is not None:
                for method in methods:
                    rec.ok(method, value)


def run_replication(
    config: ExperimentConfig, task: ReplicationTask, truth: Optional[float], schedule: Schedule = Schedule()
) -> List[ResultRow]:
    """All configured methods on one replication; failures become rows, never exceptions."""
    rec = _Recorder(config, task, truth)
    runner = _run_dag if config.kind == "dag" else _run_ate
    with ErrorContext(f"replication n={task.n} n_source={task.n_source} seed={task.seed}", level=logging.INFO):
        runner(config, task, schedule, rec)
    return rec.finish()


def replication_tasks(config: ExperimentConfig) -> List[ReplicationTask]:
    return [
        ReplicationTask(n, n_source, seed)
        for n in config.sizes
        for n_source in config.source_sizes
        for seed in config.seeds
    ]


def run_experiment(
    config: ExperimentConfig, settings: Optional[Settings] = None, workers: Optional[int] = None
) -> ExperimentResult:
    """Run every replication of ``config`` and fold the rows in task order.

    With more than one worker replications run in a process pool; the fold
    is the same as for serial execution.
    """
    settings = settings or Settings()
    config = config.with_settings(settings)
    workers = workers or settings.workers
    schedule = Schedule.from_settings(settings)
    truth = experiment_truth(config)
    tasks = replication_tasks(config)
    logger.info(
        "Running %s experiment on %s: %d replications x %d methods (workers=%d)",
        config.kind,
        config.model,
        len(tasks),
        len(config.methods),
        workers,
    )

    with ErrorContext(f"experiment {config.model}", level=logging.INFO):
        if workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                outputs = list(pool.map(run_replication, repeat(config), tasks, repeat(truth), repeat(schedule)))
        else:
            outputs = [run_replication(config, task, truth, schedule) for task in tasks]

    result = ExperimentResult(config, [row for rows in outputs for row in rows], truth)
    for row in result.rows:
        if row.status != "ok":
            result.failures.record(
                f"bench::seed={row.seed}::{row.method}",
                row.error_type or row.status,
                row.error or "",
                {"n": row.n, "n_source": row.n_source},
            )
    if len(result.failures):
        logger.warning("%d of %d runs failed", len(result.failures), len(result.rows))
    return result


def write_results(result: ExperimentResult, out_dir: Path) -> Tuple[Path, Path]:
    """``results.csv`` and ``summary.json``; identical inputs give identical bytes."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = out_dir / "results.csv", out_dir / "summary.json"
    result.frame().to_csv(csv_path, index=False)
    json_path.write_text(json.dumps(result.summary(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info("Wrote %s and %s", csv_path, json_path)
    return csv_path, json_path
