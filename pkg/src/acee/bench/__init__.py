"""Experiment harness, baselines and dataset ingestion."""

from .baselines import BaselineEstimate, baseline_dag_regression, baseline_diff_means, baseline_reg_adjust
from .experiment import (
    RESULT_COLUMNS,
    ExperimentResult,
    ReplicationTask,
    ResultRow,
    ate_training_data,
    dag_query,
    experiment_truth,
    replication_tasks,
    run_experiment,
    run_replication,
    train_generator,
    write_results,
)
from .ingest import ingest_csv, ingest_from_schema, write_dataset_csv

__all__ = [
    "RESULT_COLUMNS",
    "BaselineEstimate",
    "ExperimentResult",
    "ReplicationTask",
    "ResultRow",
    "ate_training_data",
    "baseline_dag_regression",
    "baseline_diff_means",
    "baseline_reg_adjust",
    "dag_query",
    "experiment_truth",
    "ingest_csv",
    "ingest_from_schema",
    "replication_tasks",
    "run_experiment",
    "run_replication",
    "train_generator",
    "write_dataset_csv",
    "write_results",
]
