import numpy as np
import pandas as pd
import pytest

from acee.bench import (
    RESULT_COLUMNS,
    ReplicationTask,
    experiment,
    experiment_truth,
    replication_tasks,
    run_experiment,
    train_generator,
    write_dataset_csv,
    write_results,
)
from acee.config import ArchitectureConfig, CsvSchema, ExperimentConfig, Settings, TrainConfig
from acee.diffusion import Schedule
from acee.numerics import make_rng
from acee.scm import bench_model, simulate, true_ate
from acee.utils.error_handling import ConfigError, EstimationError, TrainingDiverged

FAST = Settings(sampler_steps=10, workers=1)
TINY = ArchitectureConfig(embed_hidden=(4,), embed_dim=2, head_hidden=(8,))
QUICK = TrainConfig(epochs=2, batch_size=32)
V = [[0.0, 1.0, 0.5], [0.0, 0.0, 2.0], [0.0, 0.0, 0.0]]


def _baselines(**overrides) -> ExperimentConfig:
    fields = {"model": "M1", "n": 60, "seeds": [0, 1, 2], "methods": ["diff_means", "reg_adjust"]}
    fields.update(overrides)
    return ExperimentConfig(**fields)


def _acee(**overrides) -> ExperimentConfig:
    fields = {
        "model": "M1",
        "n": 30,
        "seeds": [7],
        "M": 2,
        "architecture": TINY,
        "train": QUICK,
        "methods": ["acee", "acee_bc", "diff_means", "reg_adjust"],
    }
    fields.update(overrides)
    return ExperimentConfig(**fields)


def test_baseline_rows_and_truth():
    result = run_experiment(_baselines(), FAST)
    frame = result.frame()
    assert tuple(frame.columns) == RESULT_COLUMNS
    assert len(frame) == 6
    assert (frame["status"] == "ok").all()
    assert frame["true_ate"].unique().tolist() == [true_ate("M1")]
    np.testing.assert_allclose(frame["abs_err"], (frame["ate_hat"] - frame["true_ate"]).abs())
    assert list(frame["method"][:2]) == ["diff_means", "reg_adjust"]


def test_mse_table_folds_squared_errors():
    result = run_experiment(_baselines(), FAST)
    table = result.mse_table()
    frame = result.frame()
    for method in ("diff_means", "reg_adjust"):
        row = table[table["method"] == method].iloc[0]
        errors = frame.loc[frame["method"] == method, "abs_err"]
        assert row["mse"] == pytest.approx(float(np.mean(errors**2)))
        assert row["rmse"] == pytest.approx(np.sqrt(row["mse"]))
        assert row["runs"] == 3 and row["failures"] == 0


def test_reruns_write_identical_files(tmp_path):
    config = _acee()
    paths = [write_results(run_experiment(config, FAST), tmp_path / name) for name in ("a", "b")]
    for first, second in zip(*paths):
        assert first.read_bytes() == second.read_bytes()


def test_acee_methods_run_end_to_end():
    frame = run_experiment(_acee(), FAST).frame()
    assert frame["method"].tolist() == ["acee", "acee_bc", "diff_means", "reg_adjust"]
    assert (frame["status"] == "ok").all()
    assert np.isfinite(frame["ate_hat"]).all()


def test_transfer_methods_with_mixture_source():
    config = _acee(n_source=40, eta=0.4, methods=["acee", "acee_bc", "acee_no_transfer"])
    frame = run_experiment(config, FAST).frame()
    assert (frame["status"] == "ok").all()
    assert (frame["n_source"] == 40).all()


def test_failed_method_is_recorded_and_run_continues(mocker):
    mocker.patch.object(experiment, "baseline_reg_adjust", side_effect=EstimationError("singular"))
    result = run_experiment(_baselines(), FAST)
    frame = result.frame()
    failed = frame[frame["method"] == "reg_adjust"]
    assert (failed["status"] == "failed").all()
    assert failed["error"].unique().tolist() == ["estimation_error: singular"]
    assert (frame.loc[frame["method"] == "diff_means", "status"] == "ok").all()
    summary = result.failures.get_error_summary()
    assert summary["total_errors"] == 3
    assert summary["operations"]["bench::seed=0::reg_adjust"]["error_types"] == {"EstimationError": 1}
    assert result.mse_table().set_index("method").loc["reg_adjust", "failures"] == 3


def test_failed_training_marks_dependent_methods(mocker):
    mocker.patch.object(experiment, "train_generator", side_effect=TrainingDiverged("loss exploded"))
    frame = run_experiment(_acee(), FAST).frame().set_index("method")
    assert frame.loc["acee", "status"] == "failed"
    assert frame.loc["acee_bc", "error"] == "training_diverged: loss exploded"
    assert frame.loc["diff_means", "status"] == "ok"


def test_parallel_fold_matches_serial():
    config = _baselines(n=[40, 80])
    serial = run_experiment(config, FAST, workers=1).frame()
    parallel = run_experiment(config, FAST, workers=2).frame()
    pd.testing.assert_frame_equal(serial, parallel)


def test_tasks_cover_the_grid():
    config = _baselines(n=[20, 40], n_source=[0, 10], seeds=[3, 4])
    tasks = replication_tasks(config)
    assert len(tasks) == 8
    assert tasks[0] == ReplicationTask(20, 0, 3)
    assert tasks[-1] == ReplicationTask(40, 10, 4)


def test_mixture_extremes():
    task = ReplicationTask(30, 50, 2)
    pure = experiment.source_dataset(_baselines(n_source=50, eta=1.0), task)
    expected = simulate(bench_model("M1"), 50, make_rng(2, 1, 50)).dataset
    np.testing.assert_array_equal(pure.X, expected.X)
    np.testing.assert_array_equal(pure.Y, expected.Y)
    mixed = experiment.source_dataset(_baselines(n_source=50, eta=0.5), task)
    from_target = np.all(mixed.X == expected.X, axis=1)
    assert 0 < from_target.sum() < 50


def test_mixture_needs_matching_columns():
    config = _baselines(n_source=20, eta=0.5, aux_model="Example1")
    with pytest.raises(ConfigError):
        experiment.source_dataset(config, ReplicationTask(30, 20, 0))


def test_truth_sources():
    assert experiment_truth(_baselines()) == true_ate("M1")
    dag = ExperimentConfig(kind="dag", model="LinearV", v=V, query={"treatment": "X2", "outcome": "X3"}, oracle_draws=1000)
    assert experiment_truth(dag) == pytest.approx(2.0)
    with pytest.raises(ConfigError):
        experiment_truth(ExperimentConfig(model="NonlinSimpson", methods=["diff_means"]))


def test_dag_experiment_on_linear_sem():
    config = ExperimentConfig(
        kind="dag",
        model="LinearV",
        v=V,
        n=400,
        seeds=[0, 1],
        query={"treatment": "X2", "outcome": "X3"},
        oracle_draws=1000,
        methods=["reg_adjust", "acee"],
        M=2,
        architecture=TINY,
        train=QUICK,
    )
    frame = run_experiment(config, FAST).frame().set_index(["seed", "method"])
    assert (frame["status"] == "ok").all()
    assert frame.loc[(0, "reg_adjust"), "abs_err"] < 0.3


def test_csv_experiment_subsamples_without_truth(tmp_path):
    dataset = simulate(bench_model("M1"), 40, make_rng(0)).dataset
    path = write_dataset_csv(dataset, tmp_path / "m1.csv")
    config = ExperimentConfig(
        model="csv",
        csv=CsvSchema(path=path, unit_id="unit_id"),
        n=20,
        seeds=[0, 1],
        methods=["diff_means"],
    )
    result = run_experiment(config, FAST)
    frame = result.frame()
    assert (frame["n"] == 20).all()
    assert frame["true_ate"].isna().all() and frame["abs_err"].isna().all()
    assert result.true_effect is None
    assert frame["ate_hat"].iloc[0] != frame["ate_hat"].iloc[1]


def test_transfer_keeps_target_standardization():
    gen = np.random.default_rng(0)
    cond = gen.standard_normal((40, 3))
    y = cond[:, 0] + 0.1 * gen.standard_normal(40)
    src_cond = 5.0 + 3.0 * gen.standard_normal((60, 3))
    src_y = 10.0 + src_cond[:, 0]
    config = _acee(train=TrainConfig(epochs=1, batch_size=32))
    model = train_generator(config, cond, y, ["X1", "X2", "D"], Schedule(steps=10), source=(src_cond, src_y))
    np.testing.assert_allclose(model.cond_std.mean, cond.mean(axis=0))
    np.testing.assert_allclose(model.cond_std.scale, cond.std(axis=0))
    np.testing.assert_allclose(model.y_std.mean, [y.mean()])
    np.testing.assert_allclose(model.y_std.scale, [y.std()])
