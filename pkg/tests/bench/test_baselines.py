import logging

import numpy as np
import pytest

from acee.bench import baseline_dag_regression, baseline_diff_means, baseline_reg_adjust
from acee.effects import ObservationalDataset
from acee.utils.error_handling import DomainError, EstimationError, GraphError


def _randomized(seed: int, n: int, effect: float = 1.5) -> ObservationalDataset:
    gen = np.random.default_rng(seed)
    X = gen.standard_normal((n, 3))
    D = gen.integers(0, 2, n)
    Y = 1.0 + X @ np.array([0.5, -1.0, 2.0]) + effect * D + gen.standard_normal(n)
    return ObservationalDataset(X=X, D=D, Y=Y)


def test_outcome_equal_to_treatment():
    D = np.array([0, 1, 0, 1, 1])
    estimate = baseline_diff_means(ObservationalDataset(X=np.zeros((5, 1)), D=D, Y=D))
    assert estimate.ate == 1.0
    assert estimate.std_error == 0.0


def test_constant_outcome_gives_zero():
    D = np.array([0, 1, 0, 1])
    assert baseline_diff_means(ObservationalDataset(X=np.zeros((4, 1)), D=D, Y=np.full(4, 3.0))).ate == 0.0


def test_diff_means_is_consistent_under_randomization():
    gen = np.random.default_rng(0)
    n = 20_000
    X = gen.standard_normal((n, 2))
    D = gen.integers(0, 2, n)
    Y = X[:, 0] ** 2 + 2.0 * D + gen.standard_normal(n)
    estimate = baseline_diff_means(ObservationalDataset(X=X, D=D, Y=Y))
    assert abs(estimate.ate - 2.0) <= 4 * estimate.std_error


def test_empty_arm_is_rejected():
    with pytest.raises(EstimationError):
        baseline_diff_means(ObservationalDataset(X=np.zeros((3, 1)), D=np.ones(3), Y=np.zeros(3)))


def test_regression_recovers_linear_effect():
    estimate = baseline_reg_adjust(_randomized(1, 500))
    assert abs(estimate.ate - 1.5) <= 4 * estimate.std_error
    assert estimate.std_error < 0.2


def test_regression_on_independent_treatment_is_null():
    estimate = baseline_reg_adjust(_randomized(2, 500, effect=0.0))
    assert abs(estimate.ate) <= 4 * estimate.std_error


def test_duplicate_covariate_takes_the_warning_path(caplog):
    dataset = _randomized(3, 200)
    doubled = ObservationalDataset(X=np.column_stack([dataset.X, dataset.X[:, 0]]), D=dataset.D, Y=dataset.Y)
    with caplog.at_level(logging.WARNING, logger="acee"):
        estimate = baseline_reg_adjust(doubled)
    assert "collinear" in caplog.text
    assert estimate.ate == pytest.approx(baseline_reg_adjust(dataset).ate, rel=1e-6)


def test_regression_needs_enough_rows():
    with pytest.raises(DomainError):
        baseline_reg_adjust(_randomized(4, 5))


def test_dag_regression_on_linear_sem():
    gen = np.random.default_rng(5)
    n = 1000
    x1 = gen.standard_normal(n)
    x2 = x1 + gen.standard_normal(n)
    x3 = 0.5 * x1 + 2.0 * x2 + gen.standard_normal(n)
    X = np.column_stack([x1, x2, x3])
    cols = ["X1", "X2", "X3"]
    estimate = baseline_dag_regression(X, cols, cols, "X2", "X3")
    assert abs(estimate.ate - 2.0) <= 4 * estimate.std_error
    total = baseline_dag_regression(X, cols, cols, "X1", "X3")
    assert abs(total.ate - 2.5) <= 4 * total.std_error
    with pytest.raises(GraphError):
        baseline_dag_regression(X, cols, cols, "X3", "X1")
