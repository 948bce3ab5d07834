import numpy as np
import pytest

from acee.config import TrainConfig
from acee.diffusion import DiffusionGenerator, fit_score_model
from acee.effects import dag_conditioning_layout, dag_training_data, estimate_dag_total_effect
from acee.numerics import make_rng
from acee.proxy import fit_residual_proxy
from acee.scm import OutcomeMechanismGenerator, linear_scm, linear_total_effect, simulate
from acee.utils.error_handling import DomainError, GraphError

COLUMNS = ["X1", "X2", "X3"]
# X1 -> X2 (1.0), X1 -> X3 (0.5), X2 -> X3 (2.0)
V = np.array([[0.0, 1.0, 0.5], [0.0, 0.0, 2.0], [0.0, 0.0, 0.0]])


def _data(n: int, seed: int) -> np.ndarray:
    return simulate(linear_scm(V), n, make_rng(seed)).matrix(COLUMNS)


def test_conditioning_layout():
    assert dag_conditioning_layout(COLUMNS, "X2") == ("X1", "X2", "S_X1")
    assert dag_conditioning_layout(COLUMNS, "X1") == ("X1",)
    with pytest.raises(GraphError):
        dag_conditioning_layout(COLUMNS, "X9")


def test_oracle_generator_recovers_linear_effect():
    X = _data(50, 0)
    generator = OutcomeMechanismGenerator(linear_scm(V), ["X1", "X2"], target="X3")
    estimate = estimate_dag_total_effect(X, COLUMNS, COLUMNS, "X2", "X3", generator, M=5)
    np.testing.assert_allclose(estimate.contrasts, 2.0, atol=1e-12)
    assert estimate.tau_hat == pytest.approx(linear_total_effect(V, 1, 2))
    assert estimate.layout == ("X1", "X2", "S_X1")


def test_proxy_block_is_appended():
    X = _data(50, 1)
    generator = OutcomeMechanismGenerator(linear_scm(V), ["X1", "X2", None], target="X3")
    for proxy in (fit_residual_proxy(X, 1, COLUMNS), np.ones_like(X)):
        estimate = estimate_dag_total_effect(X, COLUMNS, COLUMNS, "X2", "X3", generator, proxy=proxy, M=5)
        assert estimate.tau_hat == pytest.approx(2.0)


def test_equal_levels_give_exactly_zero():
    X = _data(30, 2)
    generator = OutcomeMechanismGenerator(linear_scm(V), ["X1", "X2"], target="X3")
    estimate = estimate_dag_total_effect(X, COLUMNS, COLUMNS, "X2", "X3", generator, x1=0.7, x0=0.7, M=4)
    assert estimate.tau_hat == 0.0
    assert np.all(estimate.contrasts == 0.0)


def test_root_treatment_has_no_upstream_block():
    X = _data(30, 3)
    generator = OutcomeMechanismGenerator(linear_scm(V), ["X1"], target="X3")
    estimate = estimate_dag_total_effect(X, COLUMNS, COLUMNS, "X1", "X3", generator, M=5)
    assert estimate.layout == ("X1",)
    assert estimate.tau_hat == pytest.approx(linear_total_effect(V, 0, 2))


def test_order_errors():
    X = _data(10, 4)
    generator = OutcomeMechanismGenerator(linear_scm(V), ["X1", "X2"], target="X3")
    with pytest.raises(GraphError):
        estimate_dag_total_effect(X, COLUMNS, COLUMNS, "X3", "X2", generator)
    with pytest.raises(GraphError):
        estimate_dag_total_effect(X, COLUMNS, ["X1", "X2"], "X1", "X2", generator)
    with pytest.raises(GraphError):
        estimate_dag_total_effect(X, COLUMNS, COLUMNS, "X2", "X9", generator)
    with pytest.raises(DomainError):
        estimate_dag_total_effect(X, COLUMNS, COLUMNS, "X2", "X3", generator, M=0)


def test_training_data_matches_layout():
    X = _data(20, 6)
    proxy = np.arange(60, dtype=np.float64).reshape(20, 3)
    cond, y = dag_training_data(X, COLUMNS, COLUMNS, "X2", "X3", proxy)
    assert cond.shape == (20, len(dag_conditioning_layout(COLUMNS, "X2")))
    np.testing.assert_array_equal(cond[:, :2], X[:, :2])
    np.testing.assert_array_equal(cond[:, 2], proxy[:, 0])
    np.testing.assert_array_equal(y, X[:, 2])
    bare, _ = dag_training_data(X, COLUMNS, COLUMNS, "X2", "X3")
    assert bare.shape == (20, 2)
    with pytest.raises(GraphError):
        dag_training_data(X, COLUMNS, COLUMNS, "X3", "X1")


@pytest.mark.slow
def test_trained_generator_recovers_linear_effect():
    X = _data(2000, 5)
    cond = X[:, :2]
    model = fit_score_model(X[:, 2], cond, ["X1", "X2"], TrainConfig(epochs=800, batch_size=128, seed=0)).model
    estimate = estimate_dag_total_effect(X[:200], COLUMNS, COLUMNS, "X2", "X3", DiffusionGenerator(model), M=100)
    assert estimate.tau_hat == pytest.approx(2.0, abs=0.3)
