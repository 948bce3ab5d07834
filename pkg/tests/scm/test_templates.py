import math

import numpy as np
import pytest

from acee.numerics import make_rng
from acee.scm import BenchModel, InterventionQuery, bench_model, default_query, do_total_effect, simulate, true_ate
from acee.utils.error_handling import ConfigError


@pytest.mark.parametrize("model", [m for m in BenchModel if m is not BenchModel.LINEAR_V])
def test_every_template_builds_and_simulates(model):
    scm = bench_model(model)
    result = simulate(scm, 200, make_rng(1))
    assert result.dataset.n == 200
    treatment, outcome = default_query(model)
    assert treatment in scm.dag.labels and outcome in scm.dag.labels


def test_simpson_edge_sets():
    assert set(bench_model("NonlinSimpson").dag.edges) == {("X3", "X1"), ("X3", "X2"), ("X1", "X2"), ("X2", "X4")}
    assert set(bench_model("SymprodSimpson").dag.edges) == {("X3", "X1"), ("X3", "X2"), ("X1", "X2"), ("X3", "X4")}


def test_backdoor_edge_sets():
    large = set(bench_model("LargeBackdoor").dag.edges)
    assert len(large) == 9
    assert ("X8", "X9") in large and ("X7", "X9") in large
    weak = set(bench_model("WeakArrows").dag.edges)
    assert weak == large | {(f"X{i}", "X9") for i in range(1, 7)}


def test_closed_form_ates():
    assert true_ate("M1") == pytest.approx(2.83297, abs=1e-5)
    assert true_ate("M2") == true_ate("M1")
    assert true_ate("M3") == pytest.approx(1.64872, abs=1e-5)
    assert true_ate("M4") == 0.0
    assert true_ate("LargeBackdoor") is None


def test_shifted_law_moves_roots_only():
    base = simulate(bench_model("M1"), 50_000, make_rng(3)).dataset
    shifted = simulate(bench_model("M1", shift=1.0), 50_000, make_rng(3)).dataset
    np.testing.assert_allclose(shifted.X.mean(axis=0) - base.X.mean(axis=0), 1.0, atol=1e-12)
    assert true_ate("M1", shift=1.0) == pytest.approx(math.expm1(1.0) * math.exp(1.5))


def test_shifted_m4_oracle_matches_closed_form():
    scm = bench_model("M4", shift=0.5)
    est = do_total_effect(scm, InterventionQuery("D", "Y", draws=50_000), make_rng(4))
    assert abs(est.estimate - true_ate("M4", shift=0.5)) <= 3 * est.std_error


def test_multiplicative_variant_changes_noise():
    add = bench_model("NonlinSimpson")
    mult = bench_model("NonlinSimpsonMult")
    assert add.dag == mult.dag
    assert mult.mechanisms["X2"].template == "soft_nonlinear_mult"
    assert mult.mechanisms["X3"].template == "soft_nonlinear"


def test_unknown_model_and_missing_v():
    with pytest.raises(ConfigError):
        bench_model("M9")
    with pytest.raises(ConfigError):
        bench_model("LinearV")


def test_parse_accepts_member_names():
    assert BenchModel.parse("large_backdoor") is BenchModel.LARGE_BACKDOOR
    assert BenchModel.parse("nonlinsimpson") is BenchModel.NONLIN_SIMPSON
