import math

import numpy as np
import pytest

from acee.effects import (
    ObservationalDataset,
    PointMassGenerator,
    ShiftedGenerator,
    closed_form_corrected_ate,
    default_neighbors,
    estimate_effects,
    estimate_mu,
)
from acee.numerics import make_rng
from acee.proxy import fit_factor_proxy
from acee.scm import OutcomeMechanismGenerator, bench_model, simulate, true_ate
from acee.utils.error_handling import DimensionMismatch, DomainError, EstimationError

from .helpers import LinearMeanGenerator, NoisyMeanGenerator, random_dataset

M1_COLUMNS = ["X1", "X2", "X3", "X4", "X5", "D"]


def _m1_mean(x, d):
    return x[0] ** 2 + x[0] * x[1] + math.exp(x[2] + d) + math.sin(x[3] * x[4])


def test_corrected_ate_matches_closed_form_on_random_instances():
    gen = np.random.default_rng(0)
    for trial in range(100):
        n = int(gen.integers(4, 51))
        dataset = random_dataset(trial, n)
        N = int(gen.integers(1, 7))
        report = estimate_effects(dataset, None, NoisyMeanGenerator(), M=5, N=N, seed=trial)
        closed = closed_form_corrected_ate(
            report.ate, report.residuals, report.D, report.counts, report.neighbors.n_neighbors
        )
        assert report.ate_c == pytest.approx(closed, rel=1e-10, abs=1e-10)
        for arm, corrected in ((0, report.mu0_c), (1, report.mu1_c)):
            expected = (report.mu0, report.mu1)[arm] + report.residuals[report.neighbors.neighbors[arm]].mean(axis=1)
            np.testing.assert_allclose(corrected, expected, rtol=1e-12)


def test_perfect_generator_leaves_estimates_unchanged():
    gen = np.random.default_rng(1)
    X = gen.standard_normal((40, 2))
    D = np.tile([0, 1], 20)
    dataset = ObservationalDataset(X=X, D=D, Y=X[:, 0] + 2.0 * D)
    report = estimate_effects(dataset, None, LinearMeanGenerator(), M=3, N=4)
    np.testing.assert_allclose(report.residuals, 0.0, atol=1e-12)
    np.testing.assert_allclose(report.tau_i_c, report.tau_i, atol=1e-12)
    assert report.ate == pytest.approx(2.0)
    assert report.ate_c == pytest.approx(2.0)


def test_treated_offset_is_removed_exactly():
    gen = np.random.default_rng(2)
    X = gen.standard_normal((40, 2))
    D = np.tile([0, 1], 20)
    dataset = ObservationalDataset(X=X, D=D, Y=X[:, 0] + 2.0 * D)
    report = estimate_effects(dataset, None, LinearMeanGenerator(offset=1.5), M=3, N=4)
    assert report.ate == pytest.approx(3.5)
    assert report.ate_c == pytest.approx(2.0)
    np.testing.assert_allclose(report.residuals[D == 1], -1.5)


def test_treated_offset_is_removed_on_m1():
    scm = bench_model("M1")
    dataset = simulate(scm, 1000, make_rng(3)).dataset
    offset = 3.0
    generator = OutcomeMechanismGenerator(scm, M1_COLUMNS, treated_offset=offset)
    report = estimate_effects(dataset, None, generator, M=20, seed=3)
    assert report.ate - report.ate_c == pytest.approx(offset, abs=0.4)


def test_shifted_generator_matches_treated_offset():
    gen = np.random.default_rng(4)
    X = gen.standard_normal((20, 2))
    D = np.tile([0, 1], 10)
    dataset = ObservationalDataset(X=X, D=D, Y=X[:, 0] + 2.0 * D)
    shifted = estimate_effects(dataset, None, ShiftedGenerator(LinearMeanGenerator(), 1.5), M=2, N=3)
    direct = estimate_effects(dataset, None, LinearMeanGenerator(offset=1.5), M=2, N=3)
    np.testing.assert_allclose(shifted.mu1, direct.mu1)
    assert shifted.ate_c == pytest.approx(direct.ate_c)


def test_hand_computed_example():
    dataset = ObservationalDataset(
        X=np.array([[0.0], [1.0], [3.0], [4.0]]), D=np.array([0, 1, 0, 1]), Y=np.array([1.0, 2.0, 3.0, 4.0])
    )
    report = estimate_effects(dataset, None, PointMassGenerator(0.0), M=1, N=1)
    np.testing.assert_array_equal(report.neighbors.neighbors[0], [[0], [0], [2], [2]])
    np.testing.assert_array_equal(report.neighbors.neighbors[1], [[1], [1], [3], [3]])
    np.testing.assert_array_equal(report.counts, [2, 2, 2, 2])
    np.testing.assert_allclose(report.mu0_c, [1.0, 1.0, 3.0, 3.0])
    np.testing.assert_allclose(report.mu1_c, [2.0, 2.0, 4.0, 4.0])
    assert report.ate == 0.0
    assert report.ate_c == pytest.approx(1.0)
    assert report.ate_c_closed == pytest.approx(1.0)


def test_row_permutation_permutes_results():
    dataset = random_dataset(5, 60, p=3)
    perm = np.random.default_rng(6).permutation(dataset.n)
    a = estimate_effects(dataset, None, NoisyMeanGenerator(), M=10, N=4, seed=9)
    b = estimate_effects(dataset.take(perm), None, NoisyMeanGenerator(), M=10, N=4, seed=9)
    np.testing.assert_array_equal(b.unit_ids, perm)
    np.testing.assert_array_equal(b.mu0, a.mu0[perm])
    np.testing.assert_array_equal(b.mu1, a.mu1[perm])
    np.testing.assert_allclose(b.mu0_c, a.mu0_c[perm], rtol=1e-12)
    np.testing.assert_allclose(b.mu1_c, a.mu1_c[perm], rtol=1e-12)
    np.testing.assert_array_equal(b.counts, a.counts[perm])
    assert b.ate_c == pytest.approx(a.ate_c, rel=1e-12)


def test_estimates_are_deterministic_given_seed():
    dataset = random_dataset(7, 30)
    a = estimate_effects(dataset, None, NoisyMeanGenerator(), M=5, seed=1)
    b = estimate_effects(dataset, None, NoisyMeanGenerator(), M=5, seed=1)
    c = estimate_effects(dataset, None, NoisyMeanGenerator(), M=5, seed=2)
    assert a.ate_c == b.ate_c
    assert a.ate_c != c.ate_c


def test_point_mass_mu():
    estimate = estimate_mu(PointMassGenerator(3.5), [0.0, 1.0], [], 1, 10, make_rng(0))
    assert estimate.mean == 3.5
    assert estimate.std_error == 0.0


def test_mu_matches_m1_response_surface():
    generator = OutcomeMechanismGenerator(bench_model("M1"), M1_COLUMNS)
    x = np.array([0.5, -1.0, 0.2, 1.0, 2.0])
    for d in (0, 1):
        estimate = estimate_mu(generator, x, np.empty(0), d, 20_000, make_rng(11, d))
        assert abs(estimate.mean - _m1_mean(x, d)) <= 5 * estimate.std_error
        assert estimate.std_error == pytest.approx(1 / math.sqrt(20_000), rel=0.1)


def test_mu_standard_error_scales_with_root_m():
    generator = NoisyMeanGenerator()
    small = np.mean([estimate_mu(generator, [0.0], [], 0, 400, make_rng(s)).std_error for s in range(20)])
    large = np.mean([estimate_mu(generator, [0.0], [], 0, 1600, make_rng(s)).std_error for s in range(20)])
    assert 1.9 <= small / large <= 2.1


def test_settings_record_conditioning_layout():
    dataset = random_dataset(8, 40)
    proxy = fit_factor_proxy(dataset, 1)
    report = estimate_effects(dataset, proxy, NoisyMeanGenerator(), M=2)
    assert report.settings["conditioning"] == ["X1", "X2", "S_X1", "S_X2", "S_D", "D"]
    assert report.settings["q"] == 1
    assert report.settings["N"] == default_neighbors(40) == 5


def test_default_neighbors():
    assert default_neighbors(100) == 7
    assert default_neighbors(1) == 1


def test_argument_errors():
    dataset = random_dataset(9, 10)
    with pytest.raises(DomainError):
        estimate_effects(dataset, None, PointMassGenerator(0.0), M=0)
    with pytest.raises(EstimationError):
        estimate_effects(ObservationalDataset(X=dataset.X), None, PointMassGenerator(0.0))
    with pytest.raises(EstimationError):
        estimate_effects(ObservationalDataset(X=dataset.X, D=np.ones(10), Y=dataset.Y), None, PointMassGenerator(0.0))
    with pytest.raises(DimensionMismatch):
        estimate_effects(dataset, np.zeros((9, 2)), PointMassGenerator(0.0))
    with pytest.raises(DomainError):
        estimate_mu(PointMassGenerator(0.0), [0.0], [], 0, 0, make_rng(0))


def test_wrong_generator_shape_is_rejected():
    class Short:
        def sample(self, conds, m, rngs):
            return np.zeros((len(conds), m + 1))

    with pytest.raises(DimensionMismatch):
        estimate_effects(random_dataset(10, 10), None, Short(), M=2)


@pytest.mark.slow
def test_corrected_estimate_is_consistent_under_a_miscalibrated_generator():
    scm = bench_model("M1")
    truth = true_ate("M1")
    raw, corrected = {}, {}
    for n in (100, 400, 1600):
        raw[n], corrected[n] = [], []
        for seed in range(10):
            dataset = simulate(scm, n, make_rng(100 + seed, n)).dataset
            generator = OutcomeMechanismGenerator(scm, M1_COLUMNS, treated_offset=1.0)
            report = estimate_effects(dataset, None, generator, M=20, N=math.ceil(n**0.4), seed=seed)
            raw[n].append(abs(report.ate - truth))
            corrected[n].append(abs(report.ate_c - truth))
    assert np.mean(corrected[1600]) < np.mean(corrected[100])
    assert np.mean(corrected[1600]) < 0.3
    assert np.mean(raw[1600]) > 0.7
