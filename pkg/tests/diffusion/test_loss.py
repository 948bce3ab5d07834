import numpy as np
import pytest

from acee.diffusion import Schedule, build_score_model, denoising_loss_value, dsm_loss
from acee.numerics import Mlp, make_rng

from .helpers import TINY


def _zero_head(model):
    head = Mlp(tuple(np.zeros_like(w) for w in model.head.weights), tuple(np.zeros_like(b) for b in model.head.biases))
    return model.with_networks(head=head)


def test_zero_head_loss_is_mean_squared_target(tiny_model):
    model = _zero_head(tiny_model)
    gen = np.random.default_rng(0)
    y, cond = gen.standard_normal(50), gen.standard_normal((50, 1))
    plain = dsm_loss(model, y, cond, make_rng(1), time_draws=3, weighting="none", grads=False)
    assert plain.value == pytest.approx(np.mean(plain.eps**2 / Schedule.sigma2(plain.tau)), rel=1e-12)
    weighted = dsm_loss(model, y, cond, make_rng(1), time_draws=3, weighting="sigma2", grads=False)
    assert weighted.value == pytest.approx(np.mean(weighted.eps**2), rel=1e-12)


def test_transition_score_has_zero_loss():
    schedule = Schedule()
    gen = make_rng(4)
    tau = schedule.sample_times(gen, 10_000)
    eps = gen.standard_normal(10_000)
    y0 = 0.7
    z = schedule.alpha(tau) * y0 + schedule.sigma(tau) * eps
    eps_hat = (z - schedule.alpha(tau) * y0) / schedule.sigma(tau)
    for weighting in ("sigma2", "none"):
        assert denoising_loss_value(eps_hat, eps, tau, weighting, schedule) < 1e-20


def _flat(arrays):
    return np.concatenate([a.ravel() for a in arrays])


@pytest.mark.parametrize("seed", [0, 1, 2])
@pytest.mark.parametrize("weighting", ["sigma2", "none"])
def test_gradient_matches_finite_differences(seed, weighting):
    gen = np.random.default_rng(seed)
    cond = gen.standard_normal((12, 2))
    y = gen.standard_normal(12)
    model = build_score_model(cond, y, ["A", "B"], TINY, seed=seed)

    def loss_at(embed, head):
        current = model.with_networks(embed, head)
        return dsm_loss(current, y, cond, make_rng(seed, 9), time_draws=2, weighting=weighting, grads=False).value

    result = dsm_loss(model, y, cond, make_rng(seed, 9), time_draws=2, weighting=weighting)
    analytic = _flat(result.embed_grads + result.head_grads)
    params = [p.copy() for p in model.parameters()]
    n_embed = len(model.embed.parameters())
    step = 1e-7
    numeric = []
    for i, p in enumerate(params):
        for idx in np.ndindex(p.shape):
            values = []
            for sign in (1.0, -1.0):
                moved = [q.copy() for q in params]
                moved[i][idx] += sign * step
                values.append(loss_at(Mlp.from_parameters(moved[:n_embed]), Mlp.from_parameters(moved[n_embed:])))
            numeric.append((values[0] - values[1]) / (2 * step))
    numeric = np.array(numeric)
    assert np.linalg.norm(numeric - analytic) / np.linalg.norm(analytic) < 1e-4


def test_frozen_embedding_returns_no_embed_gradient(tiny_model):
    gen = np.random.default_rng(1)
    result = dsm_loss(tiny_model, gen.standard_normal(8), gen.standard_normal((8, 1)), make_rng(0), train_embed=False)
    assert result.embed_grads is None
    assert len(result.head_grads) == len(tiny_model.head.parameters())


def test_same_stream_same_loss(tiny_model):
    gen = np.random.default_rng(2)
    y, cond = gen.standard_normal(16), gen.standard_normal((16, 1))
    a = dsm_loss(tiny_model, y, cond, make_rng(5))
    b = dsm_loss(tiny_model, y, cond, make_rng(5))
    assert a.value == b.value
    for ga, gb in zip(a.head_grads, b.head_grads):
        np.testing.assert_array_equal(ga, gb)
