import pytest

from acee.diffusion import build_score_model

from .helpers import TINY, linear_data


@pytest.fixture
def tiny_model():
    cond, y = linear_data(200, 0)
    return build_score_model(cond, y, ["X1"], TINY, seed=3)
