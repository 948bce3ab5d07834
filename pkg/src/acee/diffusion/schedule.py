"""Variance-preserving Ornstein-Uhlenbeck noising schedule."""

from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

from ..config.settings import Settings
from ..numerics.random import Rng
from ..utils.error_handling import ConfigError, DomainError

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class Schedule:
    """Forward process ``dY = -Y/2 dtau + dW`` on ``[tau_min, tau_max]``."""

    tau_min: float = 1e-3
    tau_max: float = 5.0
    steps: int = 100

    def __post_init__(self) -> None:
        if not 0.0 < self.tau_min < self.tau_max:
            raise ConfigError("schedule needs 0 < tau_min < tau_max", tau_min=self.tau_min, tau_max=self.tau_max)
        if self.steps < 2:
            raise ConfigError("sampler needs at least 2 steps", steps=self.steps)

    @classmethod
    def from_settings(cls, settings: Settings) -> "Schedule":
        return cls(settings.tau_min, settings.tau_max, settings.sampler_steps)

    @staticmethod
    def alpha(tau: ArrayLike) -> np.ndarray:
        return np.exp(-0.5 * np.asarray(tau, dtype=np.float64))

    @staticmethod
    def sigma2(tau: ArrayLike) -> np.ndarray:
        return -np.expm1(-np.asarray(tau, dtype=np.float64))

    @classmethod
    def sigma(cls, tau: ArrayLike) -> np.ndarray:
        return np.sqrt(cls.sigma2(tau))

    @property
    def step_size(self) -> float:
        return (self.tau_max - self.tau_min) / self.steps

    def sample_times(self, rng: Rng, size: int) -> np.ndarray:
        return rng.uniform(self.tau_min, self.tau_max, size)

    def contains(self, tau: ArrayLike) -> bool:
        t = np.asarray(tau, dtype=np.float64)
        return bool(np.all((t >= self.tau_min) & (t <= self.tau_max)))


class PerturbResult(NamedTuple):
    y_tau: np.ndarray
    score_target: np.ndarray
    eps: np.ndarray


def forward_perturb(
    y0: ArrayLike,
    tau: ArrayLike,
    rng: Rng,
    schedule: Schedule = Schedule(),
    eps: Optional[np.ndarray] = None,
) -> PerturbResult:
    """Draw ``y_tau = alpha y0 + sigma eps`` and the transition score ``-eps / sigma``."""
    if not schedule.contains(tau):
        raise DomainError(
            f"diffusion time outside [{schedule.tau_min}, {schedule.tau_max}]",
            tau_min=schedule.tau_min,
            tau_max=schedule.tau_max,
        )
    y0 = np.asarray(y0, dtype=np.float64)
    shape = np.broadcast(y0, np.asarray(tau)).shape
    if eps is None:
        eps = rng.standard_normal(shape)
    eps = np.broadcast_to(np.asarray(eps, dtype=np.float64), shape)
    sigma = schedule.sigma(tau)
    y_tau = schedule.alpha(tau) * y0 + sigma * eps
    return PerturbResult(y_tau, -eps / sigma, eps)
