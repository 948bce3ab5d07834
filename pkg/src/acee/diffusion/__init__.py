"""Conditional score-based diffusion generator."""

from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .loss import LossResult, denoising_loss_value, dsm_loss
from .model import ScoreModel, Standardizer, build_score_model
from .sampler import DiffusionGenerator, sample_conditional, sample_conditional_batch
from .schedule import PerturbResult, Schedule, forward_perturb
from .training import TrainingResult, evaluate_loss, finetune_target, fit_score_model, pretrain_source

__all__ = [
    "Checkpoint",
    "DiffusionGenerator",
    "LossResult",
    "PerturbResult",
    "Schedule",
    "ScoreModel",
    "Standardizer",
    "TrainingResult",
    "build_score_model",
    "denoising_loss_value",
    "dsm_loss",
    "evaluate_loss",
    "finetune_target",
    "fit_score_model",
    "forward_perturb",
    "load_checkpoint",
    "pretrain_source",
    "sample_conditional",
    "sample_conditional_batch",
    "save_checkpoint",
]
