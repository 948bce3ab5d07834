"""Treatment-effect estimators."""

from .dataset import ObservationalDataset
from .dag import DagEffectEstimate, dag_conditioning_layout, dag_training_data, estimate_dag_total_effect
from .estimators import (
    EffectReport,
    MuEstimate,
    build_conditioning,
    closed_form_corrected_ate,
    conditioning_layout,
    default_neighbors,
    estimate_effects,
    estimate_mu,
    proxy_block,
)
from .generators import ConditionalGenerator, PointMassGenerator, ShiftedGenerator
from .neighbors import NeighborIndex, build_neighbor_index, knn_query
from .report import effect_frame, effect_summary, write_dag_effect, write_effect_report

__all__ = [
    "ConditionalGenerator",
    "DagEffectEstimate",
    "EffectReport",
    "MuEstimate",
    "NeighborIndex",
    "ObservationalDataset",
    "PointMassGenerator",
    "ShiftedGenerator",
    "build_conditioning",
    "build_neighbor_index",
    "closed_form_corrected_ate",
    "conditioning_layout",
    "dag_conditioning_layout",
    "dag_training_data",
    "default_neighbors",
    "effect_frame",
    "effect_summary",
    "estimate_dag_total_effect",
    "estimate_effects",
    "estimate_mu",
    "knn_query",
    "proxy_block",
    "write_dag_effect",
    "write_effect_report",
]
