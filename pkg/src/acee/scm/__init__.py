"""Structural causal models, oracles and graph criteria."""

from .dag import Dag
from .graph import canonical_exogenous_dag, d_separated, is_admissible
from .io import dump_scm, load_scm, scm_from_dict, scm_to_dict
from .model import (
    FunctionMechanism,
    Linear,
    LogisticTreatment,
    Mechanism,
    NoiseSpec,
    Scm,
    SimulationResult,
    SoftNonlinear,
    simulate,
)
from .oracles import (
    InterventionQuery,
    OracleEstimate,
    OutcomeMechanismGenerator,
    conditional_mean_given_hidden,
    do_direct_effect,
    do_indirect_effect,
    do_total_effect,
    linear_total_effect,
)
from .templates import BenchModel, bench_model, default_query, linear_scm, true_ate

__all__ = [
    "BenchModel",
    "Dag",
    "FunctionMechanism",
    "InterventionQuery",
    "Linear",
    "LogisticTreatment",
    "Mechanism",
    "NoiseSpec",
    "OracleEstimate",
    "OutcomeMechanismGenerator",
    "Scm",
    "SimulationResult",
    "SoftNonlinear",
    "bench_model",
    "canonical_exogenous_dag",
    "conditional_mean_given_hidden",
    "d_separated",
    "default_query",
    "do_direct_effect",
    "do_indirect_effect",
    "do_total_effect",
    "dump_scm",
    "is_admissible",
    "linear_scm",
    "linear_total_effect",
    "load_scm",
    "scm_from_dict",
    "scm_to_dict",
    "simulate",
    "true_ate",
]
