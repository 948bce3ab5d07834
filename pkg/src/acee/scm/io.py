"""JSON description files for DAGs and SCMs.

Schema::

    {
      "name": "my-model",
      "nodes": [{"name": "H", "hidden": true,
                 "noise": {"kind": "normal", "loc": 0, "scale": 1},
                 "mechanism": {"template": "linear", "params": {"coefficients": {}, "intercept": 0}}}, ...],
      "edges": [["H", "X1"], ...],
      "treatment": "D",
      "outcome": "Y"
    }

Templates: ``linear`` (coefficients, intercept), ``soft_nonlinear`` and
``soft_nonlinear_mult`` (weights), ``logistic_treatment`` (coefficients,
intercept, floor, span). Edges must agree with the parent names used in the
mechanism parameters.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..utils.error_handling import GraphError, SchemaError
from .dag import Dag
from .model import Linear, LogisticTreatment, Mechanism, NoiseSpec, Scm, SoftNonlinear

Template = Literal["linear", "soft_nonlinear", "soft_nonlinear_mult", "logistic_treatment"]


class NoiseModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["normal", "uniform", "laplace"] = "normal"
    loc: float = 0.0
    scale: float = Field(default=1.0, ge=0)


class MechanismModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    template: Template
    params: Dict[str, Any] = Field(default_factory=dict)


class NodeModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    hidden: bool = False
    noise: Optional[NoiseModel] = None
    mechanism: MechanismModel


class ScmFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = "scm"
    nodes: List[NodeModel]
    edges: List[Tuple[str, str]] = Field(default_factory=list)
    treatment: Optional[str] = None
    outcome: Optional[str] = None


def _build_mechanism(node: NodeModel) -> Mechanism:
    params = dict(node.mechanism.params)
    template = node.mechanism.template
    try:
        if template == "linear":
            return Linear(dict(params.get("coefficients", {})), float(params.get("intercept", 0.0)))
        if template in ("soft_nonlinear", "soft_nonlinear_mult"):
            return SoftNonlinear(dict(params.get("weights", {})), multiplicative=template.endswith("_mult"))
        return LogisticTreatment(
            dict(params.get("coefficients", {})),
            float(params.get("intercept", 0.0)),
            float(params.get("floor", 0.1)),
            float(params.get("span", 0.8)),
        )
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"bad parameters for node {node.name}: {exc}", node=node.name) from exc


def scm_from_dict(data: Dict[str, Any]) -> Scm:
    try:
        spec = ScmFile.model_validate(data)
    except ValidationError as exc:
        raise SchemaError(
            "invalid SCM description",
            errors=[{"loc": list(e["loc"]), "msg": e["msg"]} for e in exc.errors()],
        ) from exc
    labels = [n.name for n in spec.nodes]
    dag = Dag(labels, spec.edges, [n.name for n in spec.nodes if n.hidden])
    mechanisms = {n.name: _build_mechanism(n) for n in spec.nodes}
    noises = {}
    for n in spec.nodes:
        if n.noise is not None:
            noises[n.name] = NoiseSpec(n.noise.kind, n.noise.loc, n.noise.scale)
        elif n.mechanism.template == "logistic_treatment":
            noises[n.name] = NoiseSpec("uniform", 0.0, 1.0)
    return Scm(dag, mechanisms, noises, treatment=spec.treatment, outcome=spec.outcome, name=spec.name)


def scm_to_dict(scm: Scm) -> Dict[str, Any]:
    nodes = []
    for name in scm.dag.labels:
        mech = scm.mechanisms[name]
        if mech.template is None:
            raise SchemaError(f"mechanism of {name} cannot be written to JSON", node=name)
        noise = scm.noises[name]
        nodes.append(
            {
                "name": name,
                "hidden": scm.dag.is_hidden(name),
                "noise": {"kind": noise.kind, "loc": noise.loc, "scale": noise.scale},
                "mechanism": {"template": mech.template, "params": mech.params()},
            }
        )
    return {
        "name": scm.name,
        "nodes": nodes,
        "edges": [list(e) for e in scm.dag.edges],
        "treatment": scm.treatment,
        "outcome": scm.outcome,
    }


def load_scm(path: Path) -> Scm:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read SCM file {path}: {exc}", path=str(path)) from exc
    try:
        return scm_from_dict(data)
    except GraphError as exc:
        exc.details.setdefault("path", str(path))
        raise


def dump_scm(scm: Scm, path: Path) -> None:
    Path(path).write_text(json.dumps(scm_to_dict(scm), indent=2), encoding="utf-8")
