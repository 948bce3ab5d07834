"""Benchmark models: the M1-M4 treatment designs, CSuite-shaped graphs and linear SEMs."""

import math
from enum import Enum
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from ..utils.error_handling import ConfigError
from .dag import Dag
from .model import (
    STANDARD_NORMAL,
    UNIT_UNIFORM,
    FunctionMechanism,
    Linear,
    LogisticTreatment,
    Mechanism,
    NoiseSpec,
    Scm,
    SoftNonlinear,
)


class BenchModel(str, Enum):
    M1 = "M1"
    M2 = "M2"
    M3 = "M3"
    M4 = "M4"
    NONLIN_SIMPSON = "NonlinSimpson"
    SYMPROD_SIMPSON = "SymprodSimpson"
    LARGE_BACKDOOR = "LargeBackdoor"
    WEAK_ARROWS = "WeakArrows"
    NONLIN_SIMPSON_MULT = "NonlinSimpsonMult"
    SYMPROD_SIMPSON_MULT = "SymprodSimpsonMult"
    EXAMPLE1 = "Example1"
    LINEAR_V = "LinearV"

    @classmethod
    def parse(cls, name: str) -> "BenchModel":
        for member in cls:
            if member.value.lower() == name.lower() or member.name.lower() == name.lower():
                return member
        raise ConfigError(f"unknown benchmark model {name!r}", choices=[m.value for m in cls])


COVARIATES = ("X1", "X2", "X3", "X4", "X5")

_SIMPSON_NONLIN = {"X1": {"X3": 1.5}, "X2": {"X3": -2.0, "X1": 1.0}, "X4": {"X2": 1.0}}
_SIMPSON_SYMPROD = {"X1": {"X3": 1.5}, "X2": {"X3": -1.0, "X1": 1.0}, "X4": {"X3": 1.0}}
_LARGE_BACKDOOR_EDGES = [
    ("X1", "X2"), ("X1", "X3"), ("X2", "X4"), ("X3", "X5"), ("X4", "X6"),
    ("X6", "X8"), ("X8", "X9"), ("X5", "X7"), ("X7", "X9"),
]  # fmt: skip
_WEAK_EXTRA = [(f"X{i}", "X9") for i in range(1, 7)]

DEFAULT_QUERIES: Dict[BenchModel, Tuple[str, str]] = {
    BenchModel.M1: ("D", "Y"),
    BenchModel.M2: ("D", "Y"),
    BenchModel.M3: ("D", "Y"),
    BenchModel.M4: ("D", "Y"),
    BenchModel.EXAMPLE1: ("D", "Y"),
    BenchModel.NONLIN_SIMPSON: ("X1", "X2"),
    BenchModel.SYMPROD_SIMPSON: ("X1", "X2"),
    BenchModel.NONLIN_SIMPSON_MULT: ("X1", "X2"),
    BenchModel.SYMPROD_SIMPSON_MULT: ("X1", "X2"),
    BenchModel.LARGE_BACKDOOR: ("X8", "X9"),
    BenchModel.WEAK_ARROWS: ("X8", "X9"),
}


def _treatment_design(
    model: BenchModel,
    outcome_parents: Tuple[str, ...],
    outcome_fn: FunctionMechanism,
    shift: float,
) -> Scm:
    labels = list(COVARIATES) + ["D", "Y"]
    edges = [("X1", "D"), ("X2", "D")] + [(p, "Y") for p in outcome_parents]
    mechanisms: Dict[str, Mechanism] = {x: Linear() for x in COVARIATES}
    mechanisms["D"] = FunctionMechanism(
        ("X1", "X2"),
        lambda v, u: (u < 0.1 + 0.8 * expit(-v["X1"] * v["X2"])).astype(np.float64),
        "D = 1{u < 0.1 + 0.8/(1+exp(X1 X2))}",
    )
    mechanisms["Y"] = outcome_fn
    noises = {x: STANDARD_NORMAL.shifted(shift) for x in COVARIATES}
    noises["D"] = UNIT_UNIFORM
    return Scm(Dag(labels, edges), mechanisms, noises, treatment="D", outcome="Y", name=model.value)


def _m1(shift: float) -> Scm:
    parents = ("X1", "X2", "X3", "X4", "X5", "D")
    fn = FunctionMechanism(
        parents,
        lambda v, e: v["X1"] ** 2 + v["X1"] * v["X2"] + np.exp(v["X3"] + v["D"]) + np.sin(v["X4"] * v["X5"]) + e,
        "Y = X1^2 + X1 X2 + exp(X3 + D) + sin(X4 X5) + e",
    )
    return _treatment_design(BenchModel.M1, parents, fn, shift)


def _m2(shift: float) -> Scm:
    parents = ("X1", "X3", "X4", "X5", "D")
    fn = FunctionMechanism(
        parents,
        lambda v, e: (
            v["X1"] ** 2
            + np.exp(v["X3"] + v["D"])
            + np.sin(v["X4"] * v["X5"])
            + (10.0 * v["D"] + 0.5 * v["X5"] ** 2) * e
        ),
        "Y = X1^2 + exp(X3 + D) + sin(X4 X5) + (10 D + X5^2/2) e",
    )
    return _treatment_design(BenchModel.M2, parents, fn, shift)


def _m3(shift: float) -> Scm:
    parents = ("X1", "X2", "X3", "D")
    fn = FunctionMechanism(
        parents,
        lambda v, e: (v["X1"] ** 2 + np.sin(v["X2"] * v["X3"]) + v["D"]) * np.exp(e),
        "Y = (X1^2 + sin(X2 X3) + D) exp(e)",
    )
    return _treatment_design(BenchModel.M3, parents, fn, shift)


def _m4(shift: float) -> Scm:
    labels = ["U", *COVARIATES, "D", "Y"]
    edges = [("U", "X1"), ("U", "X2"), ("U", "X3"), ("U", "D"), ("U", "Y")]
    edges += [(p, "Y") for p in ("X1", "X4", "X5", "D")]
    mechanisms: Dict[str, Mechanism] = {
        "U": Linear(),
        "X1": Linear({"U": 1.5}),
        "X2": Linear({"U": 1.0}),
        "X3": Linear({"U": 1.0}),
        "X4": Linear(),
        "X5": Linear(),
        "D": LogisticTreatment({"U": 1.0}),
        "Y": FunctionMechanism(
            ("U", "X1", "X4", "X5", "D"),
            lambda v, e: v["X1"] ** 2 + v["D"] * v["X1"] + np.sin(v["X4"] * v["X5"]) + v["U"] ** 2 + e,
            "Y = X1^2 + D X1 + sin(X4 X5) + U^2 + e",
        ),
    }
    noises = {n: STANDARD_NORMAL for n in labels}
    for root in ("U", "X4", "X5"):
        noises[root] = STANDARD_NORMAL.shifted(shift)
    noises["D"] = UNIT_UNIFORM
    return Scm(Dag(labels, edges, hidden=["U"]), mechanisms, noises, treatment="D", outcome="Y", name="M4")


def _example1(shift: float) -> Scm:
    """Additive hidden confounding: one hidden H loading on every observed node."""
    labels = ["H", "X1", "X2", "X3", "D", "Y"]
    edges = [("H", n) for n in ("X1", "X2", "X3", "D", "Y")]
    edges += [("X1", "Y"), ("X2", "Y"), ("D", "Y")]
    mechanisms: Dict[str, Mechanism] = {
        "H": Linear(),
        "X1": Linear({"H": 2.0}),
        "X2": Linear({"H": 2.0}),
        "X3": Linear({"H": 2.0}),
        "D": LogisticTreatment({"H": 1.0}),
        "Y": Linear({"H": 2.0, "X1": 1.0, "X2": 0.5, "D": 1.0}),
    }
    noises = {n: STANDARD_NORMAL for n in labels}
    noises["H"] = STANDARD_NORMAL.shifted(shift)
    noises["D"] = UNIT_UNIFORM
    return Scm(Dag(labels, edges, hidden=["H"]), mechanisms, noises, treatment="D", outcome="Y", name="Example1")


def _soft_graph(
    name: str, labels: Sequence[str], weights: Mapping[str, Mapping[str, float]], multiplicative: bool, shift: float
) -> Scm:
    edges = [(p, c) for c, ps in weights.items() for p in ps]
    mechanisms: Dict[str, Mechanism] = {}
    noises: Dict[str, NoiseSpec] = {}
    for node in labels:
        ws = dict(weights.get(node, {}))
        mechanisms[node] = SoftNonlinear(ws, multiplicative=multiplicative and bool(ws))
        if not ws:
            noises[node] = STANDARD_NORMAL.shifted(shift)
        elif multiplicative:
            noises[node] = NoiseSpec("normal", 0.0, 0.5)
        else:
            noises[node] = STANDARD_NORMAL
    return Scm(Dag(labels, edges), mechanisms, noises, name=name)


def _large_backdoor(weak: bool) -> Dict[str, Dict[str, float]]:
    weights: Dict[str, Dict[str, float]] = {}
    for p, c in _LARGE_BACKDOOR_EDGES:
        weights.setdefault(c, {})[p] = 1.0
    if weak:
        for p, c in _WEAK_EXTRA:
            weights[c][p] = 0.3
    return weights


def linear_scm(V: np.ndarray, labels: Optional[Sequence[str]] = None, shift: float = 0.0) -> Scm:
    """Linear-Gaussian SEM ``X = V^T X + e`` where ``V[a, b]`` weights edge a->b."""
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 2 or V.shape[0] != V.shape[1]:
        raise ConfigError("V must be square", shape=list(V.shape))
    p = V.shape[0]
    labels = list(labels) if labels is not None else [f"X{i + 1}" for i in range(p)]
    edges = [(labels[a], labels[b]) for a in range(p) for b in range(p) if V[a, b] != 0.0]
    mechanisms: Dict[str, Mechanism] = {
        labels[b]: Linear({labels[a]: float(V[a, b]) for a in range(p) if V[a, b] != 0.0}) for b in range(p)
    }
    noises: Dict[str, NoiseSpec] = {}
    for b in range(p):
        noises[labels[b]] = STANDARD_NORMAL.shifted(shift) if not np.any(V[:, b]) else STANDARD_NORMAL
    return Scm(Dag(labels, edges), mechanisms, noises, name="LinearV")


def bench_model(model: "BenchModel | str", *, v: Optional[np.ndarray] = None, shift: float = 0.0) -> Scm:
    """Build a benchmark SCM.

    ``shift`` moves the mean of every root distribution, giving an auxiliary
    law with the same parent-child relationships.
    """
    model = BenchModel.parse(model) if isinstance(model, str) else model
    if model is BenchModel.LINEAR_V:
        if v is None:
            raise ConfigError("LinearV needs a weight matrix v")
        return linear_scm(v, shift=shift)
    builders = {
        BenchModel.M1: lambda: _m1(shift),
        BenchModel.M2: lambda: _m2(shift),
        BenchModel.M3: lambda: _m3(shift),
        BenchModel.M4: lambda: _m4(shift),
        BenchModel.EXAMPLE1: lambda: _example1(shift),
        BenchModel.NONLIN_SIMPSON: lambda: _soft_graph(model.value, ["X1", "X2", "X3", "X4"], _SIMPSON_NONLIN, False, shift),
        BenchModel.SYMPROD_SIMPSON: lambda: _soft_graph(model.value, ["X1", "X2", "X3", "X4"], _SIMPSON_SYMPROD, False, shift),
        BenchModel.NONLIN_SIMPSON_MULT: lambda: _soft_graph(model.value, ["X1", "X2", "X3", "X4"], _SIMPSON_NONLIN, True, shift),
        BenchModel.SYMPROD_SIMPSON_MULT: lambda: _soft_graph(model.value, ["X1", "X2", "X3", "X4"], _SIMPSON_SYMPROD, True, shift),
        BenchModel.LARGE_BACKDOOR: lambda: _soft_graph(model.value, [f"X{i}" for i in range(1, 10)], _large_backdoor(False), False, shift),
        BenchModel.WEAK_ARROWS: lambda: _soft_graph(model.value, [f"X{i}" for i in range(1, 10)], _large_backdoor(True), False, shift),
    }  # fmt: skip
    return builders[model]()


def true_ate(model: "BenchModel | str", shift: float = 0.0) -> Optional[float]:
    """Closed-form ATE of D on Y where one exists, else ``None``."""
    model = BenchModel.parse(model) if isinstance(model, str) else model
    if model in (BenchModel.M1, BenchModel.M2):
        # E[exp(X3 + 1) - exp(X3)] with X3 ~ N(shift, 1)
        return math.expm1(1.0) * math.exp(shift + 0.5)
    if model is BenchModel.M3:
        return math.exp(0.5)
    if model is BenchModel.M4:
        return 1.5 * shift
    if model is BenchModel.EXAMPLE1:
        return 1.0
    return None


def default_query(model: "BenchModel | str") -> Tuple[str, str]:
    model = BenchModel.parse(model) if isinstance(model, str) else model
    if model not in DEFAULT_QUERIES:
        raise ConfigError(f"{model.value} has no default query")
    return DEFAULT_QUERIES[model]
