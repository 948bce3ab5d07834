"""Structural causal models: mechanisms, noise and simulation."""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Literal, Mapping, Optional, Tuple, Union

import numpy as np
from scipy.special import expit

from ..effects.dataset import ObservationalDataset
from ..numerics.random import Rng
from ..utils.error_handling import DomainError, GraphError, SimulationError
from .dag import Dag

logger = logging.getLogger(__name__)

Values = Dict[str, np.ndarray]
Intervention = Mapping[str, Union[float, np.ndarray]]


@dataclass(frozen=True)
class NoiseSpec:
    kind: Literal["normal", "uniform", "laplace"] = "normal"
    loc: float = 0.0
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.scale < 0:
            raise DomainError("noise scale must be non-negative", scale=self.scale)

    def draw(self, rng: Rng, n: int) -> np.ndarray:
        if self.kind == "normal":
            return self.loc + self.scale * rng.standard_normal(n)
        if self.kind == "uniform":
            return self.loc + self.scale * rng.random(n)
        return rng.laplace(self.loc, self.scale, n)

    def shifted(self, shift: float) -> "NoiseSpec":
        return NoiseSpec(self.kind, self.loc + shift, self.scale)


STANDARD_NORMAL = NoiseSpec()
UNIT_UNIFORM = NoiseSpec("uniform", 0.0, 1.0)


class Mechanism:
    """Structural assignment ``X_j = f_j(parents, noise)``.

    ``parents`` names the inputs; ``__call__`` receives a mapping from those
    names to arrays of equal length plus the node's noise draw.
    """

    template: Optional[str] = None
    parents: Tuple[str, ...] = ()

    def __call__(self, parents: Mapping[str, np.ndarray], noise: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def params(self) -> Dict[str, Any]:
        raise SimulationError(f"{type(self).__name__} has no serializable template")


@dataclass(frozen=True)
class Linear(Mechanism):
    coefficients: Mapping[str, float] = field(default_factory=dict)
    intercept: float = 0.0
    template = "linear"

    @property  # type: ignore[override]
    def parents(self) -> Tuple[str, ...]:
        return tuple(self.coefficients)

    def __call__(self, parents: Mapping[str, np.ndarray], noise: np.ndarray) -> np.ndarray:
        out = self.intercept + noise
        for name, coef in self.coefficients.items():
            out = out + coef * parents[name]
        return out

    def params(self) -> Dict[str, Any]:
        return {"coefficients": dict(self.coefficients), "intercept": self.intercept}


def soft_transform(x: np.ndarray, weight: float) -> np.ndarray:
    """Softly nonlinear edge transform: linear, tanh and bounded even terms."""
    t = np.tanh(x)
    return weight * (0.5 * x + t) + 0.25 * abs(weight) * t * t


@dataclass(frozen=True)
class SoftNonlinear(Mechanism):
    """Sum of per-parent soft transforms with additive or multiplicative noise.

    Root nodes (no parents) are pure noise in both variants; otherwise the
    multiplicative form scales the parent sum by ``exp(noise)``.
    """

    weights: Mapping[str, float] = field(default_factory=dict)
    multiplicative: bool = False

    @property  # type: ignore[override]
    def parents(self) -> Tuple[str, ...]:
        return tuple(self.weights)

    @property  # type: ignore[override]
    def template(self) -> str:
        return "soft_nonlinear_mult" if self.multiplicative else "soft_nonlinear"

    def __call__(self, parents: Mapping[str, np.ndarray], noise: np.ndarray) -> np.ndarray:
        if not self.weights:
            return np.array(noise, dtype=np.float64, copy=True)
        total = np.zeros_like(noise, dtype=np.float64)
        for name, w in self.weights.items():
            total = total + soft_transform(parents[name], w)
        return total * np.exp(noise) if self.multiplicative else total + noise

    def params(self) -> Dict[str, Any]:
        return {"weights": dict(self.weights)}


@dataclass(frozen=True)
class LogisticTreatment(Mechanism):
    """Binary node: ``1{u < floor + span * expit(intercept + sum c_i x_i)}`` with ``u ~ U(0,1)``."""

    coefficients: Mapping[str, float] = field(default_factory=dict)
    intercept: float = 0.0
    floor: float = 0.1
    span: float = 0.8
    template = "logistic_treatment"

    @property  # type: ignore[override]
    def parents(self) -> Tuple[str, ...]:
        return tuple(self.coefficients)

    def propensity(self, parents: Mapping[str, np.ndarray], n: int) -> np.ndarray:
        lin = np.full(n, self.intercept, dtype=np.float64)
        for name, coef in self.coefficients.items():
            lin = lin + coef * parents[name]
        return self.floor + self.span * expit(lin)

    def __call__(self, parents: Mapping[str, np.ndarray], noise: np.ndarray) -> np.ndarray:
        return (noise < self.propensity(parents, noise.shape[0])).astype(np.float64)

    def params(self) -> Dict[str, Any]:
        return {
            "coefficients": dict(self.coefficients),
            "intercept": self.intercept,
            "floor": self.floor,
            "span": self.span,
        }


class FunctionMechanism(Mechanism):
    """Mechanism given as a vectorized Python function of named parents and noise."""

    def __init__(
        self,
        parents: Tuple[str, ...],
        fn: Callable[[Mapping[str, np.ndarray], np.ndarray], np.ndarray],
        description: str = "",
    ):
        self.parents = tuple(parents)
        self.fn = fn
        self.description = description

    def __call__(self, parents: Mapping[str, np.ndarray], noise: np.ndarray) -> np.ndarray:
        return self.fn(parents, noise)

    def __repr__(self) -> str:
        return f"FunctionMechanism({self.description or self.fn!r})"


class Scm:
    """Structural causal model over a DAG.

    Hidden nodes are simulated like observed ones and returned separately
    from the emitted dataset.
    """

    def __init__(
        self,
        dag: Dag,
        mechanisms: Mapping[str, Mechanism],
        noises: Optional[Mapping[str, NoiseSpec]] = None,
        treatment: Optional[str] = None,
        outcome: Optional[str] = None,
        name: str = "scm",
    ):
        noises = dict(noises or {})
        for node in dag.labels:
            if node not in mechanisms:
                raise GraphError(f"no mechanism for node {node}")
            declared = set(mechanisms[node].parents)
            actual = set(dag.parents(node))
            if declared != actual:
                raise GraphError(
                    f"mechanism of {node} uses parents {sorted(declared)} but the graph has {sorted(actual)}",
                    node=node,
                )
            noises.setdefault(node, STANDARD_NORMAL)
        for role, node in (("treatment", treatment), ("outcome", outcome)):
            if node is not None:
                dag.check_node(node)
                if dag.is_hidden(node):
                    raise GraphError(f"{role} node {node} cannot be hidden")
        self.dag = dag
        self.mechanisms: Dict[str, Mechanism] = dict(mechanisms)
        self.noises: Dict[str, NoiseSpec] = {k: noises[k] for k in dag.labels}
        self.treatment = treatment
        self.outcome = outcome
        self.name = name

    def __repr__(self) -> str:
        return f"Scm(name={self.name!r}, dag={self.dag!r})"

    @property
    def covariates(self) -> List[str]:
        """Observed nodes other than treatment and outcome, in label order."""
        return [n for n in self.dag.observed if n not in (self.treatment, self.outcome)]

    def draw_noise(self, n: int, rng: Rng) -> Values:
        """Exogenous draws for every node, consumed in topological order."""
        return {node: self.noises[node].draw(rng, n) for node in self.dag.topological_order()}

    def evaluate(self, noise: Mapping[str, np.ndarray], interventions: Optional[Intervention] = None) -> Values:
        """Propagate exogenous draws through the mechanisms.

        ``interventions`` replaces the mechanism of each named node by a
        constant (or a per-row array), the do-operator.
        """
        interventions = interventions or {}
        for node in interventions:
            self.dag.check_node(node)
        n = len(next(iter(noise.values())))
        values: Values = {}
        for node in self.dag.topological_order():
            if node in interventions:
                values[node] = np.broadcast_to(np.asarray(interventions[node], dtype=np.float64), (n,)).copy()
                continue
            mech = self.mechanisms[node]
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                value = np.asarray(mech({p: values[p] for p in mech.parents}, noise[node]), dtype=np.float64)
            if value.shape != (n,):
                raise SimulationError(f"mechanism of {node} returned shape {value.shape}", node=node)
            if not np.all(np.isfinite(value)):
                raise SimulationError(f"mechanism of {node} produced non-finite values", node=node)
            values[node] = value
        return values

    def sample(self, n: int, rng: Rng, interventions: Optional[Intervention] = None) -> Values:
        return self.evaluate(self.draw_noise(n, rng), interventions)


@dataclass(frozen=True)
class SimulationResult:
    dataset: ObservationalDataset
    hidden: np.ndarray
    hidden_names: Tuple[str, ...]
    values: Mapping[str, np.ndarray]

    def matrix(self, nodes: List[str]) -> np.ndarray:
        return np.column_stack([self.values[n] for n in nodes])


def simulate(scm: Scm, n: int, rng: Rng) -> SimulationResult:
    """Draw ``n`` i.i.d. rows; hidden node values are kept out of the dataset."""
    if n < 1:
        raise DomainError("n must be at least 1", n=n)
    values = scm.sample(n, rng)
    covariates = scm.covariates
    X = np.column_stack([values[c] for c in covariates]) if covariates else np.empty((n, 0))
    dataset = ObservationalDataset(
        X=X,
        D=None if scm.treatment is None else values[scm.treatment],
        Y=None if scm.outcome is None else values[scm.outcome],
        columns=tuple(covariates),
    )
    hidden_names = tuple(h for h in scm.dag.labels if scm.dag.is_hidden(h))
    hidden = np.column_stack([values[h] for h in hidden_names]) if hidden_names else np.empty((n, 0))
    logger.debug("Simulated %d rows from %s", n, scm.name)
    return SimulationResult(dataset, hidden, hidden_names, values)
