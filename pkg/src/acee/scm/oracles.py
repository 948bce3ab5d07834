"""Interventional ground truth computed from known mechanisms.

All oracles couple the two intervention arms through common random numbers:
both arms propagate the same exogenous draws, so contrasts carry only the
variation the intervention itself induces.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from ..numerics.random import Rng
from ..utils.error_handling import DimensionMismatch, DomainError, ErrorContext, GraphError
from .model import Scm, Values

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InterventionQuery:
    """Contrast ``do(k = x1)`` against ``do(k = x0)`` on node ``j``."""

    k: str
    j: str
    x1: float = 1.0
    x0: float = 0.0
    draws: int = 10_000

    def __post_init__(self) -> None:
        if self.k == self.j:
            raise GraphError("treatment and target node must differ", node=self.k)
        if self.draws < 1:
            raise DomainError("draw count must be at least 1", draws=self.draws)


@dataclass(frozen=True)
class OracleEstimate:
    estimate: float
    std_error: float
    draws: int

    def __float__(self) -> float:
        return self.estimate


def _check_query(scm: Scm, query: InterventionQuery) -> None:
    scm.dag.check_node(query.k)
    scm.dag.check_node(query.j)
    if query.j in scm.dag.ancestors(query.k):
        raise GraphError(f"{query.k} comes after {query.j} in every causal order", k=query.k, j=query.j)


def _summarize(contrasts: np.ndarray) -> OracleEstimate:
    n = contrasts.shape[0]
    se = float(np.std(contrasts, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return OracleEstimate(float(np.mean(contrasts)), se, n)


def do_total_effect(scm: Scm, query: InterventionQuery, rng: Rng) -> OracleEstimate:
    """Monte Carlo ``E[X_j | do(k=x1)] - E[X_j | do(k=x0)]``."""
    _check_query(scm, query)
    with ErrorContext(f"do_total_effect {query.k}->{query.j}"):
        noise = scm.draw_noise(query.draws, rng)
        treated = scm.evaluate(noise, {query.k: query.x1})[query.j]
        control = scm.evaluate(noise, {query.k: query.x0})[query.j]
    return _summarize(treated - control)


def _nested_noise(scm: Scm, k: str, outer: int, inner: int, rng: Rng) -> Values:
    """Noise with non-descendants of ``k`` shared across ``inner`` mediator draws."""
    noise = scm.draw_noise(outer * inner, rng)
    downstream = scm.dag.descendants(k)
    for node in scm.dag.labels:
        if node not in downstream:
            noise[node] = np.repeat(noise[node][::inner], inner)
    return noise


def _evaluate_target(scm: Scm, j: str, values: Values, noise: Values, k: str, level: float) -> np.ndarray:
    mech = scm.mechanisms[j]
    n = noise[j].shape[0]
    inputs = {p: (np.full(n, level) if p == k else values[p]) for p in mech.parents}
    return np.asarray(mech(inputs, noise[j]), dtype=np.float64)


def _group_means(contrasts: np.ndarray, inner: int) -> np.ndarray:
    return contrasts.reshape(-1, inner).mean(axis=1)


def do_direct_effect(scm: Scm, query: InterventionQuery, rng: Rng, mediator_draws: int = 1) -> OracleEstimate:
    """Effect of moving ``k`` from x0 to x1 in ``X_j``'s own mechanism, mediators held at their x0 law.

    ``query.draws`` outer draws of the exogenous non-descendants of ``k``; for
    each, ``mediator_draws`` draws of the downstream noise. Only ``X_j`` is
    re-evaluated, so the coupling with the total and indirect oracles is
    exact under shared seeds.
    """
    _check_query(scm, query)
    if mediator_draws < 1:
        raise DomainError("mediator_draws must be at least 1", mediator_draws=mediator_draws)
    with ErrorContext(f"do_direct_effect {query.k}->{query.j}"):
        noise = _nested_noise(scm, query.k, query.draws, mediator_draws, rng)
        base = scm.evaluate(noise, {query.k: query.x0})
        moved = _evaluate_target(scm, query.j, base, noise, query.k, query.x1)
        contrasts = moved - base[query.j]
    return _summarize(_group_means(contrasts, mediator_draws))


def do_indirect_effect(scm: Scm, query: InterventionQuery, rng: Rng, mediator_draws: int = 1) -> OracleEstimate:
    """Effect of moving the mediators from their x0 law to their x1 law, ``X_j``'s own ``k`` input held at x0."""
    _check_query(scm, query)
    if mediator_draws < 1:
        raise DomainError("mediator_draws must be at least 1", mediator_draws=mediator_draws)
    with ErrorContext(f"do_indirect_effect {query.k}->{query.j}"):
        noise = _nested_noise(scm, query.k, query.draws, mediator_draws, rng)
        shifted = scm.evaluate(noise, {query.k: query.x1})
        base = scm.evaluate(noise, {query.k: query.x0})
        moved = _evaluate_target(scm, query.j, shifted, noise, query.k, query.x0)
        contrasts = moved - base[query.j]
    return _summarize(_group_means(contrasts, mediator_draws))


def linear_total_effect(V: np.ndarray, k: int, j: int) -> float:
    """Path-sum total effect ``[(I - V)^{-1}]_{kj}`` for ``X = V^T X + e`` (``V[a, b]`` weights edge a->b)."""
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 2 or V.shape[0] != V.shape[1]:
        raise DimensionMismatch("V must be square", shape=list(V.shape))
    return float(np.linalg.inv(np.eye(V.shape[0]) - V)[k, j])


def conditional_mean_given_hidden(
    scm: Scm, hidden: np.ndarray, rng: Rng, draws: int = 200, nodes: Optional[Sequence[str]] = None
) -> np.ndarray:
    """``E[Z | H]`` per row of ``hidden`` by re-simulation with the hidden sources clamped.

    ``nodes`` defaults to the dataset layout: covariates, then treatment and
    outcome when present.
    """
    hidden_names = [h for h in scm.dag.labels if scm.dag.is_hidden(h)]
    hidden = np.asarray(hidden, dtype=np.float64)
    if hidden.ndim != 2 or hidden.shape[1] != len(hidden_names):
        raise DimensionMismatch("hidden matrix does not match the hidden nodes", hidden=hidden_names)
    for h in hidden_names:
        if scm.dag.parents(h):
            raise GraphError(f"hidden node {h} has parents; clamping only conditions on hidden sources")
    if nodes is None:
        nodes = scm.covariates + [n for n in (scm.treatment, scm.outcome) if n is not None]
    n = hidden.shape[0]
    clamp = {h: np.repeat(hidden[:, i], draws) for i, h in enumerate(hidden_names)}
    values = scm.sample(n * draws, rng, clamp)
    return np.column_stack([values[node].reshape(n, draws).mean(axis=1) for node in nodes])


class OutcomeMechanismGenerator:
    """Conditional generator that samples a target node from the true model.

    Each conditioning column is mapped to a node name (or ``None`` to ignore
    it, e.g. proxy columns). Mapped nodes are clamped to the supplied values
    and every other node is drawn from its mechanism; this equals the true
    conditional law when the mapped nodes form a prefix of the causal order
    that includes every parent of the target. ``treated_offset`` adds a
    constant to draws whose ``treatment`` column equals 1, giving a
    deliberately miscalibrated generator.
    """

    def __init__(
        self,
        scm: Scm,
        columns: Sequence[Optional[str]],
        target: Optional[str] = None,
        treated_offset: float = 0.0,
    ):
        target = target or scm.outcome
        if target is None:
            raise GraphError("no target node given and the model has no outcome")
        for c in columns:
            if c is not None:
                scm.dag.check_node(c)
        self.scm = scm
        self.columns: List[Optional[str]] = list(columns)
        self.target = target
        self.treated_offset = treated_offset

    def sample(self, conds: np.ndarray, m: int, rngs: Sequence[Rng]) -> np.ndarray:
        conds = np.atleast_2d(np.asarray(conds, dtype=np.float64))
        if conds.shape[1] != len(self.columns):
            raise DimensionMismatch("conditioning width does not match the column map", width=conds.shape[1])
        b = conds.shape[0]
        if len(rngs) != b:
            raise DimensionMismatch("need one random stream per conditioning row")
        if m == 0 or b == 0:
            return np.empty((b, m))
        per_unit = [self.scm.draw_noise(m, r) for r in rngs]
        noise = {node: np.concatenate([u[node] for u in per_unit]) for node in self.scm.dag.labels}
        clamp = {node: np.repeat(conds[:, i], m) for i, node in enumerate(self.columns) if node is not None}
        draws = self.scm.evaluate(noise, clamp)[self.target].reshape(b, m)
        if self.treated_offset and self.scm.treatment in self.columns:
            col = self.columns.index(self.scm.treatment)
            draws = draws + self.treated_offset * (conds[:, col] == 1.0)[:, None]
        return draws
