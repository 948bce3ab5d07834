"""Graph criteria: d-separation, back-door admissibility, latent projection."""

import logging
from typing import Dict, FrozenSet, Iterable, List, Set, Tuple

import networkx as nx

from ..utils.error_handling import GraphError
from .dag import Dag

logger = logging.getLogger(__name__)


def _node_set(dag: Dag, nodes: Iterable[str]) -> Set[str]:
    return {dag.check_node(n) for n in nodes}


def d_separated(dag: Dag, a: Iterable[str], b: Iterable[str], cond: Iterable[str] = ()) -> bool:
    """True iff ``cond`` blocks every path between ``a`` and ``b``."""
    a_set, b_set, c_set = _node_set(dag, a), _node_set(dag, b), _node_set(dag, cond)
    if not a_set or not b_set:
        raise GraphError("node sets a and b must be non-empty")
    if a_set & b_set or a_set & c_set or b_set & c_set:
        raise GraphError(
            "node sets must be disjoint",
            overlap=sorted((a_set & b_set) | (a_set & c_set) | (b_set & c_set)),
        )
    return bool(nx.is_d_separator(dag.graph, a_set, b_set, c_set))


def is_admissible(dag: Dag, k: str, j: str, s: Iterable[str]) -> bool:
    """Back-door criterion for the effect of ``k`` on ``j``.

    ``s`` must contain no descendant of ``k`` and must block every path from
    ``k`` to ``j`` that starts with an edge into ``k``.
    """
    dag.check_node(k)
    dag.check_node(j)
    if k == j:
        raise GraphError("k and j must differ", node=k)
    if j in dag.ancestors(k):
        raise GraphError(f"{k} does not precede {j} in any causal order", k=k, j=j)
    s_set = _node_set(dag, s)
    if s_set & {k, j}:
        raise GraphError("adjustment set may not contain k or j", overlap=sorted(s_set & {k, j}))
    if s_set & dag.descendants(k):
        return False
    pruned = nx.DiGraph(dag.graph)
    pruned.remove_edges_from(list(pruned.out_edges(k)))
    return bool(nx.is_d_separator(pruned, {k}, {j}, s_set))


def _hidden_reach(dag: Dag, start: str) -> Set[str]:
    """Observed nodes reachable from ``start`` by directed paths whose intermediates are all hidden."""
    reached: Set[str] = set()
    stack = list(dag.children(start))
    seen: Set[str] = set()
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        if dag.is_hidden(node):
            stack.extend(dag.children(node))
        else:
            reached.add(node)
    return reached


def canonical_exogenous_dag(dag: Dag) -> Dag:
    """Project ``dag`` onto one where every hidden node is a source.

    Observed ``X_i -> X_j`` is kept iff a directed path from ``X_i`` to ``X_j``
    runs only through hidden intermediates (a direct edge counts). Each
    maximal set of two or more observed nodes sharing a hidden common cause
    gets a fresh hidden source ``H<k>``.
    """
    if not nx.is_directed_acyclic_graph(dag.graph):
        raise GraphError("input graph is cyclic")
    observed = dag.observed
    if not dag.hidden:
        return Dag(dag.labels, dag.edges, ())

    edges: List[Tuple[str, str]] = []
    for node in observed:
        for child in sorted(_hidden_reach(dag, node), key=dag.index):
            edges.append((node, child))

    position = {n: i for i, n in enumerate(observed)}
    common: Set[FrozenSet[str]] = set()
    for h in dag.hidden:
        reach = frozenset(_hidden_reach(dag, h))
        if len(reach) >= 2:
            common.add(reach)
    maximal = [c for c in common if not any(c < other for other in common)]
    maximal.sort(key=lambda c: tuple(sorted(position[n] for n in c)))

    used = set(observed)
    labels = list(observed)
    hidden_new: List[str] = []
    counter = 1
    for members in maximal:
        name = f"H{counter}"
        while name in used:
            counter += 1
            name = f"H{counter}"
        counter += 1
        used.add(name)
        labels.append(name)
        hidden_new.append(name)
        edges.extend((name, m) for m in sorted(members, key=position.__getitem__))

    stats: Dict[str, int] = {"hidden_nodes": len(dag.hidden), "sources_created": len(hidden_new)}
    logger.debug("Canonical exogenous projection: %s", stats)
    return Dag(labels, edges, hidden_new)
