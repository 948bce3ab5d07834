"""Directed acyclic graphs with hidden-node flags."""

from typing import FrozenSet, Iterable, List, Sequence, Set, Tuple

import networkx as nx

from ..utils.error_handling import GraphError


class Dag:
    """Immutable DAG over labelled nodes, some of which may be hidden.

    Node order in ``labels`` is the canonical order used to break ties, so
    ``topological_order`` and ``parents`` are deterministic.
    """

    def __init__(self, labels: Sequence[str], edges: Iterable[Tuple[str, str]], hidden: Iterable[str] = ()):
        labels = list(labels)
        if len(set(labels)) != len(labels):
            raise GraphError("duplicate node labels", labels=labels)
        known = set(labels)
        graph = nx.DiGraph()
        graph.add_nodes_from(labels)
        for parent, child in edges:
            if parent not in known or child not in known:
                raise GraphError(f"edge {parent}->{child} references an unknown node")
            if parent == child:
                raise GraphError(f"self-loop on {parent}")
            graph.add_edge(parent, child)
        if not nx.is_directed_acyclic_graph(graph):
            cycle = nx.find_cycle(graph)
            raise GraphError("graph contains a cycle", cycle=[list(e) for e in cycle])
        hidden_set = frozenset(hidden)
        if not hidden_set <= known:
            raise GraphError("hidden flag on an unknown node", nodes=sorted(hidden_set - known))

        self._labels: Tuple[str, ...] = tuple(labels)
        self._index = {label: i for i, label in enumerate(labels)}
        self._hidden = hidden_set
        self._graph = nx.freeze(graph)
        self._order = tuple(nx.lexicographical_topological_sort(graph, key=self._index.__getitem__))

    def __repr__(self) -> str:
        return f"Dag(nodes={list(self._labels)}, edges={self.edges}, hidden={sorted(self._hidden)})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dag):
            return NotImplemented
        return (
            self._labels == other._labels
            and set(self.edges) == set(other.edges)
            and self._hidden == other._hidden
        )

    def __hash__(self) -> int:
        return hash((self._labels, frozenset(self.edges), self._hidden))

    @property
    def graph(self) -> nx.DiGraph:
        """Frozen networkx view."""
        return self._graph

    @property
    def labels(self) -> Tuple[str, ...]:
        return self._labels

    @property
    def hidden(self) -> FrozenSet[str]:
        return self._hidden

    @property
    def observed(self) -> List[str]:
        return [n for n in self._labels if n not in self._hidden]

    @property
    def edges(self) -> List[Tuple[str, str]]:
        return sorted(self._graph.edges, key=lambda e: (self._index[e[0]], self._index[e[1]]))

    def is_hidden(self, node: str) -> bool:
        return node in self._hidden

    def check_node(self, node: str) -> str:
        if node not in self._index:
            raise GraphError(f"unknown node {node!r}")
        return node

    def parents(self, node: str) -> List[str]:
        self.check_node(node)
        return sorted(self._graph.predecessors(node), key=self._index.__getitem__)

    def children(self, node: str) -> List[str]:
        self.check_node(node)
        return sorted(self._graph.successors(node), key=self._index.__getitem__)

    def ancestors(self, node: str) -> Set[str]:
        return set(nx.ancestors(self._graph, self.check_node(node)))

    def descendants(self, node: str) -> Set[str]:
        return set(nx.descendants(self._graph, self.check_node(node)))

    def topological_order(self) -> List[str]:
        """Topological order, ties broken by label position."""
        return list(self._order)

    def observed_order(self) -> List[str]:
        return [n for n in self._order if n not in self._hidden]

    def index(self, node: str) -> int:
        return self._index[self.check_node(node)]
