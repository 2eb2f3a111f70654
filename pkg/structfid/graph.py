"""
Causal graphs and d-separation.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import FrozenSet, Iterable, List, Sequence, Tuple

import networkx as nx

from .exceptions import CycleDetected, InvalidNode, InvalidSpec, OverlappingSet

logger = logging.getLogger(__name__)

# networkx 3.3 renamed d_separated to is_d_separator.
_is_d_separator = getattr(nx, "is_d_separator", None) or nx.d_separated


@dataclass(frozen=True)
class CausalGraph:
    """
    Directed acyclic graph over variable indices ``0 .. node_count - 1``.

    ``parents[v]`` is the sorted tuple of parents of node ``v``.
    """

    node_count: int
    parents: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if self.node_count < 0:
            raise InvalidSpec(f"node_count must be non-negative, got {self.node_count}")
        if len(self.parents) != self.node_count:
            raise InvalidSpec(
                f"Expected parent sets for {self.node_count} nodes, got {len(self.parents)}"
            )
        normalised = []
        for node, parent_set in enumerate(self.parents):
            parent_set = tuple(parent_set)
            for p in parent_set:
                if not 0 <= p < self.node_count:
                    raise InvalidNode(f"Parent {p} of node {node} is out of range")
                if p == node:
                    raise InvalidSpec(f"Node {node} lists itself as a parent")
            if len(set(parent_set)) != len(parent_set):
                raise InvalidSpec(f"Duplicate edge into node {node}")
            normalised.append(tuple(sorted(parent_set)))
        object.__setattr__(self, "parents", tuple(normalised))
        # Acyclicity is part of the type.
        topological_order(self)

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[Sequence[int]]) -> "CausalGraph":
        """
        Build a graph from ``(parent, child)`` pairs.
        """
        parents: List[List[int]] = [[] for _ in range(node_count)]
        for edge in edges:
            parent, child = edge
            if not 0 <= child < node_count:
                raise InvalidNode(f"Child {child} is out of range")
            parents[child].append(parent)
        return cls(node_count, tuple(tuple(p) for p in parents))

    @property
    def edges(self) -> List[Tuple[int, int]]:
        return [(p, child) for child, ps in enumerate(self.parents) for p in ps]

    @cached_property
    def digraph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(self.node_count))
        g.add_edges_from(self.edges)
        return g

    @cached_property
    def children(self) -> Tuple[Tuple[int, ...], ...]:
        kids: List[List[int]] = [[] for _ in range(self.node_count)]
        for parent, child in self.edges:
            kids[parent].append(child)
        return tuple(tuple(sorted(k)) for k in kids)

    @cached_property
    def _ancestor_sets(self) -> Tuple[FrozenSet[int], ...]:
        return tuple(frozenset(nx.ancestors(self.digraph, v)) for v in range(self.node_count))

    @cached_property
    def _descendant_sets(self) -> Tuple[FrozenSet[int], ...]:
        return tuple(frozenset(nx.descendants(self.digraph, v)) for v in range(self.node_count))

    def ancestors(self, node: int) -> FrozenSet[int]:
        self.check_node(node)
        return self._ancestor_sets[node]

    def descendants(self, node: int) -> FrozenSet[int]:
        self.check_node(node)
        return self._descendant_sets[node]

    def check_node(self, node: int):
        if not 0 <= node < self.node_count:
            raise InvalidNode(f"Node {node} is out of range [0, {self.node_count})")

    def relabel(self, permutation: Sequence[int]) -> "CausalGraph":
        """
        Rename node ``v`` to ``permutation[v]``.
        """
        if sorted(permutation) != list(range(self.node_count)):
            raise InvalidSpec("Relabelling must be a permutation of the node indices")
        return CausalGraph.from_edges(
            self.node_count, [(permutation[p], permutation[c]) for p, c in self.edges]
        )


def topological_order(graph: CausalGraph) -> List[int]:
    """
    Order nodes so that every node follows all of its parents.

    Ties are broken by ascending node index.

    Raises:
        CycleDetected: if the graph has a directed cycle
    """
    try:
        return list(nx.lexicographical_topological_sort(graph.digraph))
    except nx.NetworkXUnfeasible as e:
        raise CycleDetected(f"Graph contains a directed cycle: {e}") from e


def is_d_separated(graph: CausalGraph, j: int, k: int, s: Iterable[int]) -> bool:
    """
    Decide whether ``s`` d-separates ``j`` and ``k``.

    Checked by networkx on the graph's DiGraph after the query is validated.

    Args:
        graph: Causal graph
        j: First node
        k: Second node
        s: Conditioning set

    Returns:
        True when no active trail connects ``j`` and ``k``
    """
    s = frozenset(s)
    for node in (j, k, *s):
        graph.check_node(node)
    if j == k:
        raise OverlappingSet(f"Query nodes must differ, got {j} twice")
    if j in s or k in s:
        raise OverlappingSet(f"Conditioning set {sorted(s)} intersects {{{j}, {k}}}")

    return _is_d_separator(graph.digraph, {j}, {k}, set(s))
