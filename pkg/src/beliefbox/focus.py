"""Chordal decomposition of the network for per-clique elicitation.

The joint over all variables quickly becomes too large to elicit against
directly; after moralization and triangulation the joint factorizes over the
maximal cliques of the resulting chordal graph, and each clique can host its
own (much smaller) elicitation session. Families (a variable with its direct
predecessors) always end up inside a single clique, so no causal mechanism is
split across sessions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .model import Network
from .statements import (
    AdditiveSynergy,
    Comparison,
    Finding,
    Influence,
    ProductSynergy,
    Statement,
)


class NotChordalError(ValueError):
    """extract_cliques was handed a non-chordal graph."""


@dataclass
class UndirectedGraph:
    """Nodes in declaration order plus an undirected adjacency structure."""

    nodes: tuple[str, ...]
    edges: frozenset[frozenset[str]]

    def __post_init__(self) -> None:
        for e in self.edges:
            if len(e) != 2:
                raise ValueError("edges must join two distinct nodes")
        self._adj: dict[str, set[str]] = {n: set() for n in self.nodes}
        for e in self.edges:
            a, b = tuple(e)
            self._adj[a].add(b)
            self._adj[b].add(a)

    def neighbors(self, node: str) -> set[str]:
        return self._adj[node]

    def has_edge(self, a: str, b: str) -> bool:
        return b in self._adj.get(a, ())


def _mk_graph(nodes: Sequence[str], pairs: Iterable[tuple[str, str]]) -> UndirectedGraph:
    edges = frozenset(frozenset(p) for p in pairs if p[0] != p[1])
    return UndirectedGraph(tuple(nodes), edges)


def moralize(network: Network) -> UndirectedGraph:
    """Undirected skeleton plus marriages between co-parents of each child."""
    pairs: list[tuple[str, str]] = list(network.edges)
    for v in network.variables:
        parents = network.parents(v.name)
        for i in range(len(parents)):
            for j in range(i + 1, len(parents)):
                pairs.append((parents[i], parents[j]))
    return _mk_graph([v.name for v in network.variables], pairs)


def _mcs_order(graph: UndirectedGraph) -> list[str]:
    """Maximum cardinality search visit order, ties broken by node order."""
    rank = {n: i for i, n in enumerate(graph.nodes)}
    weight = {n: 0 for n in graph.nodes}
    unvisited = set(graph.nodes)
    order: list[str] = []
    while unvisited:
        best = min(unvisited, key=lambda n: (-weight[n], rank[n]))
        order.append(best)
        unvisited.remove(best)
        for nb in graph.neighbors(best):
            if nb in unvisited:
                weight[nb] += 1
    return order


def _fill_edges(graph: UndirectedGraph, order: Sequence[str]) -> set[frozenset[str]]:
    """Fill-in needed to make `order` (reversed) a perfect elimination order.

    Works on a growing adjacency copy: eliminating the latest-visited node
    first, the earlier-visited neighbors of each node must form a clique.
    """
    pos = {n: i for i, n in enumerate(order)}
    adj = {n: set(graph.neighbors(n)) for n in graph.nodes}
    fill: set[frozenset[str]] = set()
    for v in reversed(order):
        earlier = sorted((u for u in adj[v] if pos[u] < pos[v]), key=pos.__getitem__)
        for i in range(len(earlier)):
            for j in range(i + 1, len(earlier)):
                a, b = earlier[i], earlier[j]
                if b not in adj[a]:
                    adj[a].add(b)
                    adj[b].add(a)
                    fill.add(frozenset((a, b)))
    return fill


@dataclass
class Triangulation:
    graph: UndirectedGraph
    order: tuple[str, ...]
    fill_edges: frozenset[frozenset[str]]


def triangulate(graph: UndirectedGraph) -> Triangulation:
    """Maximum cardinality search plus fill-in; chordal output, recorded order."""
    order = _mcs_order(graph)
    fill = _fill_edges(graph, order)
    edges = frozenset(set(graph.edges) | fill)
    out = UndirectedGraph(graph.nodes, edges)
    return Triangulation(out, tuple(order), frozenset(fill))


def is_chordal(graph: UndirectedGraph) -> bool:
    """Zero fill-in under maximum cardinality search."""
    return not _fill_edges(graph, _mcs_order(graph))


@dataclass
class CliqueSet:
    cliques: tuple[frozenset[str], ...]
    elimination_order: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.cliques)


def extract_cliques(graph: UndirectedGraph, order: Sequence[str]) -> CliqueSet:
    """Maximal cliques of a chordal graph from its elimination order, arranged
    to satisfy the running-intersection property."""
    if _fill_edges(graph, order):
        raise NotChordalError("graph is not chordal under the given order")
    pos = {n: i for i, n in enumerate(order)}
    candidates: list[frozenset[str]] = []
    for v in order:
        c = frozenset({v} | {u for u in graph.neighbors(v) if pos[u] < pos[v]})
        candidates.append(c)
    maximal: list[frozenset[str]] = []
    for c in candidates:
        if any(c < other for other in candidates):
            continue
        if c not in maximal:
            maximal.append(c)
    # ascending highest-visit-rank order gives running intersection in a
    # chordal graph
    maximal.sort(key=lambda c: max(pos[n] for n in c))
    return CliqueSet(tuple(maximal), tuple(order))


def has_running_intersection(cliqueset: CliqueSet) -> bool:
    cliques = cliqueset.cliques
    for i in range(1, len(cliques)):
        seen = set().union(*cliques[:i])
        shared = cliques[i] & seen
        if shared and not any(shared <= earlier for earlier in cliques[:i]):
            return False
    return True


def family_check(network: Network, cliqueset: CliqueSet) -> bool:
    """True iff every variable plus its direct predecessors fits in one clique."""
    for v in network.variables:
        family = {v.name, *network.parents(v.name)}
        if not any(family <= c for c in cliqueset.cliques):
            return False
    return True


def decompose(network: Network) -> tuple[Triangulation, CliqueSet]:
    tri = triangulate(moralize(network))
    return tri, extract_cliques(tri.graph, tri.order)


def clique_network(network: Network, clique: frozenset[str]) -> Network:
    """Sub-network induced by one clique, for a per-clique session.

    Keeps declaration order and only the edges with both endpoints inside.
    """
    variables = [v for v in network.variables if v.name in clique]
    edges = [(a, b) for a, b in network.edges if a in clique and b in clique]
    return Network(variables, edges)


def statement_variables(stmt: Statement, network: Network) -> frozenset[str]:
    """Variables a statement mentions (for clique assignment)."""
    body = stmt.body
    if isinstance(body, Influence):
        return frozenset((body.source, body.target))
    if isinstance(body, AdditiveSynergy):
        return frozenset((*body.pair, body.target))
    if isinstance(body, ProductSynergy):
        return frozenset((*body.pair, network.value_variable(body.effect_value)))
    if isinstance(body, Comparison):
        out: set[str] = set()
        for term in (body.term1, body.term2):
            out |= term.event1.variables
            if term.event2 is not None:
                out |= term.event2.variables
        return frozenset(out)
    out = set(body.event.variables) if hasattr(body, "event") else set()
    if hasattr(body, "event1"):
        out |= body.event1.variables | body.event2.variables
    return frozenset(out)


def cross_clique_findings(
    statements: Sequence[Statement], network: Network, cliqueset: CliqueSet
) -> list[Finding]:
    """Statements not contained in any single clique, reported against every
    clique they touch (they are surfaced, not split)."""
    findings = []
    for stmt in statements:
        used = statement_variables(stmt, network)
        if not used or any(used <= c for c in cliqueset.cliques):
            continue
        touched = [i for i, c in enumerate(cliqueset.cliques) if used & c]
        findings.append(
            Finding(
                "warning",
                "cross-clique-statement",
                "statement spans cliques "
                + ", ".join("{" + ", ".join(sorted(cliqueset.cliques[i])) + "}" for i in touched),
                stmt.id,
            )
        )
    return findings
