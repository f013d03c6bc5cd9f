"""Attributed position networks, mixing matrices and assortativity."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DegenerateMixing, EmptyMixingScope, GraphError

FILLED = "filled"
OPEN = "open"

TOL = 1e-9


@dataclass(frozen=True)
class Position:
    """A node of the organisational network.

    ``class_index`` is ``None`` only for open positions whose occupant is
    not yet decided.
    """

    id: str
    status: str = FILLED
    class_index: int | None = None
    team: str | None = None
    level: str | None = None

    @property
    def is_open(self) -> bool:
        return self.status == OPEN

    @property
    def resolved(self) -> bool:
        return self.class_index is not None


class AttributedGraph:
    """Immutable undirected graph of positions with categorical node classes.

    Node order is the order ``positions`` were given in; edges are stored
    once each, oriented so the endpoint listed first in node order comes
    first, and sorted by that order.
    """

    def __init__(
        self,
        positions: Iterable[Position],
        edges: Iterable[tuple[str, str]],
        k: int,
        class_labels: Sequence[str] | None = None,
    ):
        positions = tuple(positions)
        if k < 1:
            raise GraphError(f"k must be >= 1, got {k}")
        index: dict[str, int] = {}
        for i, p in enumerate(positions):
            if p.id in index:
                raise GraphError(f"duplicate node id {p.id!r}")
            if p.status not in (FILLED, OPEN):
                raise GraphError(f"node {p.id!r}: unknown status {p.status!r}")
            if p.class_index is None:
                if p.status == FILLED:
                    raise GraphError(f"filled node {p.id!r} has no class")
            elif not 0 <= p.class_index < k:
                raise GraphError(f"node {p.id!r}: class {p.class_index} outside [0, {k})")
            index[p.id] = i

        seen: set[tuple[int, int]] = set()
        for u, v in edges:
            if u not in index or v not in index:
                missing = u if u not in index else v
                raise GraphError(f"edge ({u!r}, {v!r}) references unknown node {missing!r}")
            if u == v:
                raise GraphError(f"self-loop on {u!r}")
            a, b = sorted((index[u], index[v]))
            if (a, b) in seen:
                raise GraphError(f"duplicate edge ({u!r}, {v!r})")
            seen.add((a, b))

        self.positions = positions
        self.k = k
        self.class_labels = tuple(class_labels) if class_labels is not None else None
        if self.class_labels is not None and len(self.class_labels) != k:
            raise GraphError("class_labels must have exactly k entries")
        self._index = index
        self._edge_index = np.array(sorted(seen), dtype=np.int64).reshape(-1, 2)
        nbrs: list[list[int]] = [[] for _ in positions]
        for a, b in self._edge_index.tolist():
            nbrs[a].append(b)
            nbrs[b].append(a)
        self._nbrs = tuple(tuple(sorted(x)) for x in nbrs)

    def _with_positions(self, positions: tuple[Position, ...]) -> "AttributedGraph":
        # Same ids in the same order, so the topology caches carry over.
        g = object.__new__(AttributedGraph)
        g.positions = positions
        g.k = self.k
        g.class_labels = self.class_labels
        g._index = self._index
        g._edge_index = self._edge_index
        g._nbrs = self._nbrs
        return g

    def with_classes(self, assignment: Mapping[str, int], status: str = FILLED) -> "AttributedGraph":
        """Return a copy where each id in ``assignment`` takes the given class and status."""
        positions = list(self.positions)
        for node_id, cls in assignment.items():
            i = self.index_of(node_id)
            if not 0 <= cls < self.k:
                raise GraphError(f"class {cls} outside [0, {self.k})")
            positions[i] = replace(positions[i], class_index=cls, status=status)
        return self._with_positions(tuple(positions))

    def with_k(self, k: int, classes: Sequence[int], class_labels=None) -> "AttributedGraph":
        """Relabel every node with ``classes`` (node order) under a new class count."""
        positions = [replace(p, class_index=int(c)) for p, c in zip(self.positions, classes)]
        return AttributedGraph(positions, self.edges, k, class_labels)

    # -- lookups ---------------------------------------------------------

    def __len__(self) -> int:
        return len(self.positions)

    def __contains__(self, node_id) -> bool:
        return node_id in self._index

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def node_ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.positions)

    @property
    def edges(self) -> list[tuple[str, str]]:
        ps = self.positions
        return [(ps[a].id, ps[b].id) for a, b in self._edge_index.tolist()]

    @property
    def n_edges(self) -> int:
        return len(self._edge_index)

    def index_of(self, node_id: str) -> int:
        try:
            return self._index[node_id]
        except KeyError:
            raise GraphError(f"unknown node id {node_id!r}") from None

    def position(self, node_id: str) -> Position:
        return self.positions[self.index_of(node_id)]

    def neighbors(self, node_id: str) -> list[str]:
        ps = self.positions
        return [ps[j].id for j in self._nbrs[self.index_of(node_id)]]

    def degree(self, node_id: str) -> int:
        return len(self._nbrs[self.index_of(node_id)])

    @property
    def open_ids(self) -> list[str]:
        return [p.id for p in self.positions if p.status == OPEN]

    @property
    def filled_ids(self) -> list[str]:
        return [p.id for p in self.positions if p.status == FILLED]

    def class_array(self, restrict_to_filled: bool = False) -> np.ndarray:
        """Per-node class indices in node order, -1 where unresolved (or open, if restricted)."""
        out = np.full(self.n, -1, dtype=np.int64)
        for i, p in enumerate(self.positions):
            if p.class_index is None or (restrict_to_filled and p.status != FILLED):
                continue
            out[i] = p.class_index
        return out

    def teams(self) -> dict[str, list[str]]:
        """Team id -> member ids, teams in first-appearance order. Nodes without a team are skipped."""
        out: dict[str, list[str]] = {}
        for p in self.positions:
            if p.team is not None:
                out.setdefault(p.team, []).append(p.id)
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, AttributedGraph):
            return NotImplemented
        return (
            self.positions == other.positions
            and self.k == other.k
            and np.array_equal(self._edge_index, other._edge_index)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"AttributedGraph(n={self.n}, edges={self.n_edges}, k={self.k}, open={len(self.open_ids)})"


@dataclass(frozen=True)
class MixingMatrix:
    """k x k matrix of edge-endpoint fractions, symmetric for undirected graphs."""

    entries: np.ndarray

    @property
    def k(self) -> int:
        return self.entries.shape[0]


def mixing_counts(graph: AttributedGraph, restrict_to_filled: bool = False) -> np.ndarray:
    """Symmetric k x k endpoint counts; an intra-class edge adds 2 to the diagonal."""
    cls = graph.class_array(restrict_to_filled)
    counts = np.zeros((graph.k, graph.k), dtype=np.int64)
    if graph.n_edges:
        a = cls[graph._edge_index[:, 0]]
        b = cls[graph._edge_index[:, 1]]
        keep = (a >= 0) & (b >= 0)
        np.add.at(counts, (a[keep], b[keep]), 1)
        np.add.at(counts, (b[keep], a[keep]), 1)
    return counts


def build_mixing_matrix(graph: AttributedGraph, restrict_to_filled: bool = False) -> MixingMatrix:
    """Mixing matrix over edges whose endpoints both carry a class.

    With ``restrict_to_filled`` edges touching open positions are ignored
    even if an open node carries a class, which gives the filled-only
    subgraph used for the before-assignment baseline.
    """
    counts = mixing_counts(graph, restrict_to_filled)
    total = counts.sum()
    if total == 0:
        raise EmptyMixingScope()
    return MixingMatrix(counts / total)


def assortativity(mix: MixingMatrix) -> float:
    """Newman's coefficient (Tr U - ||U^2||) / (1 - ||U^2||), ||.|| summing all entries."""
    u = mix.entries
    s = float((u @ u).sum())
    if abs(1.0 - s) < 1e-12:
        raise DegenerateMixing()
    return (float(np.trace(u)) - s) / (1.0 - s)


def graph_assortativity(graph: AttributedGraph, restrict_to_filled: bool = False) -> float:
    return assortativity(build_mixing_matrix(graph, restrict_to_filled))


def neighbor_class_counts(graph: AttributedGraph, node_id: str) -> list[int]:
    """Per-class count of class-resolved neighbours of ``node_id``."""
    counts = [0] * graph.k
    ps = graph.positions
    for j in graph._nbrs[graph.index_of(node_id)]:
        c = ps[j].class_index
        if c is not None:
            counts[c] += 1
    return counts


def hop_distances(graph: AttributedGraph, source: str) -> dict[str, int]:
    """Breadth-first hop counts from ``source``; unreachable nodes are absent."""
    start = graph.index_of(source)
    dist = {start: 0}
    queue = deque([start])
    nbrs = graph._nbrs
    while queue:
        u = queue.popleft()
        d = dist[u] + 1
        for v in nbrs[u]:
            if v not in dist:
                dist[v] = d
                queue.append(v)
    ps = graph.positions
    return {ps[i].id: d for i, d in dist.items()}
