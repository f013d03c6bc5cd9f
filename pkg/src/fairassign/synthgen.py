"""Synthetic organisational networks, attribute planting and scenario sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import networkx as nx
import numpy as np

from .errors import FairAssignError, GraphError, Infeasible, TargetUnreachable
from .netcore import FILLED, OPEN, AttributedGraph, Position, hop_distances
from .problem import AssignmentInstance, Candidate, feasibility_check

FEASIBILITY_RETRIES = 100


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class OrgChartSpec:
    """Wiring of a chart-style organisation.

    ``units`` teams of ``unit_size`` people each form near-cliques; the
    first member of each unit is its lead. Unit leads report to their group
    lead (the lead of the group's first unit), group leads report to the
    lead of unit 0. ``cross_unit_edges`` extra ties join random members of
    different units. Each unit is planted homogeneously: a
    ``minority_fraction`` share of units (rounded) gets class 1.
    """

    layout: str
    units: int
    unit_size: int
    groups: int
    intra_density: float
    cross_unit_edges: int
    minority_fraction: float = 0.3

    def __post_init__(self):
        if self.layout not in ("functional", "divisional"):
            raise GraphError(f"unknown layout {self.layout!r}")
        if self.units < 1 or self.unit_size < 2 or not 1 <= self.groups <= self.units:
            raise GraphError("org chart needs >= 1 unit of >= 2 people and 1..units groups")
        if not 0 < self.intra_density <= 1:
            raise GraphError("intra_density must lie in (0, 1]")
        if not 0 <= self.minority_fraction < 1:
            raise GraphError("minority_fraction must lie in [0, 1)")

    @classmethod
    def functional(cls, **kw) -> "OrgChartSpec":
        """6 teams x 2 sub-teams of 24 (288 people)."""
        base = dict(layout="functional", units=12, unit_size=24, groups=6, intra_density=0.7, cross_unit_edges=320)
        base.update(kw)
        return cls(**base)

    @classmethod
    def divisional(cls, **kw) -> "OrgChartSpec":
        """3 divisions over 40 teams of 7 (280 people)."""
        base = dict(layout="divisional", units=40, unit_size=7, groups=3, intra_density=1.0, cross_unit_edges=40)
        base.update(kw)
        return cls(**base)

    @property
    def n(self) -> int:
        return self.units * self.unit_size


def generate_org_network(spec: OrgChartSpec, seed=None) -> AttributedGraph:
    rng = np.random.default_rng(seed)
    size = spec.unit_size
    node = lambda u, j: f"u{u:02d}n{j:02d}"  # noqa: E731
    edges: set[tuple[str, str]] = set()

    def add(a, b):
        edges.add((a, b) if a < b else (b, a))

    pairs = [(a, b) for a in range(size) for b in range(a + 1, size)]
    target = max(size - 1, _round_half_up(spec.intra_density * len(pairs)))
    for u in range(spec.units):
        # spanning star on the lead keeps every unit connected
        for j in range(1, size):
            add(node(u, 0), node(u, j))
        rest = [p for p in pairs if p[0] != 0]
        extra = target - (size - 1)
        for x in rng.permutation(len(rest))[:extra]:
            a, b = rest[x]
            add(node(u, a), node(u, b))

    group_of = [u * spec.groups // spec.units for u in range(spec.units)]
    group_head = {}
    for u, g in enumerate(group_of):
        group_head.setdefault(g, u)
    for u, g in enumerate(group_of):
        head = group_head[g]
        if u != head:
            add(node(u, 0), node(head, 0))
        elif u != 0:
            add(node(u, 0), node(0, 0))

    added = 0
    n = spec.n
    while added < spec.cross_unit_edges:
        a, b = rng.integers(n, size=2)
        ua, ub = a // size, b // size
        if ua == ub:
            continue
        e = tuple(sorted((node(ua, a % size), node(ub, b % size))))
        if e in edges:
            continue
        edges.add(e)
        added += 1

    minority_units = set(rng.choice(spec.units, _round_half_up(spec.minority_fraction * spec.units), replace=False).tolist())
    positions = [
        Position(
            node(u, j),
            FILLED,
            1 if u in minority_units else 0,
            team=f"t{u:02d}",
            level="lead" if j == 0 else "member",
        )
        for u in range(spec.units)
        for j in range(size)
    ]
    return AttributedGraph(positions, sorted(edges), k=2)


def generate_scale_free(n: int = 1000, edges_per_node: int = 4, triad_prob: float = 0.1, seed=None) -> AttributedGraph:
    """Holme-Kim growth (preferential attachment plus triad formation); every node class 0."""
    if n < 10:
        raise GraphError("scale-free generator needs n >= 10")
    g = nx.powerlaw_cluster_graph(n, edges_per_node, triad_prob, seed=seed)
    positions = [Position(str(v), FILLED, 0) for v in range(n)]
    return AttributedGraph(positions, [(str(a), str(b)) for a, b in g.edges()], k=1)


class _MixCounter:
    """Edge-class tallies for a binary labelling, updated in O(degree) per label swap."""

    def __init__(self, nbrs, labels):
        self.nbrs = nbrs
        self.labels = labels
        self.deg = [len(x) for x in nbrs]
        self.E = sum(self.deg) // 2
        self.same = [0, 0]  # intra-class edges per class
        for a, row in enumerate(nbrs):
            for b in row:
                if a < b and labels[a] == labels[b]:
                    self.same[labels[a]] += 1
        self.dsum = [0, 0]
        for a, d in enumerate(self.deg):
            self.dsum[labels[a]] += d

    def r(self, same=None, dsum=None) -> float:
        same = same or self.same
        dsum = dsum or self.dsum
        two_e = 2 * self.E
        trace = (same[0] + same[1]) / self.E
        s = (dsum[0] / two_e) ** 2 + (dsum[1] / two_e) ** 2
        if abs(1 - s) < 1e-12:
            return 0.0
        return (trace - s) / (1 - s)

    def swap_delta(self, a, b):
        """(same, dsum) after exchanging the labels of a (class 0) and b (class 1)."""
        labels = self.labels
        same = list(self.same)
        for x, new in ((a, 1), (b, 0)):
            old = 1 - new
            for y in self.nbrs[x]:
                if y == a or y == b:
                    continue
                ly = labels[y]
                if ly == old:
                    same[old] -= 1
                else:
                    same[new] += 1
        # an a-b edge is inter-class before and after
        dsum = [self.dsum[0] - self.deg[a] + self.deg[b], self.dsum[1] + self.deg[a] - self.deg[b]]
        return same, dsum

    def apply(self, a, b, same, dsum):
        self.labels[a], self.labels[b] = 1, 0
        self.same, self.dsum = same, dsum


def plant_attributes(
    graph: AttributedGraph,
    minority_fraction: float,
    target_assortativity: float,
    tolerance: float = 0.01,
    seed=None,
    max_steps: int = 200_000,
) -> tuple[AttributedGraph, float]:
    """Binary labels with an exact minority count, hill-climbed towards a target assortativity.

    Starts from a uniformly random labelling and repeatedly proposes
    swapping one class-0 and one class-1 label, keeping the swap when it
    brings the coefficient strictly closer to the target. Topology is
    never touched. Returns the relabelled graph and the achieved value.
    """
    if not 0 < minority_fraction < 1:
        raise FairAssignError("minority_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    n = graph.n
    n_min = _round_half_up(n * minority_fraction)
    if n_min in (0, n):
        raise FairAssignError("minority count rounds to 0 or n")
    if graph.n_edges == 0:
        raise FairAssignError("graph has no edges")
    labels = [0] * n
    for i in rng.choice(n, n_min, replace=False).tolist():
        labels[i] = 1
    mix = _MixCounter(graph._nbrs, labels)
    members = [[i for i in range(n) if labels[i] == c] for c in (0, 1)]
    gap = abs(mix.r() - target_assortativity)
    steps = 0
    while gap > tolerance and steps < max_steps:
        steps += 1
        ia = int(rng.integers(len(members[0])))
        ib = int(rng.integers(len(members[1])))
        a, b = members[0][ia], members[1][ib]
        same, dsum = mix.swap_delta(a, b)
        new_gap = abs(mix.r(same, dsum) - target_assortativity)
        if new_gap < gap:
            mix.apply(a, b, same, dsum)
            members[0][ia], members[1][ib] = b, a
            gap = new_gap
    achieved = mix.r()
    out = graph.with_k(2, labels)
    if gap > tolerance:
        raise TargetUnreachable(target_assortativity, achieved, out)
    return out, achieved


@dataclass(frozen=True)
class ScenarioSpec:
    open_fraction: float = 0.10
    pool_mode: str = "copy"  # "copy" | "double"
    fitness_mode: str = "f1"  # "f1" | "f2"
    qualified_per_candidate: int = 4
    seed: int | None = None

    def __post_init__(self):
        if not 0 < self.open_fraction < 1:
            raise FairAssignError("open_fraction must lie in (0, 1)")
        if self.pool_mode not in ("copy", "double"):
            raise FairAssignError(f"unknown pool mode {self.pool_mode!r}")
        if self.fitness_mode not in ("f1", "f2"):
            raise FairAssignError(f"unknown fitness mode {self.fitness_mode!r}")
        if self.qualified_per_candidate < 1:
            raise FairAssignError("qualified_per_candidate must be >= 1")


def _open_weight(rng) -> float:
    w = rng.random()
    while w == 0.0:
        w = rng.random()
    return float(w)


def nearest_open(graph: AttributedGraph, origin: str, open_ids, count: int) -> list[str]:
    """The ``count`` open positions closest to ``origin`` by hops, ties by id; unreachable ones never."""
    dist = hop_distances(graph, origin)
    ranked = sorted((dist[o], o) for o in open_ids if o in dist)
    return [o for _, o in ranked[:count]]


def sample_scenario(graph: AttributedGraph, spec: ScenarioSpec) -> AssignmentInstance:
    """Open a random share of filled positions and build the candidate pool and fitness.

    Removed occupants become the candidates (one or two copies each, keeping
    their class and origin). Under ``f1`` each candidate is qualified for
    ``qualified_per_candidate`` uniformly chosen open positions, under
    ``f2`` for the nearest ones to its origin; weights are uniform in (0, 1).
    The whole draw is repeated until a complete matching exists.
    """
    rng = np.random.default_rng(spec.seed)
    n = graph.n
    m = _round_half_up(spec.open_fraction * n)
    if m < 1:
        raise FairAssignError("open_fraction * n rounds to zero open positions")
    ids = graph.node_ids
    for _ in range(FEASIBILITY_RETRIES):
        picked = sorted(rng.choice(n, m, replace=False).tolist())
        opened = [ids[i] for i in picked]
        occupant = {o: graph.position(o).class_index for o in opened}
        if any(c is None for c in occupant.values()):
            raise FairAssignError("can only open positions whose occupant class is known")
        positions = list(graph.positions)
        for i in picked:
            positions[i] = replace(positions[i], status=OPEN, class_index=None)
        opened_graph = graph._with_positions(tuple(positions))

        candidates: list[Candidate] = []
        for o in opened:
            if spec.pool_mode == "copy":
                candidates.append(Candidate(f"c_{o}", occupant[o], o))
            else:
                candidates.append(Candidate(f"c_{o}_0", occupant[o], o))
                candidates.append(Candidate(f"c_{o}_1", occupant[o], o))

        q = min(spec.qualified_per_candidate, m)
        fitness: dict[tuple[str, str], float] = {}
        for cand in candidates:
            if spec.fitness_mode == "f1":
                chosen = [opened[x] for x in sorted(rng.choice(m, q, replace=False).tolist())]
            else:
                chosen = nearest_open(graph, cand.origin, opened, q)
            for o in chosen:
                fitness[(o, cand.id)] = _open_weight(rng)
        instance = AssignmentInstance(opened_graph, tuple(candidates), fitness)
        if feasibility_check(instance):
            return instance
    raise Infeasible(f"no feasible scenario after {FEASIBILITY_RETRIES} draws")
