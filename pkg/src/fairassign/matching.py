"""Weighted and cardinality bipartite matching between open positions and candidates.

The weighted solvers use the labelled alternating-tree (Kuhn-Munkres)
search: left labels start at the largest incident weight, right labels at
zero, and a search grows a tree of tight edges from one free left node,
lowering/raising labels by the minimum slack whenever the tree stalls.
Missing edges are absent, never weight 0, so unqualified pairs can never
become tight.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

from .errors import InstanceError, NoCompleteMatching, Stuck

TOL = 1e-9

# Set to True (tests do) to verify l(o) + l(c) >= w(o, c) after every label update.
CHECK_LABELS = False


class BipartiteWeights:
    """Sparse positive weights between left ids (positions) and right ids (candidates).

    Ids are kept sorted lexicographically; that order drives root selection
    and tie-breaking, which makes every solver deterministic.
    """

    __slots__ = ("left", "right", "weights", "_li", "_ri", "_adj")

    def __init__(self, left: Iterable[str], right: Iterable[str], weights: Mapping[tuple[str, str], float]):
        self.left = tuple(sorted(set(left)))
        self.right = tuple(sorted(set(right)))
        self._li = {o: i for i, o in enumerate(self.left)}
        self._ri = {c: j for j, c in enumerate(self.right)}
        adj: list[list[tuple[int, float]]] = [[] for _ in self.left]
        clean = {}
        for (o, c), w in weights.items():
            if o not in self._li or c not in self._ri:
                raise InstanceError(f"weight ({o!r}, {c!r}) references an id outside the bipartition")
            if not (w > 0 and math.isfinite(w)):
                raise InstanceError(f"weight ({o!r}, {c!r}) = {w!r} is not a finite positive real")
            clean[(o, c)] = float(w)
            adj[self._li[o]].append((self._ri[c], float(w)))
        for row in adj:
            row.sort()
        self.weights = clean
        self._adj = adj

    @classmethod
    def from_instance(cls, instance, positions=None, candidates=None, weight_fn=None) -> "BipartiteWeights":
        """Qualified pairs of an instance, optionally restricted and re-weighted."""
        left = instance.open_positions if positions is None else positions
        right = [c.id for c in instance.candidates] if candidates is None else candidates
        ls, rs = set(left), set(right)
        weights = {}
        for (o, c), w in instance.fitness.items():
            if w > 0 and o in ls and c in rs:
                weights[(o, c)] = w if weight_fn is None else weight_fn(o, c, w)
        return cls(left, right, weights)

    def __len__(self) -> int:
        return len(self.weights)

    def __repr__(self) -> str:
        return f"BipartiteWeights({len(self.left)}x{len(self.right)}, {len(self.weights)} edges)"


@dataclass
class MatchResult:
    matching: dict[str, str]
    total: float


class _Search:
    """Mutable labelled-tree search state over an index-based adjacency."""

    def __init__(self, bw: BipartiteWeights, match_l: list[int], match_r: list[int]):
        self.bw = bw
        self.adj = bw._adj
        self.match_l = match_l
        self.match_r = match_r
        self.reset_labels()

    def reset_labels(self):
        self.lab_l = [max((w for _, w in row), default=0.0) for row in self.adj]
        self.lab_r = [0.0] * len(self.bw.right)

    def check_labels(self):
        for o, row in enumerate(self.adj):
            for c, w in row:
                if self.lab_l[o] + self.lab_r[c] < w - TOL:
                    raise AssertionError(f"label infeasible on ({self.bw.left[o]}, {self.bw.right[c]})")

    def augment(self, root: int) -> list[int] | None:
        """Grow an alternating tree from free left node ``root`` and augment.

        Returns None on success, or the tree's left nodes when no augmenting
        path exists (a Hall violator: they reach only already-matched right
        nodes of the tree).
        """
        adj, lab_l, lab_r = self.adj, self.lab_l, self.lab_r
        match_r = self.match_r
        S = [root]
        T: list[int] = []
        in_T: set[int] = set()
        slack: dict[int, list] = {}  # right node -> [slack, tree left node attaining it]
        parent: dict[int, int] = {}

        def scan(o: int):
            lo = lab_l[o]
            for c, w in adj[o]:
                if c in in_T:
                    continue
                s = lo + lab_r[c] - w
                cur = slack.get(c)
                if cur is None or s < cur[0]:
                    slack[c] = [s, o]

        scan(root)
        while True:
            pick = -1
            for c, (s, _) in slack.items():
                if s <= TOL and (pick < 0 or c < pick):
                    pick = c
            if pick < 0:
                if not slack:
                    return S
                alpha = min(s for s, _ in slack.values())
                for o in S:
                    lab_l[o] -= alpha
                for c in T:
                    lab_r[c] += alpha
                for entry in slack.values():
                    entry[0] -= alpha
                if CHECK_LABELS:
                    self.check_labels()
                continue
            _, parent[pick] = slack.pop(pick)
            if match_r[pick] < 0:
                self._flip(pick, parent)
                return None
            in_T.add(pick)
            T.append(pick)
            o2 = match_r[pick]
            S.append(o2)
            scan(o2)

    def _flip(self, c: int, parent: dict[int, int]):
        match_l, match_r = self.match_l, self.match_r
        while True:
            o = parent[c]
            prev = match_l[o]
            match_l[o] = c
            match_r[c] = o
            if prev < 0:
                return
            c = prev


def _result(bw: BipartiteWeights, match_l: list[int]) -> MatchResult:
    matching = {bw.left[o]: bw.right[c] for o, c in enumerate(match_l) if c >= 0}
    total = math.fsum(bw.weights[(o, matching[o])] for o in sorted(matching))
    return MatchResult(matching, total)


def _solve_complete(bw: BipartiteWeights) -> MatchResult:
    nl, nr = len(bw.left), len(bw.right)
    match_l = [-1] * nl
    match_r = [-1] * nr
    search = _Search(bw, match_l, match_r)
    for root in range(nl):
        if not bw._adj[root]:
            raise NoCompleteMatching([bw.left[root]])
        failed = search.augment(root)
        if failed is not None:
            raise NoCompleteMatching(sorted(bw.left[o] for o in failed))
    return _result(bw, match_l)


def max_weight_complete_matching(weights: BipartiteWeights) -> MatchResult:
    """Maximum-weight matching covering every left node."""
    return _solve_complete(weights)


def min_weight_complete_matching(weights: BipartiteWeights) -> MatchResult:
    """Minimum-weight left-covering matching via the reflected weights lo + hi - w.

    Every left-covering matching has the same number of edges, so
    maximising the reflected total minimises the original one; the
    reflection keeps all weights inside [lo, hi], hence positive.
    """
    if not weights.weights:
        return _solve_complete(weights)
    ws = weights.weights.values()
    shift = min(ws) + max(ws)
    flipped = BipartiteWeights(weights.left, weights.right, {k: shift - w for k, w in weights.weights.items()})
    res = _solve_complete(flipped)
    total = math.fsum(weights.weights[(o, res.matching[o])] for o in sorted(res.matching))
    return MatchResult(res.matching, total)


def max_cardinality_pairs(weights: BipartiteWeights, order: Iterable[int] | None = None) -> dict[str, str]:
    """A maximum-cardinality matching (Hopcroft-Karp); weights are ignored."""
    adj = [[c for c, _ in row] for row in weights._adj]
    nl, nr = len(weights.left), len(weights.right)
    match_l = [-1] * nl
    match_r = [-1] * nr
    INF = math.inf

    while True:
        dist = [INF] * nl
        queue = deque()
        for o in range(nl):
            if match_l[o] < 0:
                dist[o] = 0
                queue.append(o)
        found = False
        while queue:
            o = queue.popleft()
            for c in adj[o]:
                o2 = match_r[c]
                if o2 < 0:
                    found = True
                elif dist[o2] == INF:
                    dist[o2] = dist[o] + 1
                    queue.append(o2)
        if not found:
            break
        # Layered DFS, iterative to stay clear of the recursion limit.
        it = [0] * nl
        for root in range(nl):
            if match_l[root] >= 0:
                continue
            stack = [root]
            path_c: list[int] = []
            while stack:
                o = stack[-1]
                advanced = False
                while it[o] < len(adj[o]):
                    c = adj[o][it[o]]
                    it[o] += 1
                    o2 = match_r[c]
                    if o2 < 0:
                        path_c.append(c)
                        for oo, cc in zip(stack, path_c):
                            match_l[oo] = cc
                            match_r[cc] = oo
                        stack = []
                        advanced = True
                        break
                    if dist[o2] == dist[o] + 1:
                        path_c.append(c)
                        stack.append(o2)
                        advanced = True
                        break
                if not advanced:
                    dist[o] = INF
                    stack.pop()
                    if path_c:
                        path_c.pop()
    return {weights.left[o]: weights.right[c] for o, c in enumerate(match_l) if c >= 0}


def max_cardinality_matching(weights: BipartiteWeights) -> int:
    """Size of a maximum matching; every stored edge counts as a qualification."""
    return len(max_cardinality_pairs(weights))


def incremental_rematch(
    weights: BipartiteWeights,
    committed: Mapping[str, str],
    reweigh: Callable[[dict[str, str]], BipartiteWeights],
    allow_partial: bool = False,
) -> dict[str, str]:
    """Grow ``committed`` one augmenting path at a time, re-weighting in between.

    After each augmentation ``reweigh`` receives the current matching and
    returns fresh weights over the same bipartition. Labels are rebuilt
    from scratch under the new weights (right labels 0, left labels the
    max incident weight) so they are feasible again; the matching is kept.
    An augmenting path may reassign pairs matched earlier in the call.

    With ``allow_partial`` a left node that has no augmenting path is
    skipped instead of raising :class:`Stuck`.
    """
    bw = weights
    li, ri = bw._li, bw._ri
    match_l = [-1] * len(bw.left)
    match_r = [-1] * len(bw.right)
    for o, c in committed.items():
        if (o, c) not in bw.weights:
            raise InstanceError(f"committed pair ({o!r}, {c!r}) is not an edge")
        if match_r[ri[c]] >= 0 or match_l[li[o]] >= 0:
            raise InstanceError(f"committed matching is not injective at ({o!r}, {c!r})")
        match_l[li[o]] = ri[c]
        match_r[ri[c]] = li[o]

    skipped: set[int] = set()
    while True:
        roots = [o for o in range(len(bw.left)) if match_l[o] < 0 and o not in skipped]
        if not roots:
            break
        search = _Search(bw, match_l, match_r)
        failed = search.augment(roots[0])
        if failed is not None:
            if not allow_partial:
                raise Stuck(sorted(bw.left[o] for o in failed))
            skipped.add(roots[0])
            continue
        current = {bw.left[o]: bw.right[c] for o, c in enumerate(match_l) if c >= 0}
        new = reweigh(current)
        if new.left != bw.left or new.right != bw.right:
            raise InstanceError("reweigh must keep the bipartition unchanged")
        for o, c in current.items():
            if (o, c) not in new.weights:
                raise InstanceError(f"reweigh dropped matched edge ({o!r}, {c!r})")
        bw = new
    return {bw.left[o]: bw.right[c] for o, c in enumerate(match_l) if c >= 0}


def blocking_positions(weights: BipartiteWeights) -> list[str]:
    """A Hall-violating set of left ids (more of them than distinct right neighbours).

    Empty when a left-covering matching exists. Built from the left nodes
    reachable by alternating paths from one left node a maximum matching
    leaves uncovered.
    """
    pairs = max_cardinality_pairs(weights)
    free = [o for o in weights.left if o not in pairs]
    if not free:
        return []
    owner = {c: o for o, c in pairs.items()}
    nbrs = {o: [weights.right[c] for c, _ in weights._adj[weights._li[o]]] for o in weights.left}
    seen = {free[0]}
    queue = deque([free[0]])
    while queue:
        o = queue.popleft()
        for c in nbrs[o]:
            o2 = owner.get(c)
            if o2 is not None and o2 not in seen:
                seen.add(o2)
                queue.append(o2)
    return sorted(seen)


def admissible_pairs(weights: BipartiteWeights) -> set[tuple[str, str]]:
    """Edges that belong to at least one left-covering matching.

    With a covering matching M in hand, (o, c) is usable iff c is in M(o),
    or c can be freed: following arcs c -> c'' (M-owner of c is adjacent
    to c'') reaches either an unmatched right node or M(o) itself.
    Raises :class:`NoCompleteMatching` when no covering matching exists.
    """
    import networkx as nx

    pairs = max_cardinality_pairs(weights)
    if len(pairs) < len(weights.left):
        raise NoCompleteMatching(blocking_positions(weights))
    owner = {c: o for o, c in pairs.items()}
    nbrs = {o: [weights.right[c] for c, _ in weights._adj[weights._li[o]]] for o in weights.left}
    arcs = nx.DiGraph()
    arcs.add_nodes_from(weights.right)
    for c, o in owner.items():
        arcs.add_edges_from((c, c2) for c2 in nbrs[o] if c2 != c)
    free = [c for c in weights.right if c not in owner]
    escapes = set(free)
    for c in free:
        escapes |= nx.ancestors(arcs, c)
    component = {}
    for x, comp in enumerate(nx.strongly_connected_components(arcs)):
        for c in comp:
            component[c] = x
    out = set()
    for o, cs in nbrs.items():
        mine = pairs[o]
        for c in cs:
            if c == mine or c in escapes or component[c] == component[mine]:
                out.add((o, c))
    return out
