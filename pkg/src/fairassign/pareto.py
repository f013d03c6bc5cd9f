"""Fitness/diversity scoring of qualified pairs and non-dominated front layering."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import FairAssignError
from .matching import BipartiteWeights
from .netcore import AttributedGraph, neighbor_class_counts


@dataclass(frozen=True)
class ScoredPair:
    open_position: str
    candidate: str
    fitness_score: float
    diversity_score: float

    @property
    def key(self) -> tuple[str, str]:
        return (self.open_position, self.candidate)

    @property
    def point(self) -> tuple[float, float]:
        return (self.fitness_score, self.diversity_score)


def binary_score(counts: Sequence[int], candidate_class: int) -> int:
    """1 iff the candidate's class is strictly rarer than the other class around the position."""
    if len(counts) != 2:
        raise FairAssignError("use multi-class score")
    return 1 if counts[candidate_class] < counts[1 - candidate_class] else 0


def multiclass_score(counts: Sequence[int], candidate_class: int) -> float:
    """Share of resolved neighbours outside the candidate's class; 0 with no resolved neighbours."""
    ct = sum(counts)
    if ct == 0:
        return 0.0
    return (ct - counts[candidate_class]) / ct


def diversity_score_binary(graph: AttributedGraph, open_position: str, candidate_class: int) -> int:
    if graph.k != 2:
        raise FairAssignError("use multi-class score")
    return binary_score(neighbor_class_counts(graph, open_position), candidate_class)


def diversity_score_multiclass(graph: AttributedGraph, open_position: str, candidate_class: int) -> float:
    return multiclass_score(neighbor_class_counts(graph, open_position), candidate_class)


def diversity_score(graph: AttributedGraph, open_position: str, candidate_class: int) -> float:
    """Binary score for two classes, the multi-class share otherwise."""
    counts = neighbor_class_counts(graph, open_position)
    if graph.k == 2:
        return float(binary_score(counts, candidate_class))
    return multiclass_score(counts, candidate_class)


@dataclass(frozen=True)
class FrontLayering:
    """Front index (1 = non-dominated) for each scored pair."""

    pairs: tuple[ScoredPair, ...]
    levels: tuple[int, ...]

    def level_of(self, position: str, candidate: str) -> int:
        for p, lv in zip(self.pairs, self.levels):
            if p.open_position == position and p.candidate == candidate:
                return lv
        raise KeyError((position, candidate))

    def as_dict(self) -> dict[tuple[str, str], int]:
        return {p.key: lv for p, lv in zip(self.pairs, self.levels)}

    @property
    def max_level(self) -> int:
        return max(self.levels, default=0)


def front_levels(points: Sequence[tuple[float, float]]) -> list[int]:
    """Front index of every point when both coordinates are maximised.

    A point is dominated by another that is >= in both coordinates and
    differs from it; identical points never dominate each other. Sweeping
    in decreasing (x, y) order, every dominator of a point has already
    been seen, and the largest y placed on each front is non-increasing in
    the front index, so a binary search finds the deepest front holding a
    dominator. O(n log n).
    """
    n = len(points)
    order = sorted(range(n), key=lambda i: (-points[i][0], -points[i][1]))
    levels = [0] * n
    best_y: list[float] = []  # best_y[L] = max y placed on front L+1
    i = 0
    while i < n:
        j = i
        while j < n and points[order[j]] == points[order[i]]:
            j += 1
        y = points[order[i]][1]
        level = _count_ge(best_y, y) + 1
        for idx in order[i:j]:
            levels[idx] = level
        if level > len(best_y):
            best_y.append(y)
        elif y > best_y[level - 1]:
            best_y[level - 1] = y
        i = j
    return levels


def _count_ge(best_y: list[float], y: float) -> int:
    # best_y is non-increasing; count the leading fronts whose best is >= y
    lo, hi = 0, len(best_y)
    while lo < hi:
        mid = (lo + hi) // 2
        if best_y[mid] >= y:
            lo = mid + 1
        else:
            hi = mid
    return lo


def pareto_levels(pairs: Iterable[ScoredPair]) -> FrontLayering:
    pairs = tuple(pairs)
    return FrontLayering(pairs, tuple(front_levels([p.point for p in pairs])))


def select_top_fronts(layering: FrontLayering, i: int) -> tuple[set[str], set[str]]:
    """Positions and candidates appearing in pairs on fronts 1..i."""
    if i < 1:
        raise ValueError("front count must be >= 1")
    positions: set[str] = set()
    candidates: set[str] = set()
    for p, lv in zip(layering.pairs, layering.levels):
        if lv <= i:
            positions.add(p.open_position)
            candidates.add(p.candidate)
    return positions, candidates


def level_weights(layering: FrontLayering, left=None, right=None) -> BipartiteWeights:
    """Bipartite weights 1/level over the scored pairs."""
    weights = {p.key: 1.0 / lv for p, lv in zip(layering.pairs, layering.levels)}
    if left is None:
        left = {p.open_position for p in layering.pairs}
    if right is None:
        right = {p.candidate for p in layering.pairs}
    return BipartiteWeights(left, right, weights)
