"""Assignment instances, matchings, objective evaluation and feasibility."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

from .errors import IncompleteMatching, InstanceError
from .netcore import AttributedGraph

# open-position id -> candidate id
Matching = dict


@dataclass(frozen=True)
class Candidate:
    id: str
    class_index: int
    origin: str | None = None


@dataclass(frozen=True)
class AssignmentInstance:
    """A graph with open positions, a candidate roster and sparse fitness.

    ``fitness`` maps ``(open_position_id, candidate_id)`` to a weight; a
    pair is qualified exactly when its weight is positive, and absent keys
    mean zero. Construction does not validate; see :func:`validate_instance`.
    """

    graph: AttributedGraph
    candidates: tuple[Candidate, ...]
    fitness: Mapping[tuple[str, str], float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))
        object.__setattr__(self, "fitness", dict(self.fitness))

    @cached_property
    def open_positions(self) -> tuple[str, ...]:
        return tuple(self.graph.open_ids)

    @property
    def m(self) -> int:
        return len(self.open_positions)

    @property
    def t(self) -> int:
        return len(self.candidates)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def s(self) -> int:
        return self.n - self.m

    @property
    def k(self) -> int:
        return self.graph.k

    @cached_property
    def candidate_index(self) -> dict[str, Candidate]:
        return {c.id: c for c in self.candidates}

    def candidate(self, candidate_id: str) -> Candidate:
        try:
            return self.candidate_index[candidate_id]
        except KeyError:
            raise InstanceError(f"unknown candidate {candidate_id!r}") from None

    def weight(self, position: str, candidate: str) -> float:
        return self.fitness.get((position, candidate), 0.0)

    @cached_property
    def qualified(self) -> dict[str, list[str]]:
        """Open position -> qualified candidate ids (sorted)."""
        out: dict[str, list[str]] = {o: [] for o in self.open_positions}
        for (o, c), w in self.fitness.items():
            if w > 0 and o in out:
                out[o].append(c)
        for cs in out.values():
            cs.sort()
        return out

    @cached_property
    def qualified_pairs(self) -> list[tuple[str, str]]:
        return sorted(key for key, w in self.fitness.items() if w > 0)


def validate_instance(instance: AssignmentInstance) -> list[str]:
    """Every structural violation found; an empty list means the instance is valid."""
    problems: list[str] = []
    graph = instance.graph
    open_set = set(instance.open_positions)
    seen: set[str] = set()
    for c in instance.candidates:
        if c.id in seen:
            problems.append(f"duplicate candidate id {c.id!r}")
        seen.add(c.id)
        if not 0 <= c.class_index < graph.k:
            problems.append(f"candidate {c.id!r}: class {c.class_index} outside [0, {graph.k})")
        if c.origin is not None and c.origin not in graph:
            problems.append(f"candidate {c.id!r}: unknown origin node {c.origin!r}")
    if instance.t < instance.m:
        problems.append(f"t < m ({instance.t} candidates for {instance.m} open positions)")
    for (o, c), w in instance.fitness.items():
        if o not in open_set:
            what = "not an open position" if o in graph else "unknown position"
            problems.append(f"fitness ({o!r}, {c!r}): {what} {o!r}")
        if c not in seen:
            problems.append(f"fitness ({o!r}, {c!r}): unknown candidate {c!r}")
        if not math.isfinite(w) or w <= 0:
            problems.append(f"nonpositive fitness ({o!r}, {c!r}) = {w!r}")
        elif w > 1:
            problems.append(f"fitness above 1 ({o!r}, {c!r}) = {w!r}")
    return problems


def feasibility_check(
    instance: AssignmentInstance,
    excluded_positions: Iterable[str] = (),
    excluded_candidates: Iterable[str] = (),
) -> bool:
    """True iff the remaining open positions can all be covered by distinct remaining candidates."""
    from .matching import BipartiteWeights, max_cardinality_matching

    xo = set(excluded_positions)
    xc = set(excluded_candidates)
    left = [o for o in instance.open_positions if o not in xo]
    right = [c.id for c in instance.candidates if c.id not in xc]
    rset = set(right)
    lset = set(left)
    weights = {(o, c): w for (o, c), w in instance.fitness.items() if w > 0 and o in lset and c in rset}
    return max_cardinality_matching(BipartiteWeights(left, right, weights)) == len(left)


def matching_violations(instance: AssignmentInstance, matching: Mapping[str, str], complete: bool = True) -> list[str]:
    problems: list[str] = []
    open_set = set(instance.open_positions)
    used: dict[str, str] = {}
    for o, c in matching.items():
        if o not in open_set:
            problems.append(f"{o!r} is not an open position")
        if c not in instance.candidate_index:
            problems.append(f"unknown candidate {c!r}")
        if c in used:
            problems.append(f"candidate {c!r} assigned to both {used[c]!r} and {o!r}")
        used[c] = o
        if instance.weight(o, c) <= 0:
            problems.append(f"unqualified pair ({o!r}, {c!r})")
    if complete:
        missing = open_set - set(matching)
        if missing:
            problems.append(f"{len(missing)} open positions unassigned")
    return problems


def overall_fit_score(instance: AssignmentInstance, matching: Mapping[str, str]) -> float:
    """Sum of pair fitness over a complete matching (summed in position order)."""
    missing = [o for o in instance.open_positions if o not in matching]
    if missing:
        raise IncompleteMatching(missing)
    return math.fsum(instance.weight(o, matching[o]) for o in sorted(matching))


def apply_matching(instance: AssignmentInstance, matching: Mapping[str, str]) -> AttributedGraph:
    """Graph with every matched open position filled by its candidate's class."""
    open_set = set(instance.open_positions)
    update = {}
    for o, c in matching.items():
        if o not in open_set:
            raise InstanceError(f"{o!r} is not an open position")
        if instance.weight(o, c) <= 0:
            raise InstanceError(f"pair ({o!r}, {c!r}) has zero fitness")
        update[o] = instance.candidate(c).class_index
    return instance.graph.with_classes(update)
