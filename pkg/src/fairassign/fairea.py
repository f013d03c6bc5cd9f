"""FairEA: iterative Pareto selection with state-dependent incremental matching.

Each outer iteration ``i`` scores every qualified pair of a still-free
position and a still-free candidate by (fitness, diversity), layers the
pairs into non-dominated fronts, keeps the positions and candidates seen
on the top ``i`` fronts, and matches them with the incremental Hungarian
search using weights 1/front. After every augmentation the diversity
scores of the selected pairs are recomputed against the tentatively
filled graph and the fronts rebuilt, so later augmentations see the
classes just placed. Matches made in an iteration are frozen once it ends.

Pairs that no complete matching of the remaining positions could contain
are dropped before layering. If an iteration's matches still cannot be
jointly extended, only the largest extendable part of them is kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import FairAssignError, Infeasible, InstanceError
from .matching import (
    BipartiteWeights,
    admissible_pairs,
    blocking_positions,
    incremental_rematch,
    max_weight_complete_matching,
)
from .pareto import binary_score, front_levels, multiclass_score
from .problem import AssignmentInstance, feasibility_check, validate_instance


@dataclass(frozen=True)
class Threshold:
    """Minimum per-class headcount for a team: absolute, or a fraction of team size."""

    value: float
    fraction: bool = False

    def __post_init__(self):
        if self.value < 0 or (self.fraction and self.value > 1):
            raise ValueError(f"invalid threshold {self.value!r}")

    @classmethod
    def parse(cls, text) -> "Threshold":
        """``"2"`` is absolute, ``"0.2"`` (anything with a decimal point) a team-size fraction."""
        if isinstance(text, Threshold):
            return text
        if isinstance(text, int):
            return cls(float(text))
        if isinstance(text, float):
            return cls(text, fraction=True)
        text = str(text).strip()
        if "." in text or "e" in text.lower():
            return cls(float(text), fraction=True)
        return cls(float(int(text)))

    def resolve(self, team_size: int) -> int:
        if self.fraction:
            return math.ceil(self.value * team_size - 1e-9)
        return int(self.value)

    def __str__(self) -> str:
        return repr(self.value) if self.fraction else str(int(self.value))


@dataclass
class FairEAConfig:
    isolation_thresholds: Mapping[str, Threshold] = field(default_factory=dict)
    max_outer_iterations: int | None = None
    multi_attribute_merge: Sequence[str] | None = None

    @classmethod
    def uniform(cls, graph, threshold, **kw) -> "FairEAConfig":
        """Apply one threshold to every team annotated on ``graph``."""
        t = Threshold.parse(threshold)
        return cls(isolation_thresholds={team: t for team in graph.teams()}, **kw)


@dataclass
class IterationTrace:
    iteration: int
    selected_positions: int
    selected_candidates: int
    matched: int
    repaired: bool = False


@dataclass
class AssignmentOutcome:
    matching: dict[str, str]
    notifications: list[str] = field(default_factory=list)
    trace: list[IterationTrace] = field(default_factory=list)
    prepass: dict[str, str] = field(default_factory=dict)


class _ClassState:
    """Class of every node by index, mutated as assignments are committed."""

    def __init__(self, instance: AssignmentInstance):
        g = instance.graph
        self.k = g.k
        self.nbrs = g._nbrs
        self.index = g._index
        self.classes = [p.class_index for p in g.positions]
        self.cand_class = {c.id: c.class_index for c in instance.candidates}
        self.score = (lambda counts, cls: float(binary_score(counts, cls))) if self.k == 2 else multiclass_score

    def commit(self, matching: Mapping[str, str]):
        for o, c in matching.items():
            self.classes[self.index[o]] = self.cand_class[c]

    def counts(self, position: str, overrides: Mapping[int, int] | None = None) -> list[int]:
        out = [0] * self.k
        classes = self.classes
        for j in self.nbrs[self.index[position]]:
            cls = overrides.get(j, classes[j]) if overrides else classes[j]
            if cls is not None:
                out[cls] += 1
        return out


def _residual_blocking(instance, taken_pos, taken_cand) -> list[str]:
    bw = BipartiteWeights.from_instance(
        instance,
        positions=[o for o in instance.open_positions if o not in taken_pos],
        candidates=[c.id for c in instance.candidates if c.id not in taken_cand],
    )
    return blocking_positions(bw)


def constraint_prepass(instance: AssignmentInstance, config: FairEAConfig) -> tuple[dict[str, str], list[str]]:
    """Commit best-fitting candidates of under-represented classes to each deficient team.

    For every configured team and every class whose headcount is below the
    team's threshold, pairs (open team position, free candidate of that
    class) are tried in descending fitness; a pair is committed only if the
    remaining positions can still all be filled. Teams left short are
    returned as notifications.
    """
    graph = instance.graph
    teams = graph.teams()
    matched: dict[str, str] = {}
    used: set[str] = set()
    notifications: list[str] = []
    by_class: dict[int, list[str]] = {}
    for c in instance.candidates:
        by_class.setdefault(c.class_index, []).append(c.id)

    for team in sorted(config.isolation_thresholds):
        if team not in teams:
            raise InstanceError(f"threshold configured for unknown team {team!r}")
        members = teams[team]
        need = Threshold.parse(config.isolation_thresholds[team]).resolve(len(members))
        if need <= 0:
            continue
        counts = [0] * graph.k
        for node in members:
            p = graph.position(node)
            if p.class_index is not None and not p.is_open:
                counts[p.class_index] += 1
        open_members = [node for node in members if graph.position(node).is_open]
        short = False
        for j in range(graph.k):
            if counts[j] >= need:
                continue
            pairs = sorted(
                (
                    (-instance.weight(o, c), o, c)
                    for o in open_members
                    for c in by_class.get(j, ())
                    if instance.weight(o, c) > 0
                ),
            )
            for _, o, c in pairs:
                if counts[j] >= need:
                    break
                if o in matched or c in used:
                    continue
                if feasibility_check(instance, set(matched) | {o}, used | {c}):
                    matched[o] = c
                    used.add(c)
                    counts[j] += 1
            if counts[j] < need:
                short = True
        if short:
            notifications.append(team)
    return matched, notifications


def fairea_assign(instance: AssignmentInstance, config: FairEAConfig | None = None) -> AssignmentOutcome:
    """Assign every open position a distinct qualified candidate, trading fitness against diversity."""
    config = config or FairEAConfig()
    problems = validate_instance(instance)
    if problems:
        raise InstanceError("; ".join(problems))
    if not feasibility_check(instance):
        raise Infeasible("instance admits no complete matching", _residual_blocking(instance, (), ()))

    state = _ClassState(instance)
    outcome = AssignmentOutcome(matching={})
    matched = outcome.matching
    used: set[str] = set()

    if config.isolation_thresholds:
        pre, outcome.notifications = constraint_prepass(instance, config)
        outcome.prepass = dict(pre)
        matched.update(pre)
        used.update(pre.values())
        state.commit(pre)

    m = instance.m
    cap = config.max_outer_iterations or max(len(instance.qualified_pairs), 1)
    cand_class = state.cand_class
    qualified = [(o, c, w) for (o, c), w in sorted(instance.fitness.items()) if w > 0]
    i = 0
    while len(matched) < m:
        i += 1
        if i > cap:
            raise FairAssignError(f"no complete matching after {cap} outer iterations")
        pool = [(o, c, w) for o, c, w in qualified if o not in matched and c not in used]
        # pairs that no complete residual matching contains can only lead to dead ends
        residual = BipartiteWeights(
            [o for o in instance.open_positions if o not in matched],
            [c.id for c in instance.candidates if c.id not in used],
            {(o, c): w for o, c, w in pool},
        )
        allowed = admissible_pairs(residual)
        pool = [(o, c, w) for o, c, w in pool if (o, c) in allowed]
        counts = {o: state.counts(o) for o in {o for o, _, _ in pool}}
        points = [(w, state.score(counts[o], cand_class[c])) for o, c, w in pool]
        levels = front_levels(points)
        sel_pos = {pool[x][0] for x, lv in enumerate(levels) if lv <= i}
        sel_cand = {pool[x][1] for x, lv in enumerate(levels) if lv <= i}
        sub = [(o, c, w) for o, c, w in pool if o in sel_pos and c in sel_cand]

        def layered(tentative: Mapping[str, str]) -> BipartiteWeights:
            overrides = {state.index[o]: cand_class[c] for o, c in tentative.items()}
            cnt = {o: state.counts(o, overrides) for o in sel_pos}
            lv = front_levels([(w, state.score(cnt[o], cand_class[c])) for o, c, w in sub])
            return BipartiteWeights(sel_pos, sel_cand, {(o, c): 1.0 / l for (o, c, _), l in zip(sub, lv)})

        found = incremental_rematch(layered({}), {}, layered, allow_partial=True)
        repaired = False
        if found and not feasibility_check(instance, set(matched) | set(found), used | set(found.values())):
            found = _extendable_subset(instance, matched, used, found)
            repaired = True
        matched.update(found)
        used.update(found.values())
        state.commit(found)
        outcome.trace.append(IterationTrace(i, len(sel_pos), len(sel_cand), len(found), repaired))
    return outcome


def _extendable_subset(instance, matched, used, found: Mapping[str, str]) -> dict[str, str]:
    """Largest part of ``found`` that some complete residual matching contains."""
    bw = BipartiteWeights.from_instance(
        instance,
        positions=[o for o in instance.open_positions if o not in matched],
        candidates=[c.id for c in instance.candidates if c.id not in used],
        weight_fn=lambda o, c, w: 2.0 if found.get(o) == c else 1.0,
    )
    full = max_weight_complete_matching(bw).matching
    return {o: c for o, c in found.items() if full.get(o) == c}


def merge_attributes(rows: Sequence[Sequence]) -> tuple[list[int], list[tuple]]:
    """Combine several categorical attributes into one class per row.

    Returns each row's class index and the legend: the observed value
    combinations in lexicographic order, so ``legend[index]`` recovers the
    original values. Unobserved combinations get no index.
    """
    rows = [tuple(r) for r in rows]
    for n, r in enumerate(rows):
        if any(v is None or v == "" for v in r):
            raise InstanceError(f"row {n}: missing attribute value in {r!r}")
    widths = {len(r) for r in rows}
    if len(widths) > 1:
        raise InstanceError("rows carry different numbers of attributes")
    legend = sorted(set(rows))
    index = {combo: i for i, combo in enumerate(legend)}
    return [index[r] for r in rows], legend
