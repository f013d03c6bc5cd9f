"""Baseline assignment methods and the fitness/diversity/isolation metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMixing, EmptyMixingScope, Infeasible, MetricError, ScaleExceeded
from .matching import (
    BipartiteWeights,
    blocking_positions,
    max_cardinality_pairs,
    max_weight_complete_matching,
    min_weight_complete_matching,
)
from .netcore import AttributedGraph, graph_assortativity, mixing_counts
from .pareto import diversity_score
from .problem import AssignmentInstance, apply_matching, overall_fit_score

ORACLE_LIMIT = 10**7
RANDOM_RESTARTS = 50


@dataclass
class MetricReport:
    fit_score: float
    fit_bounds: tuple[float, float]
    pif: float
    ac_before: float | None
    ac_after: float | None
    pia: float | None
    isolation_score: float | None = None
    notifications: list[str] = field(default_factory=list)


def _require_feasible(instance: AssignmentInstance) -> BipartiteWeights:
    bw = BipartiteWeights.from_instance(instance)
    blocking = blocking_positions(bw)
    if blocking:
        raise Infeasible("instance admits no complete matching", blocking)
    return bw


def fit_bounds(instance: AssignmentInstance) -> tuple[float, float]:
    """(FS_l, FS_h): worst and best overall fit over complete matchings."""
    bw = BipartiteWeights.from_instance(instance)
    return min_weight_complete_matching(bw).total, max_weight_complete_matching(bw).total


def random_baseline(instance: AssignmentInstance, seed=None) -> dict[str, str]:
    """A random complete matching over qualified pairs.

    Positions are visited in random order and each takes a random free
    qualified candidate; a dead end restarts the draw. After
    ``RANDOM_RESTARTS`` dead ends a maximum-cardinality matching over a
    randomly relabelled graph is returned instead.
    """
    bw = _require_feasible(instance)
    rng = np.random.default_rng(seed)
    positions = list(instance.open_positions)
    qualified = instance.qualified
    for _ in range(RANDOM_RESTARTS):
        order = rng.permutation(len(positions))
        used: set[str] = set()
        out: dict[str, str] = {}
        for x in order.tolist():
            o = positions[x]
            free = [c for c in qualified[o] if c not in used]
            if not free:
                break
            c = free[int(rng.integers(len(free)))]
            out[o] = c
            used.add(c)
        else:
            return out
    # Shuffle ids through an order-preserving relabelling so the fallback's tie-breaks are random.
    lperm = rng.permutation(len(bw.left))
    rperm = rng.permutation(len(bw.right))
    lname = {o: f"{lperm[i]:09d}" for i, o in enumerate(bw.left)}
    rname = {c: f"{rperm[j]:09d}" for j, c in enumerate(bw.right)}
    back_l = {v: k for k, v in lname.items()}
    back_r = {v: k for k, v in rname.items()}
    shuffled = BipartiteWeights(lname.values(), rname.values(), {(lname[o], rname[c]): w for (o, c), w in bw.weights.items()})
    pairs = max_cardinality_pairs(shuffled)
    return {back_l[o]: back_r[c] for o, c in pairs.items()}


def hungarian_baseline(instance: AssignmentInstance) -> dict[str, str]:
    """One-shot max-weight matching on fitness plus the initial-graph diversity score."""
    graph = instance.graph
    cls = {c.id: c.class_index for c in instance.candidates}
    bw = BipartiteWeights.from_instance(
        instance, weight_fn=lambda o, c, w: w + diversity_score(graph, o, cls[c])
    )
    return max_weight_complete_matching(bw).matching


@dataclass
class OracleResult:
    matching: dict[str, str]
    objective: float
    pareto: list[tuple[float, float, dict[str, str]]]  # (fitness, |assortativity|, matching)
    count: int


def exact_oracle(instance: AssignmentInstance, weight_on_diversity: float = 1.0, limit: int = ORACLE_LIMIT) -> OracleResult:
    """Enumerate every complete matching of a small instance.

    Maximises ``lam * normalised_fitness - (1 - lam) * |assortativity after|``
    where ``lam`` is ``weight_on_diversity`` (1 means fitness only), and
    also returns the non-dominated (fitness up, |assortativity| down)
    outcomes. The product of per-position qualification counts bounds the
    enumeration size and must not exceed ``limit``.
    """
    lam = weight_on_diversity
    if not 0 <= lam <= 1:
        raise ValueError("weight_on_diversity must lie in [0, 1]")
    _require_feasible(instance)
    positions = sorted(instance.open_positions)
    qualified = instance.qualified
    estimate = math.prod(max(len(qualified[o]), 1) for o in positions)
    if estimate > limit:
        raise ScaleExceeded(estimate, limit)

    graph = instance.graph
    k = graph.k
    idx = graph._index
    base = mixing_counts(graph, restrict_to_filled=True).astype(float)
    cls_of = {c.id: c.class_index for c in instance.candidates}
    open_idx = {idx[o]: o for o in positions}
    order = {o: x for x, o in enumerate(positions)}
    # per position: class counts of resolved non-open neighbours, and earlier open neighbours
    fixed_nbrs = []
    open_nbrs = []
    for o in positions:
        cnt = np.zeros(k)
        earlier = []
        for j in graph._nbrs[idx[o]]:
            if j in open_idx:
                if order[open_idx[j]] < order[o]:
                    earlier.append(order[open_idx[j]])
            elif graph.positions[j].class_index is not None:
                cnt[graph.positions[j].class_index] += 1
        fixed_nbrs.append(cnt)
        open_nbrs.append(earlier)

    fs_l, fs_h = fit_bounds(instance)
    span = fs_h - fs_l

    results: list[tuple[float, float, tuple[str, ...]]] = []
    counts = base.copy()
    chosen: list[str] = []
    chosen_cls: list[int] = []
    used: set[str] = set()

    def walk(x: int):
        if x == len(positions):
            total = counts.sum()
            u = counts / total
            s = float((u @ u).sum())
            if abs(1 - s) < 1e-12:
                raise DegenerateMixing()
            r = (float(np.trace(u)) - s) / (1 - s)
            fit = math.fsum(instance.weight(o, c) for o, c in zip(positions, chosen))
            results.append((fit, abs(r), tuple(chosen)))
            return
        o = positions[x]
        for c in qualified[o]:
            if c in used:
                continue
            cc = cls_of[c]
            delta = np.zeros((k, k))
            delta[cc] += fixed_nbrs[x]
            delta[:, cc] += fixed_nbrs[x]
            for y in open_nbrs[x]:
                delta[cc, chosen_cls[y]] += 1
                delta[chosen_cls[y], cc] += 1
            counts[:] += delta
            used.add(c)
            chosen.append(c)
            chosen_cls.append(cc)
            walk(x + 1)
            chosen.pop()
            chosen_cls.pop()
            used.discard(c)
            counts[:] -= delta

    walk(0)

    def objective(fit, ac):
        norm = 1.0 if span <= 1e-12 else (fit - fs_l) / span
        return lam * norm - (1 - lam) * ac

    best = max(results, key=lambda t: objective(t[0], t[1]))  # first maximum in enumeration order
    front = []
    for fit, ac, combo in sorted(results, key=lambda t: (-t[0], t[1])):
        if front and ac >= front[-1][1]:
            continue
        front.append((fit, ac, dict(zip(positions, combo))))
    return OracleResult(dict(zip(positions, best[2])), objective(best[0], best[1]), front, len(results))


def percentage_improvement_fitness(fs_a: float, fs_l: float, fs_h: float, tol: float = 1e-9) -> float:
    if fs_h < fs_l - tol:
        raise MetricError(f"FS_h {fs_h} below FS_l {fs_l}")
    if not fs_l - tol <= fs_a <= fs_h + tol:
        raise MetricError(f"FS_a {fs_a} outside [{fs_l}, {fs_h}]")
    if fs_h - fs_l <= tol:
        return 100.0
    return (fs_a - fs_l) / (fs_h - fs_l) * 100.0


def percentage_improvement_assortativity(ac_b: float, ac_a: float) -> float:
    if abs(ac_b) <= 1e-12:
        raise MetricError("baseline already perfectly diverse")
    return (abs(ac_b) - abs(ac_a)) / abs(ac_b) * 100.0


def isolation_score(graph: AttributedGraph) -> float:
    """Mean over teams of (smallest class headcount / team size)."""
    teams = graph.teams()
    if len(teams) == 0 or any(p.team is None for p in graph.positions):
        raise MetricError("isolation score needs a team on every node")
    fractions = []
    for members in teams.values():
        counts = [0] * graph.k
        for node in members:
            c = graph.position(node).class_index
            if c is None:
                raise MetricError(f"team member {node!r} has no class")
            counts[c] += 1
        fractions.append(min(counts) / len(members))
    return math.fsum(fractions) / len(fractions)


def safe_assortativity(graph: AttributedGraph, restrict_to_filled: bool = False) -> float | None:
    """Assortativity, or None when it is undefined for this graph."""
    try:
        return graph_assortativity(graph, restrict_to_filled)
    except (EmptyMixingScope, DegenerateMixing):
        return None


def evaluate(
    instance: AssignmentInstance,
    matching: dict[str, str],
    bounds: tuple[float, float] | None = None,
    ac_before: float | None = None,
    notifications=(),
) -> MetricReport:
    """All metrics of a complete matching; pass ``bounds``/``ac_before`` to reuse per-instance values."""
    if bounds is None:
        bounds = fit_bounds(instance)
    if ac_before is None:
        ac_before = safe_assortativity(instance.graph, restrict_to_filled=True)
    fs = overall_fit_score(instance, matching)
    after = apply_matching(instance, matching)
    ac_after = safe_assortativity(after)
    pia = None
    if ac_before is not None and ac_after is not None and abs(ac_before) > 1e-12:
        pia = percentage_improvement_assortativity(ac_before, ac_after)
    iso = None
    if after.positions and all(p.team is not None for p in after.positions):
        iso = isolation_score(after)
    return MetricReport(
        fit_score=fs,
        fit_bounds=bounds,
        pif=percentage_improvement_fitness(fs, *bounds),
        ac_before=ac_before,
        ac_after=ac_after,
        pia=pia,
        isolation_score=iso,
        notifications=list(notifications),
    )
