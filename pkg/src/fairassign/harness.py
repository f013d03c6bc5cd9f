"""Trial-based comparison of assignment methods on sampled scenarios."""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ExperimentError, FairAssignError
from .evaluation import (
    evaluate,
    exact_oracle,
    fit_bounds,
    hungarian_baseline,
    isolation_score,
    random_baseline,
    safe_assortativity,
)
from .fairea import FairEAConfig, Threshold, fairea_assign
from .netcore import AttributedGraph
from .synthgen import (
    OrgChartSpec,
    ScenarioSpec,
    generate_org_network,
    generate_scale_free,
    plant_attributes,
    sample_scenario,
)

METHODS = ("fairea", "random", "hungarian", "oracle")
SWEEP_THRESHOLDS = ("0", "2", "0.05", "0.1", "0.2")


@dataclass
class NetworkSpec:
    """Where the network comes from: a generator (``sf``, ``fo``, ``do``) or a node/edge file pair."""

    model: str = "sf"
    nodes: int = 1000
    edges_per_node: int = 4
    minority: float = 0.31
    target_assort: float | None = 0.39
    tolerance: float = 0.01
    seed: int | None = None
    nodes_file: str | None = None
    edges_file: str | None = None

    def build(self, fallback_seed: int) -> AttributedGraph:
        seed = fallback_seed if self.seed is None else self.seed
        if self.model == "sf":
            g = generate_scale_free(self.nodes, self.edges_per_node, seed=seed)
            target = 0.0 if self.target_assort is None else self.target_assort
            g, _ = plant_attributes(g, self.minority, target, self.tolerance, seed=seed)
            return g
        if self.model in ("fo", "do"):
            make = OrgChartSpec.functional if self.model == "fo" else OrgChartSpec.divisional
            return generate_org_network(make(minority_fraction=self.minority), seed=seed)
        if self.model == "files":
            from .fileio import read_graph

            if not (self.nodes_file and self.edges_file):
                raise ExperimentError("file network needs nodes_file and edges_file")
            return read_graph(self.nodes_file, self.edges_file)
        raise ExperimentError(f"unknown network model {self.model!r}")


@dataclass
class ExperimentConfig:
    network: NetworkSpec = field(default_factory=NetworkSpec)
    open_fractions: list[float] = field(default_factory=lambda: [0.1])
    pool_modes: list[str] = field(default_factory=lambda: ["copy"])
    fitness_modes: list[str] = field(default_factory=lambda: ["f1"])
    methods: list[str] = field(default_factory=lambda: ["fairea", "random", "hungarian"])
    trials: int = 100
    thresholds: list[str] | None = None
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.network, dict):
            self.network = NetworkSpec(**self.network)
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ExperimentError(f"unknown methods {bad}")
        if self.trials < 1:
            raise ExperimentError("trials must be >= 1")
        if self.thresholds is not None:
            self.thresholds = [str(Threshold.parse(t)) for t in self.thresholds]

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    def cells(self) -> list[tuple[float, str, str]]:
        return list(itertools.product(self.open_fractions, self.pool_modes, self.fitness_modes))

    def method_labels(self) -> list[str]:
        out = []
        for m in self.methods:
            if m == "fairea" and self.thresholds:
                out.extend(f"fairea@{t}" for t in self.thresholds)
            else:
                out.append(m)
        return out


@dataclass
class TrialRecord:
    cell: int
    trial: int
    method: str
    seed: int
    status: str  # "ok" | "error"
    error: str = ""
    fit_score: float | None = None
    fs_low: float | None = None
    fs_high: float | None = None
    pif: float | None = None
    ac_before: float | None = None
    ac_after: float | None = None
    pia: float | None = None
    isolation: float | None = None
    notifications: int = 0


@dataclass
class ExperimentReport:
    config: dict
    network: dict
    records: list[TrialRecord]
    aggregates: list[dict]
    seconds: dict[str, float] = field(default_factory=dict)  # wall clock, kept out of to_dict()

    def to_dict(self) -> dict:
        return {"config": self.config, "network": self.network, "aggregates": self.aggregates}

    def aggregate(self, method: str, cell: int = 0) -> dict:
        for a in self.aggregates:
            if a["method"] == method and a["cell"] == cell:
                return a
        raise KeyError((method, cell))


def trial_seed(master: int, cell: int, trial: int) -> int:
    """Seed of one trial; adding trials or cells never changes the seeds of existing ones."""
    return int(np.random.SeedSequence([master, cell, trial]).generate_state(1, np.uint64)[0] >> 1)


def _fairea_config(graph: AttributedGraph, threshold: str | None) -> FairEAConfig:
    if threshold is None or not graph.teams():
        return FairEAConfig()
    return FairEAConfig.uniform(graph, threshold)


def _run_trial(config: ExperimentConfig, graph: AttributedGraph, cell: int, trial: int):
    frac, pool, fit = config.cells()[cell]
    seed = trial_seed(config.seed, cell, trial)
    labels = config.method_labels()
    records: list[TrialRecord] = []
    seconds: dict[str, float] = {}
    try:
        instance = sample_scenario(graph, ScenarioSpec(frac, pool, fit, seed=seed))
        bounds = fit_bounds(instance)
        ac_b = safe_assortativity(instance.graph, restrict_to_filled=True)
    except FairAssignError as exc:
        return [TrialRecord(cell, trial, m, seed, "error", f"{type(exc).__name__}: {exc}") for m in labels], seconds

    for label in labels:
        method, _, threshold = label.partition("@")
        start = time.perf_counter()
        try:
            notes: list[str] = []
            if method == "fairea":
                out = fairea_assign(instance, _fairea_config(instance.graph, threshold or None))
                matching, notes = out.matching, out.notifications
            elif method == "random":
                matching = random_baseline(instance, seed)
            elif method == "hungarian":
                matching = hungarian_baseline(instance)
            else:
                matching = exact_oracle(instance).matching
            rep = evaluate(instance, matching, bounds, ac_b, notes)
            records.append(
                TrialRecord(
                    cell, trial, label, seed, "ok",
                    fit_score=rep.fit_score, fs_low=bounds[0], fs_high=bounds[1], pif=rep.pif,
                    ac_before=rep.ac_before, ac_after=rep.ac_after, pia=rep.pia,
                    isolation=rep.isolation_score, notifications=len(notes),
                )
            )
        except FairAssignError as exc:
            records.append(TrialRecord(cell, trial, label, seed, "error", f"{type(exc).__name__}: {exc}"))
        seconds[label] = time.perf_counter() - start
    return records, seconds


def _stats(values: list[float]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    mean = math.fsum(values) / len(values)
    std = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / len(values))
    return mean, std


def _aggregate(config: ExperimentConfig, records: list[TrialRecord]) -> list[dict]:
    out = []
    for cell, (frac, pool, fit) in enumerate(config.cells()):
        for label in config.method_labels():
            rows = [r for r in records if r.cell == cell and r.method == label]
            ok = [r for r in rows if r.status == "ok"]
            failed = len(rows) - len(ok)
            if failed * 2 > len(rows):
                first = next(r.error for r in rows if r.status == "error")
                raise ExperimentError(f"{label} failed on {failed}/{len(rows)} trials (first: {first})")
            agg = {
                "cell": cell, "open_fraction": frac, "pool": pool, "fitness": fit, "method": label,
                "trials": len(rows), "failed": failed,
                "pia_not_applicable": sum(1 for r in ok if r.pia is None),
            }
            for key in ("pif", "pia", "isolation", "ac_after"):
                mean, std = _stats([getattr(r, key) for r in ok if getattr(r, key) is not None])
                agg[f"{key}_mean"], agg[f"{key}_std"] = mean, std
            agg["notifications_mean"] = _stats([float(r.notifications) for r in ok])[0]
            out.append(agg)
    return out


def _describe(graph: AttributedGraph) -> dict:
    info = {"nodes": graph.n, "edges": graph.n_edges, "k": graph.k,
            "assortativity": safe_assortativity(graph), "isolation": None}
    if graph.teams() and all(p.team is not None for p in graph.positions):
        info["isolation"] = isolation_score(graph)
    return info


def run_experiment(config: ExperimentConfig, graph: AttributedGraph | None = None) -> ExperimentReport:
    """Run every (cell, trial) and aggregate per cell and method.

    Results are sorted by (cell, trial) before aggregation, so running the
    trials in a process pool gives the same report as running them in order.
    """
    if graph is None:
        graph = config.network.build(config.seed)
    jobs = [(cell, trial) for cell in range(len(config.cells())) for trial in range(config.trials)]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            results = list(pool.map(_run_trial, *zip(*[(config, graph, c, t) for c, t in jobs])))
    else:
        results = [_run_trial(config, graph, c, t) for c, t in jobs]
    records: list[TrialRecord] = []
    seconds: dict[str, float] = {}
    for recs, secs in results:
        records.extend(recs)
        for k, v in secs.items():
            seconds[k] = seconds.get(k, 0.0) + v
    records.sort(key=lambda r: (r.cell, r.trial))
    recorded = config.to_dict()
    recorded.pop("workers")  # execution detail; reports must not depend on it
    return ExperimentReport(recorded, _describe(graph), records, _aggregate(config, records), seconds)


def isolation_sweep(config: ExperimentConfig, graph: AttributedGraph | None = None) -> ExperimentReport:
    """FairEA at each isolation threshold (default 0, 2, 5%, 10%, 20% of team size)."""
    if graph is None:
        graph = config.network.build(config.seed)
    if not graph.teams():
        raise ExperimentError("isolation sweep needs team annotations")
    thresholds = config.thresholds or list(SWEEP_THRESHOLDS)
    sweep = ExperimentConfig(**{**config.to_dict(), "methods": ["fairea"], "thresholds": thresholds})
    return run_experiment(sweep, graph)
