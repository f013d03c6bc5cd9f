"""Command line entry point: ``generate``, ``assign`` and ``benchmark``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import fileio
from .errors import (
    ExperimentError,
    FairAssignError,
    GraphError,
    Infeasible,
    IngestError,
    InstanceError,
    MetricError,
    ScaleExceeded,
    TargetUnreachable,
)
from .evaluation import evaluate, exact_oracle, hungarian_baseline, random_baseline
from .fairea import FairEAConfig, Threshold, fairea_assign
from .harness import ExperimentConfig, NetworkSpec, isolation_sweep, run_experiment
from .netcore import graph_assortativity
from .synthgen import ScenarioSpec, sample_scenario

EXIT_OK, EXIT_OTHER, EXIT_VALIDATION, EXIT_INFEASIBLE, EXIT_SCALE = 0, 1, 2, 3, 4


def _seed(args) -> int:
    if args.seed is None:
        args.seed = int(np.random.SeedSequence().entropy % 2**32)
    print(f"seed: {args.seed}")
    return args.seed


def _network_spec(args) -> NetworkSpec:
    return NetworkSpec(
        model=args.model,
        nodes=args.nodes,
        edges_per_node=args.edges_per_node,
        minority=args.minority,
        target_assort=args.target_assort,
    )


def cmd_generate(args) -> int:
    seed = _seed(args)
    try:
        graph = _network_spec(args).build(seed)
    except TargetUnreachable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.open_fraction is not None:
        instance = sample_scenario(graph, ScenarioSpec(args.open_fraction, args.pool, args.fitness, seed=seed))
        fileio.write_bundle(instance, out)
        print(f"open positions: {instance.m}  candidates: {instance.t}")
    else:
        fileio.write_graph(graph, out / "nodes.csv", out / "edges.tsv")
    print(f"nodes: {graph.n}  edges: {graph.n_edges}  classes: {graph.k}")
    if graph.k > 1:
        print(f"assortativity: {graph_assortativity(graph):.6f}")
    return EXIT_OK


def cmd_assign(args) -> int:
    bundle = fileio.FileBundle.in_dir(args.bundle)
    instance = fileio.ingest(bundle, merge=args.merge.split(",") if args.merge else None)
    print(f"open positions: {instance.m}  candidates: {instance.t}  classes: {instance.k}")
    notes: list[str] = []
    if args.method == "fairea":
        config = FairEAConfig()
        if args.threshold is not None:
            if not instance.graph.teams():
                raise InstanceError("--threshold needs a team column in nodes.csv")
            config = FairEAConfig.uniform(instance.graph, Threshold.parse(args.threshold))
        outcome = fairea_assign(instance, config)
        matching, notes = outcome.matching, outcome.notifications
    elif args.method == "random":
        matching = random_baseline(instance, _seed(args))
    elif args.method == "hungarian":
        matching = hungarian_baseline(instance)
    else:
        matching = exact_oracle(instance).matching
    report = evaluate(instance, matching, notifications=notes)
    metrics = {
        "method": args.method,
        "seed": args.seed,
        "threshold": args.threshold,
        "fs_a": report.fit_score,
        "fs_l": report.fit_bounds[0],
        "fs_h": report.fit_bounds[1],
        "pif": report.pif,
        "ac_b": report.ac_before,
        "ac_a": report.ac_after,
        "pia": report.pia,
        "isolation": report.isolation_score,
        "notifications": report.notifications,
    }
    text = fileio.dump_json(metrics)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        fileio._write_text(out / "matching.csv", fileio.format_matching(matching))
        fileio._write_text(out / "metrics.json", text)
    else:
        sys.stdout.write(fileio.format_matching(matching))
    sys.stdout.write(text)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    if args.config:
        data = fileio.read_json(args.config)
        try:
            config = ExperimentConfig.from_dict(data)
        except TypeError as exc:
            raise ExperimentError(f"bad config: {exc}") from exc
        for name in ("trials", "seed", "workers"):
            value = getattr(args, name)
            if value is not None:
                setattr(config, name, value)
        print(f"seed: {config.seed}")
    else:
        config = ExperimentConfig(
            network=_network_spec(args),
            open_fractions=[args.open_fraction if args.open_fraction is not None else 0.1],
            pool_modes=[args.pool],
            fitness_modes=[args.fitness],
            methods=args.methods.split(","),
            trials=args.trials or 100,
            thresholds=args.threshold.split(",") if args.threshold else None,
            seed=_seed(args),
            workers=args.workers or 1,
        )
    report = isolation_sweep(config) if args.sweep else run_experiment(config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    fileio.write_json(out / "report.json", report.to_dict())
    fileio._write_text(out / "trials.csv", fileio.trial_table(report.records))
    for agg in report.aggregates:
        pia = "n/a" if agg["pia_mean"] is None else f"{agg['pia_mean']:.2f}"
        pif = "n/a" if agg["pif_mean"] is None else f"{agg['pif_mean']:.2f}"
        print(f"cell {agg['cell']} {agg['method']:<14} pif {pif:>7}  pia {pia:>7}  failed {agg['failed']}")
    for method, secs in sorted(report.seconds.items()):
        print(f"time {method}: {secs:.2f}s", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairassign", description="Diversity-aware assignment of candidates to open positions.")
    sub = parser.add_subparsers(dest="command", required=True)

    def network_flags(p):
        p.add_argument("--model", choices=["sf", "fo", "do"], default="sf")
        p.add_argument("--nodes", type=int, default=1000)
        p.add_argument("--edges-per-node", type=int, default=4)
        p.add_argument("--minority", type=float, default=0.31)
        p.add_argument("--target-assort", type=float, default=0.39)

    def scenario_flags(p, open_default=None):
        p.add_argument("--open-fraction", type=float, default=open_default)
        p.add_argument("--pool", choices=["copy", "double"], default="copy")
        p.add_argument("--fitness", choices=["f1", "f2"], default="f1")

    g = sub.add_parser("generate", help="write a synthetic network, optionally with a sampled scenario")
    network_flags(g)
    scenario_flags(g)
    g.add_argument("--seed", type=int)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("assign", help="assign candidates for a file bundle")
    a.add_argument("bundle", help="directory holding nodes.csv, edges.tsv, candidates.csv, fitness.csv")
    a.add_argument("--method", choices=["fairea", "random", "hungarian", "oracle"], default="fairea")
    a.add_argument("--threshold", help="per-team minimum class count: integer, or fraction of team size")
    a.add_argument("--merge", help="comma-separated columns to merge into the class attribute")
    a.add_argument("--seed", type=int)
    a.add_argument("--out")
    a.set_defaults(func=cmd_assign)

    b = sub.add_parser("benchmark", help="run repeated trials and write report.json and trials.csv")
    b.add_argument("--config", help="JSON experiment config; flags below override trials/seed/workers")
    network_flags(b)
    scenario_flags(b)
    b.add_argument("--methods", default="fairea,random,hungarian")
    b.add_argument("--threshold", help="comma-separated FairEA thresholds")
    b.add_argument("--sweep", action="store_true", help="FairEA isolation sweep over thresholds")
    b.add_argument("--trials", type=int)
    b.add_argument("--seed", type=int)
    b.add_argument("--workers", type=int)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (IngestError, InstanceError, GraphError, ExperimentError, MetricError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Infeasible as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ScaleExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCALE
    except FairAssignError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())
