"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""

import math
import random
import subprocess
import sys
import time

import networkx as nx
import numpy as np
import pytest

from fairassign.evaluation import evaluate, exact_oracle, fit_bounds, isolation_score
from fairassign.fairea import FairEAConfig, Threshold, fairea_assign
from fairassign.harness import ExperimentConfig, NetworkSpec, run_experiment
from fairassign.matching import BipartiteWeights, max_weight_complete_matching, min_weight_complete_matching
from fairassign.netcore import graph_assortativity
from fairassign.pareto import front_levels
from fairassign.problem import apply_matching, matching_violations
from fairassign.synthgen import (
    OrgChartSpec,
    ScenarioSpec,
    generate_org_network,
    generate_scale_free,
    plant_attributes,
    sample_scenario,
)

from conftest import CRITERIA_LINES, make_graph


def verdict(number, ok, detail):
    with_status = f"CRITERION {number}: {'PASS' if ok else 'FAIL'} ({detail})"
    CRITERIA_LINES.append(with_status)
    assert ok, with_status


# 1. exact weighted matching


def enumerate_totals(bw):
    """Every left-covering matching's total, by depth-first enumeration of injections."""
    totals = []
    rows = [[(bw.right[c], w) for c, w in row] for row in bw._adj]

    def walk(x, used, picked):
        if x == len(rows):
            totals.append(math.fsum(picked))
            return
        for c, w in rows[x]:
            if c not in used:
                used.add(c)
                picked.append(w)
                walk(x + 1, used, picked)
                picked.pop()
                used.discard(c)

    walk(0, set(), [])
    return totals


def test_criterion_1_matching_exactness():
    rnd = random.Random(2024)
    mismatches, checked, solver_time = 0, 0, 0.0
    while checked < 500:
        m = rnd.randint(1, 7)
        left = [f"o{i}" for i in range(m)]
        right = [f"c{j}" for j in range(m + rnd.randint(0, 1))]
        w = {(o, c): round(rnd.uniform(0.01, 1), rnd.choice([2, 17])) for o in left for c in right if rnd.random() < 0.7}
        bw = BipartiteWeights(left, right, w)
        totals = enumerate_totals(bw)
        if not totals:
            continue
        checked += 1
        start = time.perf_counter()
        hi = max_weight_complete_matching(bw).total
        lo = min_weight_complete_matching(bw).total
        solver_time += time.perf_counter() - start
        mismatches += (hi != max(totals)) + (lo != min(totals))
    verdict(1, mismatches == 0 and solver_time < 10, f"{checked} instances, {mismatches} mismatches, {solver_time:.2f}s")


# 2. assortativity


def direct_assortativity(classes, edges, k):
    same = sum(1 for a, b in edges if classes[a] == classes[b]) / len(edges)
    ends = [0] * k
    for a, b in edges:
        ends[classes[a]] += 1
        ends[classes[b]] += 1
    s = sum((e / (2 * len(edges))) ** 2 for e in ends)
    return (same - s) / (1 - s)


def test_criterion_2_assortativity():
    rng = np.random.default_rng(11)
    worst, checked = 0.0, 0
    while checked < 1000:
        n = int(rng.integers(2, 201))
        k = int(rng.integers(2, 5))
        p = float(rng.uniform(0.01, 0.3))
        g = nx.gnp_random_graph(n, p, seed=int(rng.integers(2**31)))
        edges = list(g.edges())
        classes = rng.integers(0, k, n).tolist()
        if not edges or len({classes[x] for e in edges for x in e}) < 2:
            continue
        checked += 1
        ours = graph_assortativity(make_graph(classes, edges, k))
        worst = max(worst, abs(ours - direct_assortativity(classes, edges, k)))
    intra = graph_assortativity(make_graph([0, 0, 1, 1, 2, 2], [(0, 1), (2, 3), (4, 5)], 3))
    inter = graph_assortativity(make_graph([0, 1, 0, 1], [(0, 1), (1, 2), (2, 3)], 2))
    ok = worst <= 1e-9 and intra == 1.0 and inter == -1.0
    verdict(2, ok, f"{checked} graphs, max |diff| {worst:.2e}, all-intra {intra}, all-inter {inter}")


# 3. Pareto layering


def brute_levels(points):
    """O(n^2): level = 1 + deepest level among dominators, visiting points best-first."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    ge = (pts[:, None, 0] >= pts[None, :, 0]) & (pts[:, None, 1] >= pts[None, :, 1])
    differ = (pts[:, None, :] != pts[None, :, :]).any(axis=2)
    dominates = ge & differ  # dominates[j, i]: j dominates i
    levels = np.zeros(n, dtype=int)
    for i in sorted(range(n), key=lambda i: (-pts[i, 0], -pts[i, 1])):
        dom = dominates[:, i]
        levels[i] = 1 + (levels[dom].max() if dom.any() else 0)
    return levels.tolist()


def test_criterion_3_pareto_layers():
    rng = np.random.default_rng(5)
    bad = 0
    for s in range(200):
        n = int(rng.integers(0, 501))
        if s % 2:
            pts = list(zip(rng.integers(0, 20, n).tolist(), rng.integers(0, 3, n).tolist()))
        else:
            pts = list(zip(rng.random(n).round(2).tolist(), rng.choice([0.0, 1.0], n).tolist()))
        bad += front_levels(pts) != brute_levels(pts)
    verdict(3, bad == 0, f"200 score sets, {bad} mismatches")


# 4. FairEA validity


def small_org(layout, seed):
    if layout == "functional":
        spec = OrgChartSpec.functional(units=6, unit_size=10, groups=3, cross_unit_edges=40)
    else:
        spec = OrgChartSpec.divisional(units=12, unit_size=6, groups=3, cross_unit_edges=12)
    return generate_org_network(spec, seed=seed)


def threshold_satisfied_or_notified(inst, outcome, config):
    after = apply_matching(inst, outcome.matching)
    teams = after.teams()
    for team, t in config.isolation_thresholds.items():
        need = Threshold.parse(t).resolve(len(teams[team]))
        counts = [0] * after.k
        for node in teams[team]:
            counts[after.position(node).class_index] += 1
        if min(counts) < need and team not in outcome.notifications:
            return False
    return True


def test_criterion_4_fairea_validity():
    graphs = []
    for seed in range(8):
        sf = generate_scale_free(int(60 + 20 * seed), 3, seed=seed)
        graphs.append(plant_attributes(sf, 0.3, 0.3, tolerance=0.05, seed=seed)[0])
        graphs.append(small_org("functional", seed))
        graphs.append(small_org("divisional", seed))
    rng = random.Random(99)
    invalid, unmet, with_teams, done = 0, 0, 0, 0
    while done < 1000:
        g = graphs[done % len(graphs)]
        spec = ScenarioSpec(
            open_fraction=rng.choice([0.05, 0.1, 0.2, 0.3]),
            pool_mode=rng.choice(["copy", "double"]),
            fitness_mode=rng.choice(["f1", "f2"]),
            seed=rng.randrange(2**31),
        )
        inst = sample_scenario(g, spec)
        config = FairEAConfig()
        if g.teams():
            config = FairEAConfig.uniform(g, rng.choice(["0", "2", "0.05", "0.1", "0.2"]))
            with_teams += 1
        outcome = fairea_assign(inst, config)
        invalid += bool(matching_violations(inst, outcome.matching))
        unmet += not threshold_satisfied_or_notified(inst, outcome, config)
        done += 1
    verdict(4, invalid == 0 and unmet == 0, f"1000 instances ({with_teams} with thresholds), {invalid} invalid, {unmet} unmet and unnotified")


# 5 and 6. SF(H) benchmark


@pytest.fixture(scope="module")
def sf_benchmark():
    config = ExperimentConfig(
        network=NetworkSpec("sf", nodes=1000, edges_per_node=4, minority=0.31, target_assort=0.39),
        open_fractions=[0.1], pool_modes=["copy"], fitness_modes=["f1"],
        methods=["fairea", "random", "hungarian"], trials=100, seed=1,
    )
    graph = config.network.build(config.seed)
    return graph, run_experiment(config, graph)


def test_criterion_5_sf_benchmark_targets(sf_benchmark):
    graph, rep = sf_benchmark
    r = graph_assortativity(graph)
    fa, rnd = rep.aggregate("fairea"), rep.aggregate("random")
    ok = (
        abs(r - 0.39) <= 0.05
        and fa["pif_mean"] >= 90 and fa["pia_mean"] >= 20
        and fa["pif_mean"] > rnd["pif_mean"] and fa["pia_mean"] > rnd["pia_mean"]
    )
    detail = (f"r={r:.3f}, edges={graph.n_edges}; fairea pif {fa['pif_mean']:.1f} pia {fa['pia_mean']:.1f}; "
              f"random pif {rnd['pif_mean']:.1f} pia {rnd['pia_mean']:.1f}; targets pif>=90 pia>=20")
    verdict(5, ok, detail)


def test_criterion_6_ordering(sf_benchmark):
    _, rep = sf_benchmark
    fa, rnd, hu = rep.aggregate("fairea"), rep.aggregate("random"), rep.aggregate("hungarian")
    dominated = (rnd["pif_mean"] >= fa["pif_mean"] and rnd["pia_mean"] >= fa["pia_mean"]
                 and (rnd["pif_mean"] > fa["pif_mean"] or rnd["pia_mean"] > fa["pia_mean"]))

    pifs = []
    g = plant_attributes(generate_scale_free(60, 3, seed=3), 0.31, 0.39, tolerance=0.05, seed=3)[0]
    for seed in range(30):
        inst = sample_scenario(g, ScenarioSpec(0.1, "copy", "f1", seed=seed))  # 6 open positions
        assert inst.m <= 6
        oracle = exact_oracle(inst, weight_on_diversity=1.0)
        bounds = fit_bounds(inst)
        best = evaluate(inst, oracle.matching, bounds).pif
        pifs.append(best - evaluate(inst, fairea_assign(inst).matching, bounds).pif)
    gap = sum(pifs) / len(pifs)
    ok = hu["pia_mean"] >= rnd["pia_mean"] and not dominated and gap <= 10
    detail = (f"hungarian pia {hu['pia_mean']:.1f} vs random {rnd['pia_mean']:.1f}; fairea dominated by random: {dominated}; "
              f"mean pif gap to fitness oracle on 6-position instances {gap:.1f}")
    verdict(6, ok, detail)


# 7. isolation sweep on org charts


def test_criterion_7_isolation_sweep():
    lines, ok = [], True
    for model in ("fo", "do"):
        graph = NetworkSpec(model).build(3)
        r0 = graph_assortativity(graph)
        iso0 = isolation_score(graph)
        base = dict(network=NetworkSpec(model), open_fractions=[0.2], methods=["fairea"], trials=20, seed=3)
        rep = run_experiment(ExperimentConfig(**base, thresholds=["0", "0.2"]), graph)
        pia = rep.aggregate("fairea@0")["pia_mean"]
        iso = rep.aggregate("fairea@0.2")["isolation_mean"]
        ok &= r0 >= 0.8 and pia >= 50 and iso > iso0
        lines.append(f"{model}: r={r0:.3f}, |AC| reduction {pia:.1f}% at t=0, isolation {iso0:.3f} -> {iso:.3f} at t=0.2")
    verdict(7, ok, "; ".join(lines))


# 8. CLI determinism


def run_cli(*args, cwd):
    proc = subprocess.run([sys.executable, "-m", "fairassign", *args], cwd=cwd, capture_output=True, text=True)
    return proc.returncode, proc.stdout


def test_criterion_8_cli_determinism(tmp_path):
    def session(root):
        root.mkdir()
        outs = []
        outs.append(run_cli("generate", "--model", "sf", "--nodes", "300", "--edges-per-node", "3", "--minority", "0.31",
                            "--target-assort", "0.39", "--open-fraction", "0.1", "--seed", "7", "--out", "bundle", cwd=root))
        for method in ("fairea", "random", "hungarian"):
            outs.append(run_cli("assign", "bundle", "--method", method, "--seed", "3", "--out", f"a_{method}", cwd=root))
        for workers in ("1", "2"):
            outs.append(run_cli("benchmark", "--nodes", "300", "--edges-per-node", "3", "--target-assort", "0.3",
                                "--trials", "4", "--seed", "5", "--workers", workers, "--out", f"b{workers}", cwd=root))
        outs.append(run_cli("benchmark", "--model", "fo", "--open-fraction", "0.2", "--sweep", "--trials", "2",
                            "--seed", "1", "--workers", "2", "--out", "sweep", cwd=root))
        files = {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}
        return outs, files

    outs1, files1 = session(tmp_path / "one")
    outs2, files2 = session(tmp_path / "two")
    codes_ok = all(code == 0 for code, _ in outs1)
    same = outs1 == outs2 and files1 == files2
    par = all(files1[f"b1/{n}"] == files1[f"b2/{n}"] for n in ("report.json", "trials.csv"))
    verdict(8, codes_ok and same and par, f"{len(files1)} files, repeat identical: {same}, sequential == parallel: {par}")
