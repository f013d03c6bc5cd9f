import itertools
import math

import pytest

from fairassign.errors import Infeasible, MetricError, ScaleExceeded
from fairassign.evaluation import (
    evaluate,
    exact_oracle,
    fit_bounds,
    hungarian_baseline,
    isolation_score,
    percentage_improvement_assortativity,
    percentage_improvement_fitness,
    random_baseline,
    safe_assortativity,
)
from fairassign.problem import apply_matching, matching_violations, overall_fit_score
from fairassign.synthgen import ScenarioSpec, generate_scale_free, plant_attributes, sample_scenario

from conftest import make_graph, make_instance


def complete_matchings(inst):
    positions = sorted(inst.open_positions)
    for perm in itertools.permutations([c.id for c in inst.candidates], len(positions)):
        m = dict(zip(positions, perm))
        if all(inst.weight(o, c) > 0 for o, c in m.items()):
            yield m


@pytest.fixture(scope="module")
def tiny_instances():
    out = []
    for seed in range(8):
        g = plant_attributes(generate_scale_free(14, 2, seed=seed), 0.3, 0.1, tolerance=0.3, seed=seed)[0]
        out.append(sample_scenario(g, ScenarioSpec(0.35, "double" if seed % 2 else "copy", "f1", qualified_per_candidate=2, seed=seed)))
    return out


def test_percentages():
    assert percentage_improvement_fitness(7, 5, 9) == 50.0
    assert percentage_improvement_fitness(3, 3, 3) == 100.0
    with pytest.raises(MetricError):
        percentage_improvement_fitness(10, 5, 9)
    assert percentage_improvement_assortativity(0.4, -0.1) == pytest.approx(75.0)
    with pytest.raises(MetricError):
        percentage_improvement_assortativity(0.0, 0.1)


def test_isolation_score():
    g = make_graph([0, 0, 1, 1, 1], [(0, 1)], teams=["T", "T", "T", "U", "U"])
    assert isolation_score(g) == pytest.approx((1 / 3 + 0) / 2)
    with pytest.raises(MetricError):
        isolation_score(make_graph([0, 1], [(0, 1)]))


def test_bounds_and_oracle_match_enumeration(tiny_instances):
    for inst in tiny_instances:
        totals = [overall_fit_score(inst, m) for m in complete_matchings(inst)]
        lo, hi = fit_bounds(inst)
        assert lo == pytest.approx(min(totals), abs=1e-12) and hi == pytest.approx(max(totals), abs=1e-12)
        res = exact_oracle(inst)
        assert res.count == len(totals)
        assert overall_fit_score(inst, res.matching) == pytest.approx(hi, abs=1e-12)


def test_oracle_front_is_nondominated(tiny_instances):
    for inst in tiny_instances:
        res = exact_oracle(inst, weight_on_diversity=0.0)
        outcomes = []
        for m in complete_matchings(inst):
            ac = safe_assortativity(apply_matching(inst, m))
            outcomes.append((overall_fit_score(inst, m), abs(ac)))
        assert res.objective == pytest.approx(-min(a for _, a in outcomes), abs=1e-12)
        for f, a, _ in res.pareto:
            assert not any(f2 >= f and a2 <= a and (f2 > f + 1e-12 or a2 < a - 1e-12) for f2, a2 in outcomes)


def test_oracle_scale_limit(tiny_instances):
    with pytest.raises(ScaleExceeded):
        exact_oracle(tiny_instances[0], limit=1)


def test_random_baseline_seeded(tiny_instances):
    for seed, inst in enumerate(tiny_instances):
        m = random_baseline(inst, seed)
        assert matching_violations(inst, m) == []
        assert random_baseline(inst, seed) == m


def test_random_baseline_fallback_path():
    # one position blocks a greedy draw often; the fallback must still return a complete matching
    g = make_graph([0, None, None, None], [(0, 1), (1, 2), (2, 3)])
    fit = {("n1", "a"): 0.5, ("n2", "a"): 0.5, ("n2", "b"): 0.5, ("n3", "a"): 0.5, ("n3", "b"): 0.5, ("n3", "c"): 0.5}
    inst = make_instance(g, [("a", 0), ("b", 1), ("c", 1)], fit)
    assert random_baseline(inst, 0) == {"n1": "a", "n2": "b", "n3": "c"}


def test_hungarian_without_diversity_signal_maximises_fitness():
    g = make_graph([0, None, None], [(0, 1), (0, 2)])
    fit = {("n1", "a"): 0.9, ("n1", "b"): 0.8, ("n2", "a"): 0.7, ("n2", "b"): 0.1}
    inst = make_instance(g, [("a", 0), ("b", 0)], fit)
    assert hungarian_baseline(inst) == {"n1": "b", "n2": "a"}


def test_infeasible_baselines():
    g = make_graph([0, None, None], [(0, 1), (1, 2)])
    inst = make_instance(g, [("a", 0), ("b", 0)], {("n1", "a"): 0.5, ("n2", "a"): 0.5})
    with pytest.raises(Infeasible):
        random_baseline(inst, 0)


def test_evaluate_report(tiny_instances):
    inst = tiny_instances[0]
    m = hungarian_baseline(inst)
    rep = evaluate(inst, m)
    assert rep.fit_bounds[0] - 1e-12 <= rep.fit_score <= rep.fit_bounds[1] + 1e-12
    assert 0 <= rep.pif <= 100
    assert rep.ac_before == pytest.approx(safe_assortativity(inst.graph, restrict_to_filled=True))
    assert math.isclose(rep.ac_after, safe_assortativity(apply_matching(inst, m)))
