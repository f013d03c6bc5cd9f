import pytest

from fairassign.errors import Infeasible, TargetUnreachable
from fairassign.netcore import graph_assortativity
from fairassign.problem import feasibility_check
from fairassign.synthgen import (
    OrgChartSpec,
    ScenarioSpec,
    generate_org_network,
    generate_scale_free,
    nearest_open,
    plant_attributes,
    sample_scenario,
)


def test_scale_free_size_and_determinism():
    g = generate_scale_free(1000, 4, seed=1)
    assert g.n == 1000 and 3900 <= g.n_edges <= 4000
    assert generate_scale_free(1000, 4, seed=1) == g


@pytest.mark.parametrize("target", [0.39, 0.07, -0.3])
def test_planting_hits_target(target):
    g = generate_scale_free(1000, 4, seed=2)
    planted, r = plant_attributes(g, 0.31, target, seed=2)
    assert abs(r - target) <= 0.01
    assert graph_assortativity(planted) == pytest.approx(r, abs=1e-9)
    assert sum(p.class_index for p in planted.positions) == 310
    assert planted.edges == g.edges


def test_planting_unreachable():
    g = generate_scale_free(50, 2, seed=0)
    with pytest.raises(TargetUnreachable) as info:
        plant_attributes(g, 0.3, 0.99, seed=0, max_steps=200)
    assert info.value.best < 0.99


def test_org_charts():
    fo = generate_org_network(OrgChartSpec.functional(), seed=0)
    do = generate_org_network(OrgChartSpec.divisional(), seed=0)
    assert fo.n == 288 and 2400 <= fo.n_edges <= 2900
    assert do.n == 280
    assert graph_assortativity(fo) >= 0.8 and graph_assortativity(do) >= 0.8
    assert len(fo.teams()) == 12 and len(do.teams()) == 40


def test_scenario_copy_and_double():
    g = plant_attributes(generate_scale_free(300, 3, seed=5), 0.3, 0.3, seed=5)[0]
    copy = sample_scenario(g, ScenarioSpec(0.1, "copy", "f1", seed=1))
    assert copy.m == 30 and copy.t == 30 and feasibility_check(copy)
    double = sample_scenario(g, ScenarioSpec(0.1, "double", "f2", seed=1))
    assert double.t == 60
    for c in double.candidates:
        assert c.class_index == g.position(c.origin).class_index
    assert sample_scenario(g, ScenarioSpec(0.1, "copy", "f1", seed=1)).fitness == copy.fitness
    for (o, c), w in copy.fitness.items():
        assert 0 < w < 1


def test_nearest_open_ties_by_id():
    g = generate_scale_free(30, 2, seed=3)
    ids = g.node_ids[:10]
    near = nearest_open(g, "0", ids, 3)
    assert near[0] == "0" and len(near) == 3


def test_scenario_gives_up_when_never_feasible():
    g = plant_attributes(generate_scale_free(100, 2, seed=5), 0.3, 0.2, tolerance=0.2, seed=5)[0]
    with pytest.raises(Infeasible):
        sample_scenario(g, ScenarioSpec(0.2, "copy", "f1", qualified_per_candidate=1, seed=0))
