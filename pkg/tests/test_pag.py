import copy

import pytest

from fodeploy import analyze, build_pag, degradation_report, to_dot, validate_model
from fodeploy.pag import AnalysisError, survivable_faults
from fodeploy.report import to_json


def alive_sets(pag):
    return {",".join(sorted(v.alive)) for v in pag.vertices.values()}


def tiny(nodes):
    return validate_model({
        "features": [{"id": "f1", "aswcs": ["s1"]}],
        "aswcs": [{"id": "s1", "asil": "D", "fail_op": 1, "wcet_us": 100, "min_ftt_us": 1000}],
        "nodes": [{"id": n, "time_budget_us": 1000, "power_supply": s} for n, s in nodes],
    })


def test_one_fault_shape(model):
    pag = build_pag(model, 1)
    assert alive_sets(pag) == {"e1,e2,e3,e4", "e2,e3,e4", "e1,e3,e4", "e1,e2,e4", "e1,e2,e3", "e2,e4", "e1,e3"}
    assert len(pag.edges) == 6
    labels = sorted(e.cause.label for e in pag.edges)
    assert labels == ["B", "R", "e1", "e2", "e3", "e4"]
    red = next(e for e in pag.edges if e.cause.label == "R")
    assert red.target == frozenset({"e2", "e4"})


def test_single_node_has_no_edges():
    pag = build_pag(tiny([("e1", "red")]), 5)
    assert len(pag.vertices) == 1 and pag.edges == []


def test_same_supply_pair():
    pag = build_pag(tiny([("e1", "red"), ("e2", "red")]), 2)
    assert alive_sets(pag) == {"e1,e2", "e1", "e2"}
    assert all(e.cause.kind == "isolation" for e in pag.edges)
    assert len(pag.edges) == 2


def test_max_faults_must_be_positive(model):
    with pytest.raises(AnalysisError):
        build_pag(model, 0)


@pytest.mark.parametrize("depth", [1, 2, 3])
def test_structure(model, depth):
    pag = build_pag(model, depth)
    central = set(model.central_ids)
    for e in pag.edges:
        assert e.target < e.source  # strict shrink, hence acyclic
    for v in pag.vertices.values():
        assert v.alive and v.fault_depth <= depth
        if v.parent is not None:
            assert pag.vertices[v.parent].fault_depth == v.fault_depth - 1
        # each consumed fault removes one node or every node of one supply
        removed = central - v.alive
        supplies = {s: {n.id for n in model.central_nodes if n.power_supply is s} for s in
                    {n.power_supply for n in model.central_nodes}}
        best = min(len(removed - set().union(*(supplies[s] for s in pick))) + len(pick)
                   for pick in ([], *[[s] for s in supplies], list(supplies)))
        assert best <= v.fault_depth


def test_one_fault_vertex_bound(model):
    assert len(build_pag(model, 1).vertices) <= 1 + 4 + 2


def test_analyze_reference_followup(model, reference_initial):
    pag = analyze(model, 1, reference_initial)
    v = pag.vertices[frozenset({"e2", "e3", "e4"})]
    assert v.result.priority_sum == 29 and v.lost == {"f3"}
    assert pag.root.lost == frozenset()


@pytest.mark.parametrize("use_reference_initial", [True, False])
def test_sc5_keeps_master_everywhere(model, reference_initial, use_reference_initial):
    pag = analyze(model, 3, reference_initial if use_reference_initial else None)
    assert all(v.result.config.placement("sc5").master_present for v in pag.vertices.values())


def test_monotone_along_edges(model, reference_initial):
    pag = analyze(model, 3, reference_initial)
    for e in pag.edges:
        src, dst = pag.vertices[e.source], pag.vertices[e.target]
        assert dst.result.priority_sum <= src.result.priority_sum
        assert src.lost <= dst.lost


def test_survivable_faults(model, reference_initial):
    table = survivable_faults(analyze(model, 3, reference_initial))
    assert table["f5"] == 3
    assert table["f1"] >= 0 and table["f1"] < 3
    assert table["f4"] == 1  # failOp(sc4) = 1


def test_empty_feature_table(model_doc):
    doc = copy.deepcopy(model_doc)
    doc["features"] = []
    for a in doc["aswcs"]:
        a["features"] = []
    report = degradation_report(analyze(validate_model(doc), 1))
    assert report["featureSurvival"] == []


def test_invalid_initial_rejected(model, reference_initial):
    from fodeploy.constraints import DeploymentConfig

    with pytest.raises(AnalysisError):
        analyze(model, 1, DeploymentConfig(reference_initial.placements[:-1]))


def test_workers_do_not_change_results(model):
    a = analyze(model, 2, workers=1)
    b = analyze(model, 2, workers=2)
    assert to_json(degradation_report(a)) == to_json(degradation_report(b))
    assert to_dot(a) == to_dot(b)


def test_unresolved_report_rejected(model):
    with pytest.raises(ValueError):
        degradation_report(build_pag(model, 1))


def test_dot_labels(model, reference_initial):
    dot = to_dot(analyze(model, 1, reference_initial))
    assert '"{e2,e3,e4}" [label="e2,e3,e4\\nsum=29\\nlost: f3"];' in dot
    assert '-> "{e2,e4}" [label="R"];' in dot
    assert dot.startswith("digraph pag {")
