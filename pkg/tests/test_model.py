import copy
import random

import pytest
from hypothesis import given, settings, strategies as st

from fodeploy import ModelValidationError, SchemaError, check_model, derive_clusters, validate_model
from fodeploy.model import Aswc, AswcCluster, derive_cluster_properties, model_to_dict
from randmodels import random_model_doc


def codes(doc):
    return [v.code for v in check_model(doc)]


def test_example_is_valid(model):
    assert len(model.features) == 5
    assert len(model.aswcs) == 8
    assert model.central_ids == ("e1", "e2", "e3", "e4")
    assert model.frt == 50_000


def test_example_clusters(model):
    assert {c.id: c.members for c in model.clusters} == {
        "sc1": ("s1",), "sc2": ("s2", "s3"), "sc3": ("s4",), "sc4": ("s5",), "sc5": ("s6", "s7", "s8"),
    }


def test_no_central_node(model_doc):
    doc = copy.deepcopy(model_doc)
    for n in doc["nodes"]:
        n["kind"] = "peripheral"
    assert "NO_CENTRAL_NODE" in codes(doc)
    with pytest.raises(ModelValidationError) as err:
        validate_model(doc)
    assert any(v.code == "NO_CENTRAL_NODE" for v in err.value.violations)


def test_chi_inconsistent(model_doc):
    doc = copy.deepcopy(model_doc)
    f3 = next(f for f in doc["features"] if f["id"] == "f3")
    f3["aswcs"].remove("s5")
    assert codes(doc) == ["CHI_INCONSISTENT"]


def test_violations_are_collected_not_fail_fast(model_doc):
    doc = copy.deepcopy(model_doc)
    doc["aswcs"][0]["wcet_us"] = 0
    doc["aswcs"][1]["asil"] = 7
    doc["aswcs"].append(dict(doc["aswcs"][2]))
    doc["features"][0]["aswcs"].append("s99")
    got = codes(doc)
    for code in ("NON_POSITIVE_DURATION", "ASIL_OUT_OF_RANGE", "DUPLICATE_ID", "DANGLING_REF"):
        assert code in got


def test_negative_fail_op_and_empty_feature(model_doc):
    doc = copy.deepcopy(model_doc)
    doc["aswcs"][0]["fail_op"] = -1
    doc["features"].append({"id": "f9", "aswcs": []})
    got = codes(doc)
    assert "NEGATIVE_FAIL_OP" in got and "EMPTY_FEATURE" in got


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("nodes"),
    lambda d: d["aswcs"][0].pop("wcet_us"),
    lambda d: d["aswcs"][0].__setitem__("wcet_us", 1.5),
    lambda d: d["aswcs"][0].__setitem__("asil", "E"),
    lambda d: d["nodes"][0].__setitem__("power_supply", "green"),
    lambda d: d["nodes"][0].pop("time_budget_us"),
])
def test_schema_errors(model_doc, mutate):
    doc = copy.deepcopy(model_doc)
    mutate(doc)
    with pytest.raises(SchemaError):
        validate_model(doc)


def test_asil_accepts_integers(model_doc):
    doc = copy.deepcopy(model_doc)
    for a in doc["aswcs"]:
        a["asil"] = {"QM": 0, "A": 1, "B": 2, "C": 3, "D": 4}[a["asil"]]
    assert validate_model(doc).clusters == validate_model(model_doc).clusters


def test_aswc_features_default_from_feature_side(model_doc):
    doc = copy.deepcopy(model_doc)
    for a in doc["aswcs"]:
        del a["features"]
    m = validate_model(doc)
    assert m.aswc("s5").features == ("f3", "f4")


def test_derive_clusters_trivial_cases():
    assert derive_clusters([]) == []
    same = [Aswc(f"s{i}", f"s{i}", 100, 4, 3, 1000, ()) for i in range(3)]
    assert [c.members for c in derive_clusters(same)] == [("s0", "s1", "s2")]


def test_cluster_properties_sc5(model):
    # 1000 + 1000 + 500 us; priorities 4 + 3 + 2 and 4 + 3 + 1
    sc5 = model.cluster("sc5")
    assert (sc5.sum_wcets, sc5.prio_points_master, sc5.prio_points_hot_slave) == (2500, 9, 8)
    assert sc5.min_ftt == 20_000 and sc5.hot_standby_slave_req


def test_cluster_properties_reference_values(model):
    assert model.cluster("sc3").prio_points_master == 5
    assert model.cluster("sc4").prio_points_hot_slave == 6
    for cid in ("sc1", "sc2", "sc3"):
        assert model.cluster(cid).hot_standby_slave_req is False


def test_cold_standby_when_ftt_exceeds_frt():
    a = [Aswc("s1", "s1", 100, 2, 1, 80_000, ())]
    c = derive_cluster_properties(AswcCluster("sc1", ("s1",)), a, frt=50_000)
    assert c.fail_op == 1 and not c.hot_standby_slave_req


def test_heterogeneous_cluster_rejected():
    members = [Aswc("s1", "s1", 100, 2, 1, 1000, ()), Aswc("s2", "s2", 100, 3, 1, 1000, ())]
    with pytest.raises(ModelValidationError) as err:
        derive_cluster_properties(AswcCluster("sc1", ("s1", "s2")), members, 50_000)
    assert err.value.violations[0].code == "CLUSTER_NOT_HOMOGENEOUS"


def test_explicit_clusters(model_doc):
    doc = copy.deepcopy(model_doc)
    doc["clusters"] = [
        {"id": "a", "members": ["s1"], "prio_points_master": 20},
        {"id": "b", "members": ["s2", "s3"]},
        {"id": "c", "members": ["s4"]},
        {"id": "d", "members": ["s5"]},
        {"id": "e", "members": ["s6", "s7", "s8"], "prio_points_hot_slave": 1},
    ]
    m = validate_model(doc)
    assert m.cluster("a").prio_points_master == 20
    assert m.cluster("a").prio_points_hot_slave == 1
    assert m.cluster("e").prio_points_hot_slave == 1
    assert m.cluster("e").prio_points_master == 9

    doc["clusters"][1]["members"].append("s4")
    doc["clusters"][0]["members"].append("s5")
    got = codes(doc)
    assert "CLUSTER_PARTITION" in got and "CLUSTER_NOT_HOMOGENEOUS" in got


def test_model_round_trip(model):
    assert validate_model(model_to_dict(model)) == model


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_cluster_invariants_on_random_models(seed):
    m = validate_model(random_model_doc(random.Random(seed)))
    members = [s for c in m.clusters for s in c.members]
    assert sorted(members) == sorted(a.id for a in m.aswcs)
    for c in m.clusters:
        for s in c.members:
            a = m.aswc(s)
            assert (a.asil, a.fail_op) == (c.asil, c.fail_op)
        assert c.min_ftt == min(m.aswc(s).min_ftt for s in c.members)
        assert c.sum_wcets == sum(m.aswc(s).wcet for s in c.members)
        assert c.prio_points_master == c.prio_points_hot_slave + 1
    for f in m.features:
        for a in m.aswcs:
            assert (a.id in f.realized_by) == (f.id in a.features)
    # idempotent: regrouping the clustered ASWCs in cluster order yields the same groups
    ordered = [m.aswc(s) for c in m.clusters for s in c.members]
    assert [c.members for c in derive_clusters(ordered)] == [c.members for c in m.clusters]
