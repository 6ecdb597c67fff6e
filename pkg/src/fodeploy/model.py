"""Domain types for vehicles, software architecture and execution hardware.

All durations are integer microseconds.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Mapping, Sequence

DEFAULT_FRT_US = 50_000

ASIL_LEVELS = {"QM": 0, "A": 1, "B": 2, "C": 3, "D": 4}
ASIL_NAMES = {v: k for k, v in ASIL_LEVELS.items()}


def natural_key(ident: str) -> tuple:
    """Sort key that orders ``e2`` before ``e10``."""
    return tuple(int(tok) if tok.isdigit() else tok for tok in re.split(r"(\d+)", ident))


class NodeKind(str, Enum):
    CENTRAL = "central"
    PERIPHERAL = "peripheral"


class PowerSupply(str, Enum):
    RED = "red"
    BLUE = "blue"

    @property
    def label(self) -> str:
        return self.value[0].upper()


@dataclass(frozen=True)
class Violation:
    """One broken rule. ``code`` is machine-readable, ``detail`` is for humans."""

    code: str
    cluster: str | None = None
    node: str | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {"code": self.code, "cluster": self.cluster, "node": self.node, "detail": self.detail}


class SchemaError(ValueError):
    """The input document is structurally malformed (missing keys, wrong types)."""


class ModelValidationError(ValueError):
    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        summary = "; ".join(f"{v.code}: {v.detail}" for v in self.violations[:5])
        super().__init__(f"{len(self.violations)} model violation(s): {summary}")


@dataclass(frozen=True)
class Feature:
    id: str
    name: str
    realized_by: tuple[str, ...]


@dataclass(frozen=True)
class Aswc:
    id: str
    name: str
    wcet: int
    asil: int
    fail_op: int
    min_ftt: int
    features: tuple[str, ...]


@dataclass(frozen=True)
class AswcCluster:
    id: str
    members: tuple[str, ...]
    asil: int = 0
    fail_op: int = 0
    min_ftt: int = 0
    sum_wcets: int = 0
    hot_standby_slave_req: bool = False
    prio_points_master: int | None = None
    prio_points_hot_slave: int | None = None


@dataclass(frozen=True)
class ExecutionNode:
    id: str
    name: str
    kind: NodeKind
    total_time_budget: int
    power_supply: PowerSupply

    @property
    def is_central(self) -> bool:
        return self.kind is NodeKind.CENTRAL


@dataclass(frozen=True)
class FaultScenario:
    isolated_nodes: frozenset[str] = frozenset()
    fault_count: int = 0

    def __post_init__(self):
        object.__setattr__(self, "isolated_nodes", frozenset(self.isolated_nodes))
        if self.fault_count < 0:
            raise ValueError("fault_count must be non-negative")

    def to_dict(self) -> dict:
        return {"isolated": sorted(self.isolated_nodes, key=natural_key), "faultCount": self.fault_count}


@dataclass(frozen=True)
class SystemModel:
    """A validated, immutable system. Build it with :func:`validate_model`."""

    features: tuple[Feature, ...]
    aswcs: tuple[Aswc, ...]
    clusters: tuple[AswcCluster, ...]
    nodes: tuple[ExecutionNode, ...]
    frt: int = DEFAULT_FRT_US
    links: tuple[tuple[str, str], ...] = ()
    _index: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        idx = self._index
        idx["aswc"] = {a.id: a for a in self.aswcs}
        idx["cluster"] = {c.id: c for c in self.clusters}
        idx["node"] = {n.id: n for n in self.nodes}
        idx["feature"] = {f.id: f for f in self.features}
        idx["cluster_of"] = {m: c.id for c in self.clusters for m in c.members}

    def aswc(self, aswc_id: str) -> Aswc:
        return self._index["aswc"][aswc_id]

    def cluster(self, cluster_id: str) -> AswcCluster:
        return self._index["cluster"][cluster_id]

    def node(self, node_id: str) -> ExecutionNode:
        return self._index["node"][node_id]

    def feature(self, feature_id: str) -> Feature:
        return self._index["feature"][feature_id]

    def has_node(self, node_id: str) -> bool:
        return node_id in self._index["node"]

    def has_cluster(self, cluster_id: str) -> bool:
        return cluster_id in self._index["cluster"]

    def cluster_of(self, aswc_id: str) -> str:
        return self._index["cluster_of"][aswc_id]

    @property
    def central_nodes(self) -> tuple[ExecutionNode, ...]:
        return tuple(n for n in self.nodes if n.is_central)

    @property
    def central_ids(self) -> tuple[str, ...]:
        return tuple(n.id for n in self.central_nodes)


def derive_clusters(aswcs: Iterable[Aswc]) -> list[AswcCluster]:
    """Group ASWCs by ``(asil, fail_op)``.

    Cluster ids are ``sc1, sc2, ...`` in order of each group's first member.
    Derived properties are left at their defaults; see
    :func:`derive_cluster_properties`.
    """
    groups: dict[tuple[int, int], list[str]] = {}
    for a in aswcs:
        groups.setdefault((a.asil, a.fail_op), []).append(a.id)
    return [AswcCluster(id=f"sc{i}", members=tuple(m)) for i, m in enumerate(groups.values(), start=1)]


def derive_cluster_properties(cluster: AswcCluster, members: Sequence[Aswc], frt: int) -> AswcCluster:
    """Fill asil, failOp, minFTT, sumWcets, hot-standby requirement and priorities.

    Raises ModelValidationError (CLUSTER_NOT_HOMOGENEOUS) if members disagree
    on ASIL or fail-operational level.
    """
    if not members:
        raise ModelValidationError([Violation("EMPTY_CLUSTER", cluster=cluster.id, detail="cluster has no members")])
    classes = {(m.asil, m.fail_op) for m in members}
    if len(classes) > 1:
        raise ModelValidationError([Violation(
            "CLUSTER_NOT_HOMOGENEOUS", cluster=cluster.id,
            detail=f"members have (asil, failOp) pairs {sorted(classes)}")])
    asil, fail_op = classes.pop()
    min_ftt = min(m.min_ftt for m in members)
    pm = cluster.prio_points_master
    ps = cluster.prio_points_hot_slave
    return AswcCluster(
        id=cluster.id,
        members=tuple(m.id for m in members),
        asil=asil,
        fail_op=fail_op,
        min_ftt=min_ftt,
        sum_wcets=sum(m.wcet for m in members),
        hot_standby_slave_req=fail_op > 0 and min_ftt < frt,
        prio_points_master=asil + fail_op + 2 if pm is None else pm,
        prio_points_hot_slave=asil + fail_op + 1 if ps is None else ps,
    )


# --- raw document parsing -------------------------------------------------

def _req(obj: Mapping, key: str, where: str) -> Any:
    if not isinstance(obj, Mapping):
        raise SchemaError(f"{where}: expected an object")
    if key not in obj:
        raise SchemaError(f"{where}: missing key '{key}'")
    return obj[key]


def _int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{where}: expected an integer, got {value!r}")
    return value


def _str_list(value: Any, where: str) -> tuple[str, ...]:
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise SchemaError(f"{where}: expected a list of strings")
    return tuple(value)


def _parse_asil(value: Any, where: str) -> int:
    if isinstance(value, str):
        if value.upper() not in ASIL_LEVELS:
            raise SchemaError(f"{where}: unknown ASIL {value!r}")
        return ASIL_LEVELS[value.upper()]
    return _int(value, where)


def validate_model(raw: Mapping) -> SystemModel:
    """Parse and validate a model document, returning a sealed SystemModel.

    Structural problems raise SchemaError immediately. Invariant breaches are
    collected exhaustively and raised together as ModelValidationError.
    """
    violations = check_model(raw)
    if violations:
        raise ModelValidationError(violations)
    return _build(raw)


def check_model(raw: Mapping) -> list[Violation]:
    """Return every invariant violation in ``raw`` (empty list when valid)."""
    features, aswcs, nodes, explicit, frt, _ = _parse(raw)
    out: list[Violation] = []

    def dup(kind, items):
        seen = set()
        for it in items:
            if it.id in seen:
                out.append(Violation("DUPLICATE_ID", detail=f"duplicate {kind} id '{it.id}'"))
            seen.add(it.id)
        return seen

    feature_ids = dup("feature", features)
    aswc_ids = dup("aswc", aswcs)
    node_ids = dup("node", nodes)
    if explicit is not None:
        dup("cluster", explicit)
    shared = (feature_ids & aswc_ids) | (feature_ids & node_ids) | (aswc_ids & node_ids)
    for ident in sorted(shared, key=natural_key):
        out.append(Violation("DUPLICATE_ID", detail=f"id '{ident}' used by more than one entity kind"))

    if frt <= 0:
        out.append(Violation("NON_POSITIVE_DURATION", detail=f"frt_us = {frt}"))

    for f in features:
        if not f.realized_by:
            out.append(Violation("EMPTY_FEATURE", detail=f"feature '{f.id}' is realized by no ASWC"))
        for s in f.realized_by:
            if s not in aswc_ids:
                out.append(Violation("DANGLING_REF", detail=f"feature '{f.id}' references unknown ASWC '{s}'"))

    for a in aswcs:
        if a.wcet <= 0:
            out.append(Violation("NON_POSITIVE_DURATION", detail=f"ASWC '{a.id}' wcet_us = {a.wcet}"))
        if a.min_ftt <= 0:
            out.append(Violation("NON_POSITIVE_DURATION", detail=f"ASWC '{a.id}' min_ftt_us = {a.min_ftt}"))
        if not 0 <= a.asil <= 4:
            out.append(Violation("ASIL_OUT_OF_RANGE", detail=f"ASWC '{a.id}' asil = {a.asil}"))
        if a.fail_op < 0:
            out.append(Violation("NEGATIVE_FAIL_OP", detail=f"ASWC '{a.id}' fail_op = {a.fail_op}"))
        for f in a.features:
            if f not in feature_ids:
                out.append(Violation("DANGLING_REF", detail=f"ASWC '{a.id}' references unknown feature '{f}'"))

    # chi(s) and chi(f) must describe the same relation
    by_feature = {(s, f.id) for f in features for s in f.realized_by}
    by_aswc = {(a.id, f) for a in aswcs for f in a.features}
    for s, f in sorted(by_feature ^ by_aswc):
        if s in aswc_ids and f in feature_ids:
            side = f"'{s}' lists '{f}'" if (s, f) in by_aswc else f"'{f}' lists '{s}'"
            out.append(Violation("CHI_INCONSISTENT", detail=f"{side} but the reverse mapping is missing"))

    for n in nodes:
        if n.is_central and n.total_time_budget <= 0:
            out.append(Violation("NON_POSITIVE_DURATION", node=n.id,
                                 detail=f"central node '{n.id}' time_budget_us = {n.total_time_budget}"))
    if not any(n.is_central for n in nodes):
        out.append(Violation("NO_CENTRAL_NODE", detail="the model has no central execution node"))

    for a, b in raw.get("links", []) or []:
        for end in (a, b):
            if end not in node_ids:
                out.append(Violation("DANGLING_REF", detail=f"link references unknown node '{end}'"))

    if explicit is not None:
        seen: dict[str, str] = {}
        by_id = {a.id: a for a in aswcs}
        for c in explicit:
            if not c.members:
                out.append(Violation("EMPTY_CLUSTER", cluster=c.id, detail="cluster has no members"))
            for m in c.members:
                if m not in aswc_ids:
                    out.append(Violation("DANGLING_REF", cluster=c.id, detail=f"unknown ASWC '{m}'"))
                elif m in seen:
                    out.append(Violation("CLUSTER_PARTITION", cluster=c.id,
                                         detail=f"ASWC '{m}' is also in cluster '{seen[m]}'"))
                else:
                    seen[m] = c.id
            classes = {(by_id[m].asil, by_id[m].fail_op) for m in c.members if m in by_id}
            if len(classes) > 1:
                out.append(Violation("CLUSTER_NOT_HOMOGENEOUS", cluster=c.id,
                                     detail=f"members have (asil, failOp) pairs {sorted(classes)}"))
            for label, value in (("prio_points_master", c.prio_points_master),
                                 ("prio_points_hot_slave", c.prio_points_hot_slave)):
                if value is not None and value <= 0:
                    out.append(Violation("NON_POSITIVE_PRIORITY", cluster=c.id, detail=f"{label} = {value}"))
        for a in aswcs:
            if a.id not in seen:
                out.append(Violation("CLUSTER_PARTITION", detail=f"ASWC '{a.id}' belongs to no cluster"))
    return out


def _parse(raw: Mapping):
    if not isinstance(raw, Mapping):
        raise SchemaError("model: expected a JSON object")
    frt = _int(raw.get("frt_us", DEFAULT_FRT_US), "frt_us")

    features = []
    for i, f in enumerate(_req(raw, "features", "model")):
        where = f"features[{i}]"
        fid = _req(f, "id", where)
        features.append(Feature(fid, f.get("name", fid), _str_list(_req(f, "aswcs", where), where + ".aswcs")))

    raw_aswcs = _req(raw, "aswcs", "model")
    listed = {}
    for f in features:
        for s in f.realized_by:
            listed.setdefault(s, []).append(f.id)
    aswcs = []
    for i, a in enumerate(raw_aswcs):
        where = f"aswcs[{i}]"
        aid = _req(a, "id", where)
        feats = (_str_list(a["features"], where + ".features") if "features" in a
                 else tuple(listed.get(aid, ())))
        aswcs.append(Aswc(
            id=aid,
            name=a.get("name", aid),
            wcet=_int(_req(a, "wcet_us", where), where + ".wcet_us"),
            asil=_parse_asil(_req(a, "asil", where), where + ".asil"),
            fail_op=_int(a.get("fail_op", 0), where + ".fail_op"),
            min_ftt=_int(_req(a, "min_ftt_us", where), where + ".min_ftt_us"),
            features=feats,
        ))

    nodes = []
    for i, n in enumerate(_req(raw, "nodes", "model")):
        where = f"nodes[{i}]"
        nid = _req(n, "id", where)
        try:
            kind = NodeKind(n.get("kind", "central"))
            supply = PowerSupply(_req(n, "power_supply", where))
        except ValueError as exc:
            raise SchemaError(f"{where}: {exc}") from None
        budget = n.get("time_budget_us", 0 if kind is NodeKind.PERIPHERAL else None)
        if budget is None:
            raise SchemaError(f"{where}: central node needs 'time_budget_us'")
        nodes.append(ExecutionNode(nid, n.get("name", nid), kind, _int(budget, where + ".time_budget_us"), supply))

    explicit = None
    if raw.get("clusters") is not None:
        explicit = []
        for i, c in enumerate(raw["clusters"]):
            where = f"clusters[{i}]"
            pm, ps = c.get("prio_points_master"), c.get("prio_points_hot_slave")
            explicit.append(AswcCluster(
                id=_req(c, "id", where),
                members=_str_list(_req(c, "members", where), where + ".members"),
                prio_points_master=None if pm is None else _int(pm, where + ".prio_points_master"),
                prio_points_hot_slave=None if ps is None else _int(ps, where + ".prio_points_hot_slave"),
            ))
    links = []
    for i, link in enumerate(raw.get("links", []) or []):
        if not (isinstance(link, list) and len(link) == 2 and all(isinstance(x, str) for x in link)):
            raise SchemaError(f"links[{i}]: expected a pair of node ids")
        links.append((link[0], link[1]))
    return features, aswcs, nodes, explicit, frt, tuple(links)


def _build(raw: Mapping) -> SystemModel:
    features, aswcs, nodes, explicit, frt, links = _parse(raw)
    by_id = {a.id: a for a in aswcs}
    skeleton = derive_clusters(aswcs) if explicit is None else explicit
    clusters = [derive_cluster_properties(c, [by_id[m] for m in c.members], frt) for c in skeleton]
    return SystemModel(tuple(features), tuple(aswcs), tuple(clusters), tuple(nodes), frt, links)


def model_to_dict(model: SystemModel) -> dict:
    """Serialize a model back to the input document schema (explicit clusters)."""
    return {
        "frt_us": model.frt,
        "features": [{"id": f.id, "name": f.name, "aswcs": list(f.realized_by)} for f in model.features],
        "aswcs": [{"id": a.id, "name": a.name, "wcet_us": a.wcet, "asil": ASIL_NAMES[a.asil],
                   "fail_op": a.fail_op, "min_ftt_us": a.min_ftt, "features": list(a.features)}
                  for a in model.aswcs],
        "nodes": [{"id": n.id, "name": n.name, "kind": n.kind.value, "time_budget_us": n.total_time_budget,
                   "power_supply": n.power_supply.value} for n in model.nodes],
        "links": [list(link) for link in model.links],
        "clusters": [{"id": c.id, "members": list(c.members), "prio_points_master": c.prio_points_master,
                      "prio_points_hot_slave": c.prio_points_hot_slave} for c in model.clusters],
    }
