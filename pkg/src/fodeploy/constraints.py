"""Deployment configurations and the validity constraint catalog."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from .model import AswcCluster, FaultScenario, SchemaError, SystemModel, Violation, natural_key

BUDGET_EXCEEDED = "BUDGET_EXCEEDED"          # C1
ACTIVE_ON_ISOLATED = "ACTIVE_ON_ISOLATED"    # C2
SUPPLY_DIVERSITY = "SUPPLY_DIVERSITY"        # C3
SLAVE_NOT_ALLOWED = "SLAVE_NOT_ALLOWED"      # C4
SLAVE_MODE_MISMATCH = "SLAVE_MODE_MISMATCH"  # C5
ALLOC_ON_PERIPHERAL = "ALLOC_ON_PERIPHERAL"  # C6
ALLOC_COUNT = "ALLOC_COUNT"                  # C7
CONTINUITY_ALLOC = "CONTINUITY_ALLOC"        # C8
PROMOTION = "PROMOTION"                      # C9
REACTIVATION = "REACTIVATION"                # C10
DANGLING_REF = "DANGLING_REF"
MALFORMED_PLACEMENT = "MALFORMED_PLACEMENT"

CATALOG = (
    BUDGET_EXCEEDED, ACTIVE_ON_ISOLATED, SUPPLY_DIVERSITY, SLAVE_NOT_ALLOWED, SLAVE_MODE_MISMATCH,
    ALLOC_ON_PERIPHERAL, ALLOC_COUNT, CONTINUITY_ALLOC, PROMOTION, REACTIVATION, DANGLING_REF, MALFORMED_PLACEMENT,
)


class SlaveMode(str, Enum):
    NONE = "none"
    HOT = "hot"
    COLD = "cold"


@dataclass(frozen=True)
class ClusterPlacement:
    cluster: str
    allocated: frozenset[str] = frozenset()
    master: str | None = None
    slave: str | None = None
    slave_mode: SlaveMode = SlaveMode.NONE

    def __post_init__(self):
        object.__setattr__(self, "allocated", frozenset(self.allocated))
        object.__setattr__(self, "slave_mode", SlaveMode(self.slave_mode))

    @property
    def active_nodes(self) -> frozenset[str]:
        nodes = set()
        if self.master is not None:
            nodes.add(self.master)
        if self.slave is not None and self.slave_mode is SlaveMode.HOT:
            nodes.add(self.slave)
        return frozenset(nodes)

    @property
    def passive_nodes(self) -> frozenset[str]:
        return self.allocated - self.active_nodes

    @property
    def master_present(self) -> bool:
        return self.master is not None

    @property
    def hot_slave_present(self) -> bool:
        return self.slave is not None and self.slave_mode is SlaveMode.HOT

    @property
    def roles(self) -> tuple:
        return (self.master, self.slave, self.slave_mode)

    def to_dict(self) -> dict:
        return {
            "cluster": self.cluster,
            "allocated": sorted(self.allocated, key=natural_key),
            "master": self.master,
            "slave": self.slave,
            "slave_mode": self.slave_mode.value,
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "ClusterPlacement":
        try:
            return cls(
                cluster=raw["cluster"],
                allocated=frozenset(raw.get("allocated", ())),
                master=raw.get("master"),
                slave=raw.get("slave"),
                slave_mode=SlaveMode(raw.get("slave_mode", "none")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"placement: {exc}") from None


@dataclass(frozen=True)
class DeploymentConfig:
    """One placement per cluster, kept in the order given."""

    placements: tuple[ClusterPlacement, ...]

    def __post_init__(self):
        object.__setattr__(self, "placements", tuple(self.placements))

    def placement(self, cluster_id: str) -> ClusterPlacement:
        for p in self.placements:
            if p.cluster == cluster_id:
                return p
        return ClusterPlacement(cluster_id)

    def to_dict(self) -> dict:
        return {"placements": [p.to_dict() for p in self.placements]}

    @classmethod
    def from_dict(cls, raw: Mapping) -> "DeploymentConfig":
        if not isinstance(raw, Mapping) or not isinstance(raw.get("placements"), list):
            raise SchemaError("config: expected an object with a 'placements' list")
        return cls(tuple(ClusterPlacement.from_dict(p) for p in raw["placements"]))

    @classmethod
    def empty(cls, model: SystemModel) -> "DeploymentConfig":
        return cls(tuple(ClusterPlacement(c.id) for c in model.clusters))


def slave_allowed(cluster: AswcCluster, scenario: FaultScenario) -> bool:
    """Whether the cluster may still carry a slave after ``fault_count`` faults.

    After ``fail_op`` faults the surviving master alone meets the requirement.
    Whether the slave must be hot or cold is fixed by ``hot_standby_slave_req``.
    """
    return cluster.fail_op > scenario.fault_count


def expected_slave_mode(cluster: AswcCluster) -> SlaveMode:
    return SlaveMode.HOT if cluster.hot_standby_slave_req else SlaveMode.COLD


def allocation_count(model: SystemModel, cluster: AswcCluster) -> int:
    return min(cluster.fail_op + 1, len(model.central_nodes))


def needs_supply_diverse_allocation(model: SystemModel, cluster: AswcCluster) -> bool:
    supplies = {n.power_supply for n in model.central_nodes}
    return cluster.fail_op >= 1 and len(supplies) > 1 and allocation_count(model, cluster) >= 2


def used_time_budget(model: SystemModel, config: DeploymentConfig, node_id: str) -> int:
    if not model.has_node(node_id) or not model.node(node_id).is_central:
        raise ValueError(f"'{node_id}' is not a central node of the model")
    return sum(model.cluster(p.cluster).sum_wcets for p in config.placements
               if model.has_cluster(p.cluster) and node_id in p.active_nodes)


def priority_sum(model: SystemModel, config: DeploymentConfig) -> int:
    total = 0
    for p in config.placements:
        c = model.cluster(p.cluster)
        total += c.prio_points_master * p.master_present + c.prio_points_hot_slave * p.hot_slave_present
    return total


def feature_availability(model: SystemModel, config: DeploymentConfig) -> dict[str, bool]:
    """A feature is provided iff every ASWC realizing it sits in a cluster with a master."""
    mastered = {p.cluster for p in config.placements if p.master_present}
    return {f.id: all(model.cluster_of(s) in mastered for s in f.realized_by) for f in model.features}


def change_count(current: DeploymentConfig, previous: DeploymentConfig | None) -> int:
    if previous is None:
        return 0
    return sum(p.roles != previous.placement(p.cluster).roles for p in current.placements)


def _dangling(model: SystemModel, scenario: FaultScenario, config: DeploymentConfig,
              previous: DeploymentConfig | None) -> list[Violation]:
    out = []
    for n in sorted(scenario.isolated_nodes, key=natural_key):
        if not model.has_node(n) or not model.node(n).is_central:
            out.append(Violation(DANGLING_REF, node=n, detail=f"isolated node '{n}' is not a central node"))
    for label, cfg in (("config", config), ("previous", previous)):
        if cfg is None:
            continue
        seen = set()
        for p in cfg.placements:
            if not model.has_cluster(p.cluster):
                out.append(Violation(DANGLING_REF, cluster=p.cluster, detail=f"{label}: unknown cluster"))
            elif p.cluster in seen:
                out.append(Violation(DANGLING_REF, cluster=p.cluster, detail=f"{label}: duplicate placement"))
            seen.add(p.cluster)
            refs = set(p.allocated) | {x for x in (p.master, p.slave) if x is not None}
            for n in sorted(refs - {n.id for n in model.nodes}, key=natural_key):
                out.append(Violation(DANGLING_REF, cluster=p.cluster, node=n, detail=f"{label}: unknown node"))
    return out


def check_config(model: SystemModel, scenario: FaultScenario, config: DeploymentConfig,
                 previous: DeploymentConfig | None = None) -> list[Violation]:
    """Return every violated constraint; an empty list means the config is valid.

    Reference errors are reported alone, since the remaining checks would be
    meaningless on unknown ids.
    """
    dangling = _dangling(model, scenario, config, previous)
    if dangling:
        return dangling

    out: list[Violation] = []
    isolated = scenario.isolated_nodes
    n_central = len(model.central_nodes)
    placements = {p.cluster: p for p in config.placements}

    for c in model.clusters:
        p = placements.get(c.id, ClusterPlacement(c.id))

        # structural invariants of a placement
        for role, node in (("master", p.master), ("slave", p.slave)):
            if node is not None and node not in p.allocated:
                out.append(Violation(MALFORMED_PLACEMENT, c.id, node, f"{role} node is not allocated"))
        if p.master is not None and p.master == p.slave:
            out.append(Violation(MALFORMED_PLACEMENT, c.id, p.master, "master and slave on the same node"))
        if (p.slave is None) != (p.slave_mode is SlaveMode.NONE):
            out.append(Violation(MALFORMED_PLACEMENT, c.id, p.slave,
                                 f"slave node {p.slave!r} inconsistent with mode '{p.slave_mode.value}'"))
        if p.slave is not None and p.master is None:
            out.append(Violation(MALFORMED_PLACEMENT, c.id, p.slave, "slave without a master"))

        # C2: cold slaves count too, a standby on an isolated node is unusable
        for node in sorted({x for x in (p.master, p.slave) if x is not None} & isolated, key=natural_key):
            out.append(Violation(ACTIVE_ON_ISOLATED, c.id, node, f"instance on isolated node '{node}'"))

        # C3
        if p.master is not None and p.slave is not None and p.master != p.slave:
            sm = model.node(p.master).power_supply
            if sm is model.node(p.slave).power_supply:
                out.append(Violation(SUPPLY_DIVERSITY, c.id, p.slave,
                                     f"master '{p.master}' and slave '{p.slave}' share the {sm.value} supply"))

        # C4 / C5
        if p.slave is not None:
            if not slave_allowed(c, scenario):
                out.append(Violation(SLAVE_NOT_ALLOWED, c.id, p.slave,
                                     f"failOp {c.fail_op} <= faultCount {scenario.fault_count}"))
            if p.slave_mode is not SlaveMode.NONE and p.slave_mode is not expected_slave_mode(c):
                out.append(Violation(SLAVE_MODE_MISMATCH, c.id, p.slave,
                                     f"slave mode '{p.slave_mode.value}' but hotStandbySlaveReq="
                                     f"{c.hot_standby_slave_req}"))

        # C6
        for node in sorted(p.allocated, key=natural_key):
            if not model.node(node).is_central:
                out.append(Violation(ALLOC_ON_PERIPHERAL, c.id, node, f"'{node}' is a peripheral node"))

        if previous is None:
            # C7, including supply diversity of the allocation set
            want = allocation_count(model, c)
            if len(p.allocated) != want:
                out.append(Violation(ALLOC_COUNT, c.id, None,
                                     f"{len(p.allocated)} allocation(s), expected {want}"))
            elif needs_supply_diverse_allocation(model, c):
                supplies = {model.node(n).power_supply for n in p.allocated if model.has_node(n)}
                if len(supplies) < 2:
                    out.append(Violation(ALLOC_COUNT, c.id, None,
                                         "allocations of a fail-operational cluster use a single power supply"))
        else:
            prev = previous.placement(c.id)
            # C8
            expected = prev.allocated - isolated
            if p.allocated != expected:
                out.append(Violation(CONTINUITY_ALLOC, c.id, None,
                                     f"allocated {sorted(p.allocated, key=natural_key)}, expected "
                                     f"{sorted(expected, key=natural_key)}"))
            # C9
            if (prev.master is not None and prev.master in isolated and prev.hot_slave_present
                    and prev.slave not in isolated and p.master is not None and p.master != prev.slave):
                out.append(Violation(PROMOTION, c.id, p.master,
                                     f"master lost on '{prev.master}', hot slave on '{prev.slave}' must take over"))
            # C10: a deactivated cluster stays deactivated for the rest of the fault path
            if prev.master is None and p.master is not None:
                out.append(Violation(REACTIVATION, c.id, p.master, "cluster had no master before this transition"))

    # C1
    for node in model.central_nodes:
        if node.id in isolated:
            continue
        used = used_time_budget(model, config, node.id)
        if used > node.total_time_budget:
            out.append(Violation(BUDGET_EXCEEDED, None, node.id,
                                 f"used {used} us > budget {node.total_time_budget} us"))
    return out


def node_usage(model: SystemModel, config: DeploymentConfig) -> list[dict]:
    return [{"id": n.id, "used_us": used_time_budget(model, config, n.id), "total_us": n.total_time_budget}
            for n in model.central_nodes]


def canonical(model: SystemModel, placements: Iterable[ClusterPlacement]) -> DeploymentConfig:
    """Order placements like the model's clusters."""
    by_id = {p.cluster: p for p in placements}
    return DeploymentConfig(tuple(by_id.get(c.id, ClusterPlacement(c.id)) for c in model.clusters))
