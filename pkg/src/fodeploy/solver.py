"""Exact deployment search.

The search is a depth-first branch-and-bound over clusters. For each cluster
a finite list of locally valid options (allocation set, master, slave) is
built; only the per-node time budgets couple clusters. Options are explored
in canonical order so the first solution reaching a given
``(priority sum, change count)`` is also the lexicographically smallest one.
"""

from __future__ import annotations

import itertools
import logging
import time
from dataclasses import dataclass, field

from .constraints import (
    ClusterPlacement,
    DeploymentConfig,
    SlaveMode,
    allocation_count,
    check_config,
    expected_slave_mode,
    needs_supply_diverse_allocation,
    priority_sum,
    slave_allowed,
    _dangling,
)
from .model import AswcCluster, FaultScenario, SystemModel, natural_key

log = logging.getLogger(__name__)

_NONE_RANK = 1 << 30


class RequestError(ValueError):
    """The solve request references ids that do not exist in the model."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(v.detail for v in self.violations))


@dataclass(frozen=True)
class SolveRequest:
    model: SystemModel
    scenario: FaultScenario = field(default_factory=FaultScenario)
    previous: DeploymentConfig | None = None
    objective_cap: int | None = None
    # clusters that may not get a master; None means "those without one in previous"
    keep_inactive: frozenset[str] | None = None

    def inactive_clusters(self) -> frozenset[str]:
        if self.keep_inactive is not None:
            return frozenset(self.keep_inactive)
        if self.previous is None:
            return frozenset()
        return frozenset(c.id for c in self.model.clusters if not self.previous.placement(c.id).master_present)


@dataclass
class SolveStats:
    elapsed_s: float = 0.0
    nodes_explored: int = 0


@dataclass
class SolveResult:
    config: DeploymentConfig
    priority_sum: int
    optimal: bool
    checked_targets: list[tuple[int, bool]]
    stats: SolveStats
    change_count: int = 0


@dataclass(frozen=True)
class _Option:
    placement: ClusterPlacement
    loads: tuple[tuple[int, int], ...]  # (central node index, microseconds)
    points: int
    changed: int


def max_priority_cap(model: SystemModel, scenario: FaultScenario) -> int:
    """Upper bound on the priority sum: every master plus every allowed hot slave."""
    cap = 0
    for c in model.clusters:
        cap += c.prio_points_master
        if c.hot_standby_slave_req and slave_allowed(c, scenario):
            cap += c.prio_points_hot_slave
    return cap


class _Problem:
    def __init__(self, request: SolveRequest):
        model = request.model
        self.model = model
        self.scenario = request.scenario
        self.previous = request.previous
        self.inactive = request.inactive_clusters()
        self.central = sorted(model.central_ids, key=natural_key)
        self.rank = {n: i for i, n in enumerate(self.central)}
        self.alive = [n for n in self.central if n not in request.scenario.isolated_nodes]
        self.budgets = [model.node(n).total_time_budget for n in self.central]
        self.change_weight = len(model.clusters) + 1
        self.options = [self._cluster_options(c) for c in model.clusters]
        # suffix bound: best achievable points from cluster i onward, ignoring budgets
        self.suffix = [0] * (len(self.options) + 1)
        for i in range(len(self.options) - 1, -1, -1):
            self.suffix[i] = self.suffix[i + 1] + max(o.points for o in self.options[i])
        self.explored = 0

    def _allocations(self, c: AswcCluster) -> list[frozenset[str]]:
        if self.previous is not None:
            return [self.previous.placement(c.id).allocated - self.scenario.isolated_nodes]
        k = allocation_count(self.model, c)
        diverse = needs_supply_diverse_allocation(self.model, c)
        out = []
        for combo in itertools.combinations(self.central, k):
            if diverse and len({self.model.node(n).power_supply for n in combo}) < 2:
                continue
            out.append(frozenset(combo))
        return out

    def _cluster_options(self, c: AswcCluster) -> list[_Option]:
        model, scenario = self.model, self.scenario
        prev = self.previous.placement(c.id) if self.previous is not None else None
        forced_master = None
        if (prev is not None and prev.master in scenario.isolated_nodes and prev.hot_slave_present
                and prev.slave not in scenario.isolated_nodes):
            forced_master = prev.slave
        mode = expected_slave_mode(c)
        may_slave = slave_allowed(c, scenario)

        best: dict[tuple, tuple] = {}
        for alloc in self._allocations(c):
            alive = [n for n in self.central if n in alloc and n not in scenario.isolated_nodes]
            masters = [None]
            if c.id not in self.inactive:
                masters += [n for n in alive if forced_master is None or n == forced_master]
            for m in masters:
                slaves = [None]
                if m is not None and may_slave:
                    supply = model.node(m).power_supply
                    slaves += [n for n in alive if n != m and model.node(n).power_supply is not supply]
                for s in slaves:
                    key = (self._r(m), self._r(s), tuple(sorted(self.rank[n] for n in alloc)))
                    roles = (m, s)
                    if roles not in best or key < best[roles][0]:
                        best[roles] = (key, alloc)

        options = []
        for (m, s), (key, alloc) in sorted(best.items(), key=lambda kv: kv[1][0]):
            p = ClusterPlacement(c.id, alloc, m, s, mode if s is not None else SlaveMode.NONE)
            loads = []
            points = 0
            if m is not None:
                loads.append((self.rank[m], c.sum_wcets))
                points += c.prio_points_master
            if p.hot_slave_present:
                loads.append((self.rank[s], c.sum_wcets))
                points += c.prio_points_hot_slave
            changed = 0
            if prev is not None and p.roles != prev.roles:
                # whole-cluster changes dominate; master relocations break ties among them
                moved = prev.master is not None and m is not None and m != prev.master
                changed = self.change_weight + int(moved)
            options.append(_Option(p, tuple(loads), points, changed))
        return options

    def _r(self, node):
        return _NONE_RANK if node is None else self.rank[node]

    def search(self, floor: int | None = None, ceiling: int | None = None, first_hit: bool = False):
        """Best (points, changes, options) with points in [floor, ceiling].

        With ``first_hit`` the search stops at the first solution reaching
        ``floor``, which answers a satisfiability query.
        """
        n = len(self.options)
        used = [0] * len(self.central)
        chosen: list[_Option] = [None] * n
        best = {"points": -1 if floor is None else floor - 1, "changes": 0, "pick": None}

        def improves(points, changes):
            if points != best["points"]:
                return points > best["points"]
            return best["pick"] is not None and changes < best["changes"]

        def rec(i, points, changes):
            self.explored += 1
            if i == n:
                if improves(points, changes):
                    best.update(points=points, changes=changes, pick=list(chosen))
                    return first_hit
                return False
            bound = points + self.suffix[i]
            if ceiling is not None:
                bound = min(bound, ceiling)
            if not improves(bound, changes):
                return False
            for opt in self.options[i]:
                if ceiling is not None and points + opt.points > ceiling:
                    continue
                if any(used[idx] + w > self.budgets[idx] for idx, w in opt.loads):
                    continue
                for idx, w in opt.loads:
                    used[idx] += w
                chosen[i] = opt
                stop = rec(i + 1, points + opt.points, changes + opt.changed)
                for idx, w in opt.loads:
                    used[idx] -= w
                if stop:
                    return True
            return False

        rec(0, 0, 0)
        return best if best["pick"] is not None else None


def _validate_request(request: SolveRequest):
    problems = _dangling(request.model, request.scenario, DeploymentConfig(()), request.previous)
    if problems:
        raise RequestError(problems)


def check_target(request: SolveRequest, target: int) -> bool:
    """True iff some valid config reaches a priority sum of at least ``target``."""
    _validate_request(request)
    if target <= 0:
        return True
    problem = _Problem(request)
    return problem.search(floor=target, first_hit=True) is not None


def solve(request: SolveRequest, strategy: str = "bnb") -> SolveResult:
    """Compute an optimal valid deployment for the request's scenario.

    Objective hierarchy: maximum priority sum, then fewest clusters whose
    (master, slave, mode) roles differ from ``previous``, then fewest master
    relocations, then the lexicographic order of clusters and node ids. ``strategy="sweep"`` runs
    descending-target satisfiability checks before the final optimization and
    reports each verdict in ``checked_targets``; both strategies return the
    same configuration.
    """
    if strategy not in ("bnb", "sweep"):
        raise ValueError(f"unknown strategy {strategy!r}")
    _validate_request(request)
    t0 = time.perf_counter()
    model, scenario = request.model, request.scenario
    cap = max_priority_cap(model, scenario)
    ceiling = None if request.objective_cap is None or request.objective_cap >= cap else request.objective_cap
    top = cap if ceiling is None else ceiling

    problem = _Problem(request)
    checked: list[tuple[int, bool]] = []
    if strategy == "sweep":
        target = top
        while target > 0:
            sat = problem.search(floor=target, ceiling=ceiling, first_hit=True) is not None
            checked.append((target, sat))
            if sat:
                break
            target -= 1
        best = problem.search(floor=max(target, 0), ceiling=ceiling)
    else:
        best = problem.search(ceiling=ceiling)
        checked = [(t, t <= best["points"]) for t in range(top, best["points"] - 1, -1)]

    config = DeploymentConfig(tuple(o.placement for o in best["pick"]))
    stats = SolveStats(time.perf_counter() - t0, problem.explored)
    result = SolveResult(
        config=config,
        priority_sum=best["points"],
        optimal=ceiling is None,
        checked_targets=checked,
        stats=stats,
        change_count=best["changes"] // problem.change_weight,
    )
    assert result.priority_sum == priority_sum(model, config)
    log.debug("solve: sum=%d cap=%d explored=%d in %.3fs",
              result.priority_sum, cap, stats.nodes_explored, stats.elapsed_s)
    return result


def verify(request: SolveRequest, result: SolveResult):
    """Violations of ``result.config`` against the request (empty when sound)."""
    return check_config(request.model, request.scenario, result.config, request.previous)
