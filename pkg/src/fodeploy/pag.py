"""Platform-availability graph: alive-node sets linked by isolations and supply losses."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .constraints import DeploymentConfig, check_config, feature_availability, priority_sum
from .model import FaultScenario, PowerSupply, SystemModel, natural_key
from .solver import SolveRequest, SolveResult, SolveStats, solve


class AnalysisError(ValueError):
    pass


@dataclass(frozen=True)
class Cause:
    """Why an edge fires: ``kind`` is ``"isolation"`` (value = node id) or ``"supply"``."""

    kind: str
    value: str

    @property
    def label(self) -> str:
        return PowerSupply(self.value).label if self.kind == "supply" else self.value

    def to_dict(self) -> dict:
        return {"kind": self.kind, "value": self.value, "label": self.label}


def alive_key(alive) -> tuple:
    return tuple(sorted((natural_key(n) for n in alive)))


def vertex_id(alive) -> str:
    return "{" + ",".join(sorted(alive, key=natural_key)) + "}"


@dataclass
class PagVertex:
    alive: frozenset[str]
    fault_depth: int
    parent: frozenset[str] | None = None
    result: SolveResult | None = None
    provided: frozenset[str] = frozenset()
    lost: frozenset[str] = frozenset()

    @property
    def id(self) -> str:
        return vertex_id(self.alive)


@dataclass(frozen=True)
class PagEdge:
    source: frozenset[str]
    target: frozenset[str]
    cause: Cause


@dataclass
class Pag:
    model: SystemModel
    max_faults: int
    vertices: dict[frozenset[str], PagVertex] = field(default_factory=dict)
    edges: list[PagEdge] = field(default_factory=list)

    @property
    def root(self) -> PagVertex:
        return self.vertices[frozenset(self.model.central_ids)]

    def ordered(self) -> list[PagVertex]:
        """Vertices by depth, then by shrinking size, then by sorted ids."""
        return sorted(self.vertices.values(), key=lambda v: (v.fault_depth, -len(v.alive), alive_key(v.alive)))

    def predecessors(self, alive: frozenset[str]) -> list[frozenset[str]]:
        return [e.source for e in self.edges if e.target == alive]

    def scenario(self, vertex: PagVertex) -> FaultScenario:
        return FaultScenario(frozenset(self.model.central_ids) - vertex.alive, vertex.fault_depth)

    @property
    def resolved(self) -> bool:
        return all(v.result is not None for v in self.vertices.values())


def build_pag(model: SystemModel, max_faults: int) -> Pag:
    """Breadth-first expansion from the all-alive root up to ``max_faults`` edges deep."""
    if max_faults < 1:
        raise AnalysisError("max_faults must be at least 1")
    root = frozenset(model.central_ids)
    pag = Pag(model, max_faults)
    pag.vertices[root] = PagVertex(root, 0)
    frontier = [root]
    for depth in range(max_faults):
        nxt: list[frozenset[str]] = []
        for alive in sorted(frontier, key=alive_key):
            moves = [(alive - {n}, Cause("isolation", n)) for n in sorted(alive, key=natural_key)]
            for supply in PowerSupply:
                hit = frozenset(n for n in alive if model.node(n).power_supply is supply)
                if hit:
                    moves.append((alive - hit, Cause("supply", supply.value)))
            for target, cause in moves:
                if not target:
                    continue
                pag.edges.append(PagEdge(alive, target, cause))
                if target not in pag.vertices:
                    pag.vertices[target] = PagVertex(target, depth + 1)
                    nxt.append(target)
        frontier = nxt
    for v in pag.vertices.values():
        if v.fault_depth:
            parents = [p for p in pag.predecessors(v.alive) if pag.vertices[p].fault_depth == v.fault_depth - 1]
            v.parent = min(parents, key=alive_key)
    return pag


def _resolve(args):
    model, scenario, previous, inactive = args
    return solve(SolveRequest(model, scenario, previous, keep_inactive=inactive))


def _inactive(pag: Pag, v: PagVertex) -> frozenset[str]:
    """Clusters without a master at any predecessor of ``v``."""
    out = set()
    for p in pag.predecessors(v.alive):
        cfg = pag.vertices[p].result.config
        out.update(c.id for c in pag.model.clusters if not cfg.placement(c.id).master_present)
    return frozenset(out)


def analyze(model: SystemModel, max_faults: int, initial: DeploymentConfig | None = None,
            workers: int = 1) -> Pag:
    """Build the PAG and resolve a deployment at every vertex.

    The root uses ``initial`` (or a fresh optimal solve). Every other vertex is
    solved as a follow-up of its chosen parent with ``fault_count`` equal to
    its depth; clusters inactive at any predecessor stay inactive. Vertices of
    equal alive-set size are independent and may run on ``workers``
    processes; the result does not depend on the worker count.
    """
    pag = build_pag(model, max_faults)
    root = pag.root
    empty = FaultScenario()
    if initial is None:
        root.result = solve(SolveRequest(model, empty))
    else:
        violations = check_config(model, empty, initial)
        if violations:
            raise AnalysisError("initial config is invalid: " + "; ".join(f"{v.code} {v.detail}" for v in violations))
        root.result = SolveResult(initial, priority_sum(model, initial), False, [], SolveStats())
    _annotate(model, root)

    # every predecessor has a strictly larger alive set, so equal sizes form independent batches
    by_size: dict[int, list[PagVertex]] = {}
    for v in pag.ordered():
        if v.fault_depth:
            by_size.setdefault(len(v.alive), []).append(v)

    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for size in sorted(by_size, reverse=True):
            level = by_size[size]
            jobs = [(model, pag.scenario(v), pag.vertices[v.parent].result.config, _inactive(pag, v))
                    for v in level]
            results = list(pool.map(_resolve, jobs)) if pool else [_resolve(j) for j in jobs]
            for v, r in zip(level, results):
                v.result = r
                _annotate(model, v)
    finally:
        if pool:
            pool.shutdown()
    return pag


def _annotate(model: SystemModel, v: PagVertex):
    avail = feature_availability(model, v.result.config)
    v.provided = frozenset(f for f, ok in avail.items() if ok)
    v.lost = frozenset(f for f, ok in avail.items() if not ok)


def edge_delta(pag: Pag, edge: PagEdge) -> dict:
    src, dst = pag.vertices[edge.source], pag.vertices[edge.target]
    src_cfg, dst_cfg = src.result.config, dst.result.config
    lost_clusters = [c.id for c in pag.model.clusters
                     if src_cfg.placement(c.id).master_present and not dst_cfg.placement(c.id).master_present]
    return {
        "lostClusters": lost_clusters,
        "lostFeatures": sorted(dst.lost - src.lost, key=natural_key),
        "regainedFeatures": sorted(src.lost - dst.lost, key=natural_key),
        "lostPriorityPoints": src.result.priority_sum - dst.result.priority_sum,
    }


def survivable_faults(pag: Pag) -> dict[str, int]:
    """Per feature, the number of faults survived along its worst-case path.

    ``-1`` means the feature is not provided at the root; ``max_faults`` means
    no explored path loses it.
    """
    # edges strictly shrink the alive set, so larger sets come first topologically
    order = sorted(pag.vertices.values(), key=lambda v: (-len(v.alive), alive_key(v.alive)))
    out = {}
    for f in pag.model.features:
        # shortest path length from the root through vertices still providing f
        dist = {pag.root.alive: 0}
        first_loss = None
        if f.id not in pag.root.provided:
            out[f.id] = -1
            continue
        for v in order:
            if v.alive not in dist:
                continue
            for e in pag.edges:
                if e.source != v.alive:
                    continue
                d = dist[v.alive] + 1
                if f.id in pag.vertices[e.target].provided:
                    if d < dist.get(e.target, 1 << 30):
                        dist[e.target] = d
                else:
                    first_loss = d if first_loss is None else min(first_loss, d)
        out[f.id] = pag.max_faults if first_loss is None else min(first_loss - 1, pag.max_faults)
    return out
