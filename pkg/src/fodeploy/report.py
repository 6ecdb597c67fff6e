"""Report documents (JSON-ready dicts), their text rendering, and DOT export."""

from __future__ import annotations

import json

from .constraints import DeploymentConfig, check_config, feature_availability, node_usage, priority_sum
from .model import FaultScenario, SystemModel, natural_key
from .pag import Pag, PagVertex, edge_delta, survivable_faults, vertex_id

REPORT_VERSION = 1


def deployment_report(model: SystemModel, scenario: FaultScenario, config: DeploymentConfig,
                      previous: DeploymentConfig | None = None, extra: dict | None = None) -> dict:
    """The per-scenario document: placements, node utilization, features, violations."""
    avail = feature_availability(model, config)
    doc = {
        "scenario": scenario.to_dict(),
        "placements": [config.placement(c.id).to_dict() for c in model.clusters],
        "nodes": node_usage(model, config),
        "prioritySum": priority_sum(model, config),
        "features": {
            "provided": [f for f, ok in avail.items() if ok],
            "lost": [f for f, ok in avail.items() if not ok],
        },
        "violations": [v.to_dict() for v in check_config(model, scenario, config, previous)],
    }
    if extra:
        doc.update(extra)
    return doc


def solve_extra(result) -> dict:
    return {
        "optimal": result.optimal,
        "changeCount": result.change_count,
        "checkedTargets": [{"target": t, "satisfiable": sat} for t, sat in result.checked_targets],
    }


def _vertex_doc(pag: Pag, v: PagVertex) -> dict:
    previous = pag.vertices[v.parent].result.config if v.parent is not None else None
    doc = deployment_report(pag.model, pag.scenario(v), v.result.config, previous)
    return {
        "id": v.id,
        "alive": sorted(v.alive, key=natural_key),
        "faultDepth": v.fault_depth,
        "parent": vertex_id(v.parent) if v.parent is not None else None,
        **doc,
    }


def pag_structure(pag: Pag) -> dict:
    return {
        "maxFaults": pag.max_faults,
        "vertices": [{"id": v.id, "alive": sorted(v.alive, key=natural_key), "faultDepth": v.fault_depth,
                      "parent": vertex_id(v.parent) if v.parent is not None else None}
                     for v in pag.ordered()],
        "edges": [{"from": vertex_id(e.source), "to": vertex_id(e.target), "cause": e.cause.to_dict()}
                  for e in pag.edges],
    }


def degradation_report(pag: Pag) -> dict:
    if not pag.resolved:
        raise ValueError("the PAG has unresolved vertices; run analyze() first")
    survivable = survivable_faults(pag)
    return {
        "version": REPORT_VERSION,
        "maxFaults": pag.max_faults,
        "root": pag.root.id,
        "vertices": [_vertex_doc(pag, v) for v in pag.ordered()],
        "edges": [{"from": vertex_id(e.source), "to": vertex_id(e.target), "cause": e.cause.to_dict(),
                   **edge_delta(pag, e)} for e in pag.edges],
        "featureSurvival": [{"feature": f.id, "name": f.name, "survivableFaults": survivable[f.id]}
                            for f in pag.model.features],
    }


def to_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def _dot_quote(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return '"' + escaped + '"'


def to_dot(pag: Pag) -> str:
    """Vertices labeled with alive node ids (and priority sum once resolved); edges with the cause."""
    lines = ["digraph pag {", "  rankdir=TB;", "  node [shape=box];"]
    for v in pag.ordered():
        label = ",".join(sorted(v.alive, key=natural_key))
        if v.result is not None:
            label += f"\nsum={v.result.priority_sum}"
            if v.lost:
                label += "\nlost: " + ",".join(sorted(v.lost, key=natural_key))
        lines.append(f"  {_dot_quote(v.id)} [label={_dot_quote(label)}];")
    for e in pag.edges:
        lines.append(f"  {_dot_quote(vertex_id(e.source))} -> {_dot_quote(vertex_id(e.target))} "
                     f"[label={_dot_quote(e.cause.label)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


# --- text rendering -------------------------------------------------------

def _render_deployment(doc: dict, indent: str = "") -> list[str]:
    out = []
    sc = doc["scenario"]
    out.append(f"{indent}isolated: {', '.join(sc['isolated']) or '-'}  faultCount: {sc['faultCount']}")
    out.append(f"{indent}prioritySum: {doc['prioritySum']}")
    for p in doc["placements"]:
        slave = f"{p['slave']} ({p['slave_mode']})" if p["slave"] else "-"
        out.append(f"{indent}  {p['cluster']:<6} master={p['master'] or '-':<5} slave={slave:<12} "
                   f"allocated={','.join(p['allocated']) or '-'}")
    for n in doc["nodes"]:
        out.append(f"{indent}  node {n['id']:<5} {n['used_us']:>7} / {n['total_us']} us")
    out.append(f"{indent}features provided: {', '.join(doc['features']['provided']) or '-'}")
    out.append(f"{indent}features lost:     {', '.join(doc['features']['lost']) or '-'}")
    if doc["violations"]:
        out.append(f"{indent}violations:")
        for v in doc["violations"]:
            out.append(f"{indent}  {v['code']}: {v['detail']}")
    return out


def render_text(doc: dict) -> str:
    """Human-readable rendering of any document produced by this module."""
    lines: list[str] = []
    if "error" in doc:
        lines.append(f"error: {doc['error']}")
        for v in doc.get("violations", []):
            lines.append(f"  {v['code']}: {v['detail']}")
    elif "vertices" in doc and "featureSurvival" in doc:
        lines.append(f"PAG analysis, max faults {doc['maxFaults']}, {len(doc['vertices'])} vertices, "
                     f"{len(doc['edges'])} edges")
        for v in doc["vertices"]:
            lines.append("")
            lines.append(f"vertex {v['id']}  depth {v['faultDepth']}  parent {v['parent'] or '-'}")
            lines.extend(_render_deployment(v, "  "))
        lines.append("")
        lines.append("edges:")
        for e in doc["edges"]:
            lines.append(f"  {e['from']} -[{e['cause']['label']}]-> {e['to']}  "
                         f"-{e['lostPriorityPoints']} pts  lost clusters: {','.join(e['lostClusters']) or '-'}  "
                         f"lost features: {','.join(e['lostFeatures']) or '-'}")
        lines.append("")
        lines.append("feature survival (faults survivable on the worst-case path):")
        for row in doc["featureSurvival"]:
            lines.append(f"  {row['feature']:<6} {row['name']:<24} {row['survivableFaults']}")
    elif "vertices" in doc:
        lines.append(f"PAG structure, max faults {doc['maxFaults']}, {len(doc['vertices'])} vertices, "
                     f"{len(doc['edges'])} edges")
        for v in doc["vertices"]:
            lines.append(f"  {v['id']}  depth {v['faultDepth']}")
        for e in doc["edges"]:
            lines.append(f"  {e['from']} -[{e['cause']['label']}]-> {e['to']}")
    elif "placements" in doc:
        lines.extend(_render_deployment(doc))
    else:
        status = "valid" if not doc.get("violations") else "invalid"
        lines.append(f"model: {status}")
        for v in doc.get("violations", []):
            lines.append(f"  {v['code']}: {v['detail']}")
    return "\n".join(lines) + "\n"
