"""SMT-LIB 2 rendering of a deployment satisfiability query.

The script asks whether a valid configuration with a priority sum of at
least a given target exists. It uses only integer/boolean theory (QF_LIA),
so any SMT-LIB 2 solver can answer it.
"""

from __future__ import annotations

import re

from .constraints import allocation_count, needs_supply_diverse_allocation, slave_allowed
from .model import natural_key
from .solver import SolveRequest


def _sym(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9_]", "_", text)


def _sum(terms: list[str]) -> str:
    if not terms:
        return "0"
    if len(terms) == 1:
        return terms[0]
    return "(+ " + " ".join(terms) + ")"


def _or(terms: list[str]) -> str:
    if not terms:
        return "false"
    return terms[0] if len(terms) == 1 else "(or " + " ".join(terms) + ")"


def _count(bools: list[str]) -> str:
    return _sum([f"(ite {b} 1 0)" for b in bools])


def emit_smtlib(request: SolveRequest, target_sum: int) -> str:
    """Render the query ``exists config: valid and prioritySum >= target_sum``."""
    model, scenario, previous = request.model, request.scenario, request.previous
    isolated = scenario.isolated_nodes
    central = sorted(model.central_ids, key=natural_key)
    inactive = request.inactive_clusters()
    lines = [
        "; deployment feasibility query",
        f"; isolated: {' '.join(sorted(isolated, key=natural_key)) or '-'}; faultCount: {scenario.fault_count}",
        f"; target priority sum: {target_sum}",
        "(set-logic QF_LIA)",
    ]
    decl = lines.append

    def v(kind, c, n):
        return f"{kind}_{_sym(c.id)}_{_sym(n)}"

    prio_terms = []
    load_terms: dict[str, list[str]] = {n: [] for n in central}
    for c in model.clusters:
        decl(f"; cluster {c.id}: sumWcets={c.sum_wcets} failOp={c.fail_op} hotReq={str(c.hot_standby_slave_req).lower()}")
        for n in central:
            for kind in ("alloc", "master", "slave", "act"):
                decl(f"(declare-const {v(kind, c, n)} Bool)")
        masters = [v("master", c, n) for n in central]
        slaves = [v("slave", c, n) for n in central]
        decl(f"(assert (<= {_count(masters)} 1))")
        decl(f"(assert (<= {_count(slaves)} 1))")
        for n in central:
            m, s, a = v("master", c, n), v("slave", c, n), v("alloc", c, n)
            decl(f"(assert (=> {m} {a}))")
            decl(f"(assert (=> {s} {a}))")
            decl(f"(assert (not (and {m} {s})))")
            # a slave needs a master on a node with the other supply (C3)
            partners = [v("master", c, o) for o in central
                        if o != n and model.node(o).power_supply is not model.node(n).power_supply]
            decl(f"(assert (=> {s} {_or(partners)}))")
            active = f"(or {m} {s})" if c.hot_standby_slave_req else m
            decl(f"(assert (= {v('act', c, n)} {active}))")
            if n in isolated:  # C2
                decl(f"(assert (not {m}))")
                decl(f"(assert (not {s}))")
            load_terms[n].append(f"(ite {v('act', c, n)} {c.sum_wcets} 0)")
        if c.id in inactive:  # C10
            for m in masters:
                decl(f"(assert (not {m}))")
        if not slave_allowed(c, scenario):  # C4
            for s in slaves:
                decl(f"(assert (not {s}))")

        allocs = [v("alloc", c, n) for n in central]
        if previous is None:  # C7
            decl(f"(assert (= {_count(allocs)} {allocation_count(model, c)}))")
            if needs_supply_diverse_allocation(model, c):
                for supply in sorted({model.node(n).power_supply for n in central}, key=lambda s: s.value):
                    decl(f"(assert {_or([v('alloc', c, n) for n in central if model.node(n).power_supply is supply])})")
        else:
            prev = previous.placement(c.id)
            keep = prev.allocated - isolated
            for n in central:  # C8
                a = v("alloc", c, n)
                decl(f"(assert {a})" if n in keep else f"(assert (not {a}))")
            if (prev.master is not None and prev.master in isolated and prev.hot_slave_present
                    and prev.slave not in isolated):  # C9
                for n in central:
                    if n != prev.slave:
                        decl(f"(assert (not {v('master', c, n)}))")

        has_master = _or(masters)
        prio_terms.append(f"(ite {has_master} {c.prio_points_master} 0)")
        if c.hot_standby_slave_req:
            prio_terms.append(f"(ite {_or(slaves)} {c.prio_points_hot_slave} 0)")

    for n in central:  # C1
        if n not in isolated:
            decl(f"(assert (<= {_sum(load_terms[n])} {model.node(n).total_time_budget}))")

    decl("(declare-const prio_sum Int)")
    decl(f"(assert (= prio_sum {_sum(prio_terms)}))")
    decl(f"(assert (>= prio_sum {target_sum}))")
    decl("(check-sat)")
    return "\n".join(lines) + "\n"
