"""Command-line front end.

Exit codes: 0 success, 1 violations or infeasible requests, 2 I/O or schema errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .constraints import DeploymentConfig
from .model import FaultScenario, ModelValidationError, PowerSupply, SchemaError, check_model, validate_model
from .pag import AnalysisError, analyze, build_pag
from .report import (
    degradation_report,
    deployment_report,
    pag_structure,
    render_text,
    solve_extra,
    to_dot,
    to_json,
)
from .smtlib import emit_smtlib
from .solver import RequestError, SolveRequest, max_priority_cap, solve

log = logging.getLogger("fodeploy")


class _Failure(Exception):
    def __init__(self, status: int, doc: dict):
        self.status = status
        self.doc = doc


def _read_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise _Failure(2, {"error": f"cannot read {path}: {exc.strerror}", "kind": "io"}) from None
    except json.JSONDecodeError as exc:
        raise _Failure(2, {"error": f"{path}: invalid JSON ({exc})", "kind": "schema"}) from None


def _load_model(path: str):
    raw = _read_json(path)
    try:
        return validate_model(raw)
    except SchemaError as exc:
        raise _Failure(2, {"error": f"{path}: {exc}", "kind": "schema"}) from None
    except ModelValidationError as exc:
        raise _Failure(1, {"error": f"{path}: invalid model", "kind": "violations",
                           "violations": [v.to_dict() for v in exc.violations]}) from None


def _load_config(path: str) -> tuple[DeploymentConfig, FaultScenario]:
    raw = _read_json(path)
    try:
        config = DeploymentConfig.from_dict(raw)
        sc = raw.get("scenario") or {}
        scenario = FaultScenario(frozenset(sc.get("isolated", ())), int(sc.get("faultCount", 0)))
    except (SchemaError, TypeError, ValueError) as exc:
        raise _Failure(2, {"error": f"{path}: {exc}", "kind": "schema"}) from None
    return config, scenario


def _dump_smtlib(directory: str, request: SolveRequest, best: int):
    out = Path(directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
        for target in range(max_priority_cap(request.model, request.scenario), best - 1, -1):
            (out / f"target_{target}.smt2").write_text(emit_smtlib(request, target), encoding="utf-8")
    except OSError as exc:
        raise _Failure(2, {"error": f"cannot write SMT-LIB scripts: {exc}", "kind": "io"}) from None


def _solve(request: SolveRequest, args) -> dict:
    try:
        result = solve(request, strategy=args.strategy)
    except RequestError as exc:
        raise _Failure(1, {"error": str(exc), "kind": "violations",
                           "violations": [v.to_dict() for v in exc.violations]}) from None
    if args.smtlib_dir:
        _dump_smtlib(args.smtlib_dir, request, result.priority_sum)
    return deployment_report(request.model, request.scenario, result.config, request.previous,
                             solve_extra(result))


def cmd_validate(args):
    raw = _read_json(args.model)
    try:
        violations = check_model(raw)
    except SchemaError as exc:
        raise _Failure(2, {"error": f"{args.model}: {exc}", "kind": "schema"}) from None
    return (1 if violations else 0), {"valid": not violations, "violations": [v.to_dict() for v in violations]}


def cmd_solve(args):
    model = _load_model(args.model)
    scenario = FaultScenario(frozenset(args.isolate), args.fault_count if args.fault_count is not None
                             else len(args.isolate))
    return 0, _solve(SolveRequest(model, scenario), args)


def cmd_transition(args):
    model = _load_model(args.model)
    previous, prior = _load_config(args.config)
    isolated = set(prior.isolated_nodes) | set(args.isolate)
    faults = len(args.isolate)
    for supply in args.supply:
        isolated |= {n.id for n in model.central_nodes if n.power_supply is PowerSupply(supply)}
        faults += 1
    if faults == 0:
        raise _Failure(2, {"error": "transition needs at least one --isolate or --supply", "kind": "schema"})
    count = args.fault_count if args.fault_count is not None else prior.fault_count + faults
    return 0, _solve(SolveRequest(model, FaultScenario(frozenset(isolated), count), previous), args)


def _write_dot(path, pag):
    try:
        Path(path).write_text(to_dot(pag), encoding="utf-8")
    except OSError as exc:
        raise _Failure(2, {"error": f"cannot write {path}: {exc.strerror}", "kind": "io"}) from None


def cmd_pag(args):
    model = _load_model(args.model)
    pag = build_pag(model, args.max_faults)
    if args.dot:
        _write_dot(args.dot, pag)
    return 0, pag_structure(pag)


def cmd_analyze(args):
    model = _load_model(args.model)
    initial = _load_config(args.initial)[0] if args.initial else None
    try:
        pag = analyze(model, args.max_faults, initial, workers=args.workers)
    except AnalysisError as exc:
        raise _Failure(1, {"error": str(exc), "kind": "violations"}) from None
    except RequestError as exc:
        raise _Failure(1, {"error": str(exc), "kind": "violations",
                           "violations": [v.to_dict() for v in exc.violations]}) from None
    if args.dot:
        _write_dot(args.dot, pag)
    return 0, degradation_report(pag)


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("model", help="model file (JSON)")
    common.add_argument("--format", choices=("text", "json"), default="text", dest="output_format")
    common.add_argument("-v", "--verbose", action="store_true")

    solving = argparse.ArgumentParser(add_help=False)
    solving.add_argument("--strategy", choices=("bnb", "sweep"), default="bnb",
                         help="branch-and-bound, or a descending-target satisfiability sweep")
    solving.add_argument("--smtlib-dir", help="write one SMT-LIB 2 script per checked target here")
    solving.add_argument("--fault-count", type=int, help="override the number of consumed faults")

    graph = argparse.ArgumentParser(add_help=False)
    graph.add_argument("--max-faults", type=_positive, default=3)
    graph.add_argument("--dot", help="also write the graph as DOT to this path")

    parser = argparse.ArgumentParser(prog="fodeploy", description="Fail-operational deployment synthesis")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a model file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", parents=[common, solving], help="optimal initial deployment")
    p.add_argument("--isolate", action="append", default=[], metavar="NODE")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("transition", parents=[common, solving], help="follow-up deployment after faults")
    p.add_argument("--config", required=True, help="previous config or report document")
    p.add_argument("--isolate", action="append", default=[], metavar="NODE")
    p.add_argument("--supply", action="append", default=[], choices=[s.value for s in PowerSupply])
    p.set_defaults(func=cmd_transition)

    p = sub.add_parser("pag", parents=[common, graph], help="platform-availability graph structure")
    p.set_defaults(func=cmd_pag)

    p = sub.add_parser("analyze", parents=[common, graph], help="resolved degradation report")
    p.add_argument("--initial", help="initial config for the root vertex (default: solve it)")
    p.add_argument("--workers", type=_positive, default=1)
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        status, doc = args.func(args)
    except _Failure as failure:
        status, doc = failure.status, failure.doc
    if args.output_format == "json":
        sys.stdout.write(to_json(doc))
    else:
        (sys.stderr if "error" in doc else sys.stdout).write(render_text(doc))
    return status


if __name__ == "__main__":
    sys.exit(main())
