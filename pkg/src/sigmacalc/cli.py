"""Command-line interface: JSON in, single-line JSON out.

Exit codes: 0 for answers (including a FAIL estimand), 2 for malformed
input, 3 for internal errors. Diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from typing import Any, Sequence

import numpy as np

from . import __version__
from .adjustment import (
    AdjustmentSpec,
    PartialExternalSpec,
    SpecialCase,
    check_general_adjustment,
    check_partial_external,
    check_selection_without_external,
    check_special_case,
    find_adjustment_sets,
)
from .calculus import RuleQuery, check_rule
from .dmg import Dmg, acyclify, extend, marginalize, twin_graph
from .errors import SigmaCalcError
from .identify import identify
from .io import GRAPH_FORMAT_VERSION, dumps, graph_from_json, graph_hash, graph_to_json
from .scm import (
    DiscreteScm,
    LinearScm,
    enumerate_joint,
    law_kernel,
    model_from_json,
    sample,
    validate_compatibility,
)
from .separation import Notion, SeparationQuery, oracle_witness, separated

log = logging.getLogger("sigmacalc")

EXIT_OK, EXIT_MALFORMED, EXIT_INTERNAL = 0, 2, 3


class UsageError(SigmaCalcError, ValueError):
    """Bad command-line arguments."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _nodes(values: Sequence[str] | None) -> list[str]:
    """Accept repeated and comma-separated node lists."""
    out = []
    for v in values or ():
        out.extend(p for p in v.split(",") if p)
    return out


def _load_json(path: str, what: str):
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise UsageError(f"cannot read {what} file {path!r}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"{what} file {path!r} is not valid JSON: {e.msg} at line {e.lineno}") from None


def _load_graph(path: str) -> Dmg:
    return graph_from_json(_load_json(path, "graph"))


def _assignments(values: Sequence[str] | None, kind=int) -> dict:
    """Parse ``name=value`` pairs."""
    out = {}
    for item in _nodes(values):
        name, sep, val = item.partition("=")
        if not sep:
            raise UsageError(f"expected name=value, got {item!r}")
        try:
            out[name] = kind(val)
        except ValueError:
            raise UsageError(f"bad value for {name!r}: {val!r}") from None
    return out


# -- commands -----------------------------------------------------------------


def cmd_sep(args) -> tuple[dict, Dmg]:
    g = _load_graph(args.graph)
    q = SeparationQuery(_nodes(args.a), _nodes(args.b), _nodes(args.c), Notion(args.notion))
    res: dict[str, Any] = {"separated": separated(g, q.a, q.b, q.c, q.notion), "query": q.to_json()}
    if args.witness:
        res["witness_walk"] = None if res["separated"] else oracle_witness(g, q)
    return res, g


def _graph_cmd(fn):
    def run(args):
        g = _load_graph(args.graph)
        return {"graph": graph_to_json(fn(g, args))}, g

    return run


cmd_marginalize = _graph_cmd(lambda g, a: marginalize(g, _nodes(a.nodes)))
cmd_acyclify = _graph_cmd(lambda g, a: acyclify(g))
cmd_extend = _graph_cmd(lambda g, a: extend(g))
cmd_twin = _graph_cmd(lambda g, a: twin_graph(g, _nodes(a.w)))


def cmd_calculus(args):
    g = _load_graph(args.graph)
    q = RuleQuery(args.rule, _nodes(args.x), _nodes(args.y), _nodes(args.z), _nodes(args.w))
    v = check_rule(g, q, condition_on_inputs=args.condition_on_inputs)
    return {"rule": int(q.rule), **v.to_json()}, g


def cmd_adjust(args):
    g = _load_graph(args.graph)
    roles = _load_json(args.roles, "roles")
    if not isinstance(roles, dict):
        raise UsageError("roles file must hold a JSON object")
    if args.action == "find":
        bad = set(roles) - {"y", "x", "c", "s", "w"}
        if bad:
            raise UsageError(f"field(s) {sorted(bad)} are not search inputs; give y, x, c, s, w")
        found = find_adjustment_sets(g, max_size=args.max_size, threads=args.threads,
                                     **{k: v for k, v in roles.items()})
        return {"assignments": [
            {"z0": sorted(a.z0), "zplus": sorted(a.zplus), "l": sorted(a.l)} for a in found
        ]}, g
    if args.variant == "partial-external":
        res = check_partial_external(g, PartialExternalSpec.from_json(roles))
    else:
        spec = AdjustmentSpec.from_json(roles)
        if args.variant == "general":
            res = check_general_adjustment(g, spec)
        elif args.variant == "no-external":
            res = check_selection_without_external(g, spec)
        else:
            res = check_special_case(g, spec, SpecialCase(args.variant))
    return res.to_json(), g


def cmd_id(args):
    g = _load_graph(args.graph)
    e = identify(g, y=_nodes(args.y), w=_nodes(args.do))
    res = {
        "identifiable": not e.is_fail,
        "estimand": e.render(),
        "tree": e.to_json(),
    }
    return res, g


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.generic):
        return x.item()
    return x


def cmd_simulate(args):
    m = model_from_json(_load_json(args.model, "model"))
    g = m.graph
    if isinstance(m, LinearScm):
        xj = _assignments(args.input, float)
        k = law_kernel(m)
        if args.action == "sample":
            draws = sample(m, xj, args.n, args.seed)
            return {"samples": {v: _jsonable(a) for v, a in draws.items()}}, g
        if args.action == "joint":
            return {"targets": list(k.targets), "params": list(k.params), "A": k.A.tolist(),
                    "b": k.b.tolist(), "S": k.S.tolist()}, g
        return {"outputs": list(m.outputs), "mean": k.mean(xj).tolist(), "cov": k.S.tolist()}, g
    xj = _assignments(args.input, int)
    if args.action == "sample":
        draws = sample(m, xj, args.n, args.seed)
        return {"samples": {v: _jsonable(a) for v, a in draws.items()}}, g
    if args.action == "joint":
        j = enumerate_joint(m)
        return {"outputs": list(j.outputs), "inputs": list(j.inputs), "array": j.array.tolist()}, g
    j = enumerate_joint(m, xj)
    if j.inputs:
        raise UsageError(f"law needs values for inputs {list(j.inputs)}; pass --input name=value")
    return {"outputs": list(j.outputs), "array": j.array.tolist()}, g


def cmd_validate(args):
    d = _load_json(args.model, "model")
    m = model_from_json(d)
    if isinstance(m, DiscreteScm):
        v = validate_compatibility(m)
        return {"compatible": not v, "violations": [x.to_json() for x in v]}, m.graph
    m.solver()
    return {"compatible": True, "violations": []}, m.graph


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sigmacalc", description="Separation, causal calculus, adjustment and identification "
                "on directed mixed graphs.")
    p.add_argument("--version", action="store_true", help="print version information and exit")
    p.add_argument("--threads", type=int, default=1, help="worker threads for searches")
    p.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("sep", help="σ- or d-separation query")
    s.add_argument("--notion", choices=[n.value for n in Notion], default="sigma")
    s.add_argument("--a", action="append", required=True)
    s.add_argument("--b", action="append", required=True)
    s.add_argument("--c", action="append")
    s.add_argument("--witness", action="store_true", help="emit an open walk when connected")
    s.add_argument("graph")
    s.set_defaults(func=cmd_sep)

    s = sub.add_parser("marginalize", help="marginalize nodes out of a graph")
    s.add_argument("--nodes", action="append", required=True)
    s.add_argument("graph")
    s.set_defaults(func=cmd_marginalize)

    for name, fn, text in (("acyclify", cmd_acyclify, "acyclification"),
                           ("extend", cmd_extend, "add intervention indicators")):
        s = sub.add_parser(name, help=text)
        s.add_argument("graph")
        s.set_defaults(func=fn)

    s = sub.add_parser("twin", help="twin graph for an intervention")
    s.add_argument("--w", action="append", required=True)
    s.add_argument("graph")
    s.set_defaults(func=cmd_twin)

    s = sub.add_parser("calculus", help="check one of the three rules")
    s.add_argument("--rule", type=int, choices=(1, 2, 3), required=True)
    for flag in ("x", "y"):
        s.add_argument(f"--{flag}", action="append", required=True)
    for flag in ("z", "w"):
        s.add_argument(f"--{flag}", action="append")
    s.add_argument("--condition-on-inputs", action="store_true")
    s.add_argument("graph")
    s.set_defaults(func=cmd_calculus)

    s = sub.add_parser("adjust", help="check or search adjustment sets")
    s.add_argument("action", choices=("check", "find"))
    s.add_argument("--roles", required=True, help="JSON file with role sets")
    s.add_argument("--variant", default="general",
                   choices=["general", "no-external", "partial-external"] + [c.value for c in SpecialCase])
    s.add_argument("--max-size", type=int, default=3)
    s.add_argument("graph")
    s.set_defaults(func=cmd_adjust)

    s = sub.add_parser("id", help="identify P(Y | do(W))")
    s.add_argument("--y", action="append", required=True)
    s.add_argument("--do", action="append")
    s.add_argument("graph")
    s.set_defaults(func=cmd_id)

    s = sub.add_parser("simulate", help="exact law, joint table or samples of a model")
    s.add_argument("action", choices=("law", "sample", "joint"))
    s.add_argument("--input", action="append", help="input value as name=value")
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("model")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("validate", help="check nested-loop compatibility of a model")
    s.add_argument("model")
    s.set_defaults(func=cmd_validate)
    return p


_FIELD = re.compile(r"field '([^']+)'")


def _error(e: BaseException, kind: str) -> dict:
    msg = str(e.args[0]) if isinstance(e, KeyError) and e.args else str(e)
    err = {"type": type(e).__name__, "message": msg}
    m = _FIELD.search(msg)
    if m:
        err["field"] = m.group(1)
    return {"status": "error", "error": err, "kind": kind,
            "provenance": {"version": __version__, "graph_format": GRAPH_FORMAT_VERSION}}


def run(argv: Sequence[str] | None = None, out=None) -> int:
    """Run one command; write the JSON result to ``out`` and return the exit code."""
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
        if args.version:
            out.write(dumps({"version": __version__, "graph_format": GRAPH_FORMAT_VERSION}) + "\n")
            return EXIT_OK
        if not args.command:
            raise UsageError("missing command")
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        payload, g = args.func(args)
    except SigmaCalcError as e:
        log.debug("malformed input", exc_info=True)
        print(f"sigmacalc: {e}", file=sys.stderr)
        out.write(dumps(_error(e, "malformed-input")) + "\n")
        return EXIT_MALFORMED
    except Exception as e:  # noqa: BLE001 - last-resort reporting
        log.exception("internal error")
        out.write(dumps(_error(e, "internal")) + "\n")
        return EXIT_INTERNAL
    status = "fail-value" if payload.get("identifiable") is False else "ok"
    res = {**payload, "status": status,
           "provenance": {"graph_sha256": graph_hash(g), "version": __version__,
                          "graph_format": GRAPH_FORMAT_VERSION}}
    out.write(dumps(res) + "\n")
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
