"""JSON serialization of graphs."""

from __future__ import annotations

import hashlib
import json
from typing import Any, Mapping

from .dmg import Dmg, NodeKind
from .errors import MalformedSpec

__all__ = ["GRAPH_FORMAT_VERSION", "graph_to_json", "graph_from_json", "dumps", "graph_hash"]

GRAPH_FORMAT_VERSION = "1"


def graph_to_json(g: Dmg) -> dict:
    """Deterministic JSON form; nodes and edges sorted lexicographically."""
    d: dict[str, Any] = {
        "nodes": [{"id": v, "kind": g.kind(v).value} for v in sorted(g.nodes)],
        "directed": [list(e) for e in sorted(g.directed)],
        "bidirected": sorted(sorted(e) for e in g.bidirected),
    }
    if g.input_confounded:
        d["input_confounded"] = True
    return d


def _field(d: Mapping, key: str, default=None, *, required=False):
    if key not in d:
        if required:
            raise MalformedSpec(f"missing field '{key}'")
        return default
    return d[key]


def graph_from_json(d: Mapping) -> Dmg:
    """Parse the JSON form; errors name the offending field."""
    if not isinstance(d, Mapping):
        raise MalformedSpec("graph must be a JSON object")
    nodes = _field(d, "nodes", required=True)
    if not isinstance(nodes, list):
        raise MalformedSpec("field 'nodes' must be a list")
    kinds = {}
    for i, n in enumerate(nodes):
        if isinstance(n, str):
            n = {"id": n}
        if not isinstance(n, Mapping) or not isinstance(n.get("id"), str) or not n["id"]:
            raise MalformedSpec(f"field 'nodes[{i}].id' must be a nonempty string")
        try:
            kinds[n["id"]] = NodeKind(n.get("kind", "output"))
        except ValueError:
            raise MalformedSpec(f"field 'nodes[{i}].kind' must be output, input or latent") from None
    edges = {}
    for key in ("directed", "bidirected"):
        val = _field(d, key, [])
        if not isinstance(val, list):
            raise MalformedSpec(f"field '{key}' must be a list of pairs")
        for i, e in enumerate(val):
            if not isinstance(e, list) or len(e) != 2 or not all(isinstance(x, str) for x in e):
                raise MalformedSpec(f"field '{key}[{i}]' must be a pair of node ids")
        edges[key] = [tuple(e) for e in val]
    return Dmg(kinds, edges["directed"], edges["bidirected"],
               input_confounded=bool(_field(d, "input_confounded", False)))


def dumps(obj) -> str:
    """Single-line JSON with stable key order."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def graph_hash(g: Dmg) -> str:
    return hashlib.sha256(dumps(graph_to_json(g)).encode()).hexdigest()
