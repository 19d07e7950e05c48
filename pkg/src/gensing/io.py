"""Graph files and JSON reports.

Graph file grammar, one directive per line::

    # comment
    vertex <id> euler=<int> [genus=<int>]
    edge <id> <id>
    cycle <name> <id>=<int> ...
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .lattice import GraphError, ResolutionGraph, validate_graph

SCHEMA_VERSION = "1.0"
_ID = re.compile(r"[A-Za-z0-9_.:+~^\-']+\Z")
_INT = re.compile(r"[+-]?\d+\Z")


class GraphFileError(ValueError):
    """Syntax errors; ``diagnostics`` holds (line, column, message) triples."""

    def __init__(self, diagnostics):
        self.diagnostics = diagnostics
        super().__init__("\n".join(f"line {ln}, column {col}: {msg}" for ln, col, msg in diagnostics))


@dataclass
class GraphDocument:
    graph: ResolutionGraph
    cycles: dict = field(default_factory=dict)  # name -> {vertex: int}


def _tokens(line):
    return [(m.start() + 1, m.group()) for m in re.finditer(r"\S+", line)]


def _keyval(tok, col, lineno, errs):
    key, sep, val = tok.partition("=")
    if not sep or not key:
        errs.append((lineno, col, f"expected key=value, got {tok!r}"))
        return None
    if not _INT.match(val):
        errs.append((lineno, col + len(key) + 1, f"expected an integer, got {val!r}"))
        return None
    return key, int(val)


def parse_graph_file(text: str) -> GraphDocument:
    errs = []
    vertices, edges, cycles = [], [], {}
    seen_cycle_lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = _tokens(line)
        if not toks:
            continue
        (c0, word), rest = toks[0], toks[1:]
        if word == "vertex":
            if not rest:
                errs.append((lineno, len(line.rstrip()) + 1, "missing vertex id"))
                continue
            col, vid = rest[0]
            if not _ID.match(vid):
                errs.append((lineno, col, f"bad vertex id {vid!r}"))
            attrs = {}
            malformed = False
            for col, tok in rest[1:]:
                kv = _keyval(tok, col, lineno, errs)
                if kv is None:
                    malformed = True
                    continue
                if kv[0] not in ("euler", "genus"):
                    errs.append((lineno, col, f"unknown vertex attribute {kv[0]!r}"))
                    continue
                attrs[kv[0]] = kv[1]
            if "euler" not in attrs:
                if malformed:
                    continue
                errs.append((lineno, c0, f"vertex {vid!r} has no euler=<int>"))
                continue
            vertices.append((vid, attrs["euler"], attrs.get("genus", 0)))
        elif word == "edge":
            if len(rest) != 2:
                col = rest[-1][0] if rest else len(line.rstrip()) + 1
                errs.append((lineno, col, f"edge needs exactly two endpoints, got {len(rest)}"))
                continue
            edges.append((rest[0][1], rest[1][1], lineno))
        elif word == "cycle":
            if not rest:
                errs.append((lineno, len(line.rstrip()) + 1, "missing cycle name"))
                continue
            col, name = rest[0]
            if name in cycles:
                errs.append((lineno, col, f"cycle {name!r} already defined on line {seen_cycle_lines[name]}"))
                continue
            coeffs = {}
            for col, tok in rest[1:]:
                kv = _keyval(tok, col, lineno, errs)
                if kv is not None:
                    coeffs[kv[0]] = coeffs.get(kv[0], 0) + kv[1]
            cycles[name] = coeffs
            seen_cycle_lines[name] = lineno
        else:
            errs.append((lineno, c0, f"unknown directive {word!r}"))
    ids = {v[0] for v in vertices}
    for u, v, lineno in edges:
        for x in (u, v):
            if x not in ids:
                errs.append((lineno, 1, f"edge endpoint {x!r} is not a declared vertex"))
    for name, coeffs in cycles.items():
        for x in coeffs:
            if x not in ids:
                errs.append((seen_cycle_lines[name], 1, f"cycle {name!r} names unknown vertex {x!r}"))
    if errs:
        raise GraphFileError(sorted(errs))
    g = validate_graph(vertices, [(u, v) for u, v, _ in edges])
    return GraphDocument(graph=g, cycles=cycles)


def emit_graph(g: ResolutionGraph, cycles=None) -> str:
    """Canonical text: vertices, then edges, then cycles, each sorted."""
    out = []
    genus = g.genus or (0,) * g.n
    for v, e, gg in sorted(zip(g.vertices, g.euler, genus)):
        out.append(f"vertex {v} euler={e}" + (f" genus={gg}" if gg else ""))
    for a, b in sorted(tuple(sorted(e)) for e in g.edges):
        out.append(f"edge {a} {b}")
    for name in sorted(cycles or {}):
        c = cycles[name]
        if not isinstance(c, dict):
            c = g.as_dict(c)
        terms = " ".join(f"{v}={int(x)}" for v, x in sorted(c.items()) if x != 0)
        out.append(f"cycle {name}" + (f" {terms}" if terms else ""))
    return "\n".join(out) + "\n"


def emit_document(doc: GraphDocument) -> str:
    return emit_graph(doc.graph, doc.cycles)


def read_graph_file(path) -> GraphDocument:
    with open(path, encoding="utf-8") as fh:
        return parse_graph_file(fh.read())


# -- reports ----------------------------------------------------------------

def to_jsonable(obj):
    """Fractions become "p/q" strings; tuples become lists; dataclasses become dicts."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, int):
        return obj
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(x) for x in items]
    if hasattr(obj, "__dataclass_fields__"):
        return {k: to_jsonable(getattr(obj, k)) for k in obj.__dataclass_fields__}
    if hasattr(obj, "item"):  # numpy scalar
        return to_jsonable(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def parse_rational(s) -> Fraction:
    return Fraction(s)


def make_report(g: ResolutionGraph | None, operation: str, inputs: dict, results: dict,
                **extra) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "operation": operation,
        "graph_fingerprint": g.fingerprint if g is not None else None,
        "inputs": to_jsonable(inputs),
        "results": to_jsonable(results),
    }
    for k, v in extra.items():
        doc[k] = to_jsonable(v)
    return doc


def dumps_report(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True)


def cycle_dict(g: ResolutionGraph, c) -> dict:
    """Full vertex -> coefficient mapping (zeros included) for reports."""
    return {v: x for v, x in zip(g.vertices, c)}


__all__ = [
    "GraphDocument", "GraphError", "GraphFileError", "SCHEMA_VERSION", "cycle_dict",
    "dumps_report", "emit_document", "emit_graph", "make_report", "parse_graph_file",
    "parse_rational", "read_graph_file", "to_jsonable",
]
