"""Rendering traces as text tables, JSON (schema v1) and DOT graphs, and
reading JSON traces back."""

from __future__ import annotations

import json
from typing import Mapping

from .engine import SimulationTrace
from .problem import Problem

SCHEMA = "v1"
FORMATS = ("text", "json", "dot")


def _pairs(problem: Problem) -> list[tuple[str, str]]:
    return problem.pairs


def to_text(trace: SimulationTrace, problem: Problem) -> str:
    k, l = trace.k, trace.loop_start
    title = problem.name or "simulation"
    lines = [f"problem: {title}", f"states: {k}"]
    lines.append(f"loop: {l}..{k}" if l is not None else "loop: none (finite path)")
    for t in range(1, k + 1):
        mark = ""
        if l is not None and t == l:
            mark = "  <- loop start"
        if t == k and l is not None:
            mark += f"  -> back to {l}"
        lines.append("")
        lines.append(f"state {t}{mark}")
        for name in problem.aspects:
            if len(problem.aspects) > 1:
                lines.append(f"  [{name}]")
            for a, b in _pairs(problem):
                r = trace.relation(t, name, a, b)
                lines.append(f"  {a} {b} {r}")
    return "\n".join(lines) + "\n"


def to_json_obj(trace: SimulationTrace, problem: Problem, *, stats: bool = True) -> dict:
    doc: dict[str, object] = {
        "schema": SCHEMA,
        "problem": problem.name,
        "k": trace.k,
        "loop_start": trace.loop_start,
        "objects": list(problem.objects),
        "aspects": [
            {
                "name": name,
                "calculus": cal.name,
                "states": [
                    {f"{a},{b}": trace.relation(t, name, a, b) for a, b in _pairs(problem)}
                    for t in range(1, trace.k + 1)
                ],
            }
            for name, cal in problem.aspects.items()
        ],
    }
    if stats:
        doc["stats"] = _plain(trace.stats)
    return doc


def _plain(value):
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, float):
        return round(value, 3)
    return value


def to_json(trace: SimulationTrace, problem: Problem, *, stats: bool = True) -> str:
    return json.dumps(to_json_obj(trace, problem, stats=stats), indent=2) + "\n"


def to_dot(trace: SimulationTrace, problem: Problem) -> str:
    k, l = trace.k, trace.loop_start
    name = (problem.name or "trace").replace('"', "'")
    lines = [f'digraph "{name}" {{', "  rankdir=LR;", "  node [shape=box, fontname=\"monospace\"];"]
    for t in range(1, k + 1):
        changed = _changes(trace, problem, t)
        label = f"state {t}" + "".join(f"\\n{c}" for c in changed)
        style = ", peripheries=2" if t == l else ""
        lines.append(f'  s{t} [label="{label}"{style}];')
    for t in range(1, k):
        lines.append(f"  s{t} -> s{t + 1};")
    if l is not None:
        lines.append(f'  s{k} -> s{l} [color=red, penwidth=2, label="loop"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _changes(trace: SimulationTrace, problem: Problem, t: int) -> list[str]:
    """Relations that differ from the previous state (all of them for the
    first state would be too many, so none are listed there)."""
    if t == 1:
        return []
    out = []
    for name in problem.aspects:
        for a, b in _pairs(problem):
            if a > b:
                continue
            r = trace.relation(t, name, a, b)
            if r != trace.relation(t - 1, name, a, b):
                out.append(f"{name}[{a},{b}]={r}")
    return out


def render(trace: SimulationTrace, problem: Problem, fmt: str) -> str:
    if fmt == "text":
        return to_text(trace, problem)
    if fmt == "json":
        return to_json(trace, problem)
    if fmt == "dot":
        return to_dot(trace, problem)
    raise ValueError(f"unknown format {fmt!r}; choose from {', '.join(FORMATS)}")


class TraceFormatError(ValueError):
    pass


def trace_from_json(text: str, problem: Problem) -> SimulationTrace:
    """Rebuild a trace from a v1 JSON document. Diagonal entries are filled
    with each aspect's identity relation."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TraceFormatError(f"not JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA:
        raise TraceFormatError(f"expected a trace document with schema {SCHEMA!r}")
    try:
        k = int(doc["k"])
        loop = doc["loop_start"]
        per_aspect = {a["name"]: a["states"] for a in doc["aspects"]}
    except (KeyError, TypeError, ValueError) as exc:
        raise TraceFormatError(f"malformed trace document: {exc}") from None
    states = []
    for t in range(k):
        state = {}
        for name, cal in problem.aspects.items():
            rows = per_aspect.get(name)
            if rows is None or t >= len(rows):
                raise TraceFormatError(f"trace lacks state {t + 1} of aspect {name}")
            rels = {}
            for key, r in rows[t].items():
                a, _, b = key.partition(",")
                rels[(a, b)] = r
            for o in problem.objects:
                rels.setdefault((o, o), cal.identity_name)
            state[name] = rels
        states.append(state)
    return SimulationTrace(k, None if loop is None else int(loop), tuple(states),
                           doc.get("stats") or {})
