"""Canonical text form for design models.

One statement per line, two-space indent, items grouped by kind in the order
diagrams, data, charts, actions. Within a diagram: entry, exits (sorted),
nodes in declaration order, arcs in decl_index order. Printing is a fixpoint:
the output parses back to an equal model and re-printing yields byte-identical
text.

String literals are re-escaped with the three supported escapes; interpolation
markers pass through verbatim. A carriage return inside literal text has no
escape in the language and is rejected.
"""

from __future__ import annotations

from .model import (
    ActionDef,
    CallTarget,
    DesignModel,
    Entity,
    ErSchema,
    Otherwise,
    Relation,
    ScChart,
    ScModule,
    StdArc,
    StdDiagram,
    Term,
)


def escape_string(text: str) -> str:
    if "\r" in text:
        raise ValueError("carriage return has no escape in the design language")
    out = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return f'"{out}"'


def _term(t: Term) -> str:
    if t.kind == "literal":
        return escape_string(t.value)
    if t.kind == "variable":
        return t.value
    if t.kind == "input":
        return "$input"
    raise ValueError(f"unknown term kind {t.kind!r}")


def _arc(a: StdArc) -> str:
    if isinstance(a.target, CallTarget):
        target = f"call {a.target.diagram} return {a.target.return_to}"
    else:
        target = a.target.node
    pattern = "otherwise" if isinstance(a.pattern, Otherwise) else escape_string(a.pattern)
    parts = [f"arc {a.from_node} -> {target} on {pattern}"]
    if a.guard is not None:
        parts.append(f"when {a.guard.var} {a.guard.op.value} {escape_string(a.guard.value)}")
    if a.action is not None:
        parts.append(f"do {a.action}")
    return " ".join(parts) + ";"


def print_diagram(d: StdDiagram) -> str:
    lines = [f"diagram {d.name} {{"]
    if d.entry is not None:
        lines.append(f"  entry {d.entry};")
    for ex in sorted(d.exits):
        lines.append(f"  exit {ex};")
    for n in d.nodes:
        lines.append(f"  node {n.name} output {escape_string(n.output)};")
    for a in sorted(d.arcs, key=lambda a: a.decl_index):
        lines.append(f"  {_arc(a)}")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _entity(e: Entity) -> list[str]:
    lines = [f"  entity {e.name} {{"]
    for a in e.attributes:
        key = " key" if a.is_key else ""
        lines.append(f"    {a.name}: {a.type.value}{key};")
    lines.append("  }")
    return lines


def _relation(r: Relation) -> str:
    return (
        f"  relation {r.name}({r.left.entity} {r.left.card.value}, "
        f"{r.right.entity} {r.right.card.value});"
    )


def print_schema(s: ErSchema) -> str:
    lines = [f"data {s.name} {{"]
    for e in s.entities:
        lines.extend(_entity(e))
    for r in s.relations:
        lines.append(_relation(r))
    lines.append("}")
    return "\n".join(lines) + "\n"


def _module(m: ScModule) -> list[str]:
    root = " root" if m.is_root else ""
    lines = [f"  module {m.name}{root} {{"]
    for inv in m.invocations:
        if inv.couples:
            lines.append(f"    invokes {inv.callee} with {', '.join(inv.couples)};")
        else:
            lines.append(f"    invokes {inv.callee};")
    lines.append("  }")
    return lines


def print_chart(c: ScChart) -> str:
    lines = [f"chart {c.name} {{"]
    for m in c.modules:
        lines.extend(_module(m))
    lines.append("}")
    return "\n".join(lines) + "\n"


def print_action(a: ActionDef) -> str:
    lines = [f"action {a.name} {{"]
    for asg in a.assignments:
        expr = " + ".join(_term(t) for t in asg.terms)
        lines.append(f"  {asg.var} = {expr};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def pretty_print(model: DesignModel) -> str:
    """Canonical text for the whole model; empty model prints as empty text."""
    chunks: list[str] = []
    chunks.extend(print_diagram(d) for d in model.diagrams)
    chunks.extend(print_schema(s) for s in model.schemas)
    chunks.extend(print_chart(c) for c in model.charts)
    chunks.extend(print_action(a) for a in model.actions)
    return "".join(chunks)
