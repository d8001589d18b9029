"""One-way artifact generation: data dictionary, SQL DDL, code skeletons, docs.

Everything here is a pure function of the model and deterministic, and nothing
here can be read back in as a model; generation is strictly one-way.

SQL mapping: one CREATE TABLE per entity (table and column identifiers are
snake_cased), key attributes are NOT NULL and form the PRIMARY KEY. A 1-N
relation adds `<one_side>_<key>` foreign-key columns to the N side; a 1-1
relation adds them to the right participant; an N-N relation becomes a
junction table named after the relation, with both sides' key columns as a
composite primary key. Single-column references are inline `REFERENCES`,
composite ones table-level FOREIGN KEY clauses. Column-name collisions are
resolved by numeric suffix (`_2`, `_3`, ...).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .checker import Severity, check_all, check_er, check_sc, check_std
from .errors import GenError
from .model import (
    AttrType,
    CallTarget,
    Card,
    DesignModel,
    Entity,
    ErSchema,
    Otherwise,
    PlainTarget,
    ScChart,
    StdDiagram,
    placeholders,
)
from .printer import escape_string, print_chart, print_diagram, print_schema

_SNAKE1 = re.compile(r"([A-Z]+)([A-Z][a-z])")
_SNAKE2 = re.compile(r"([a-z0-9])([A-Z])")


def snake(name: str) -> str:
    s = _SNAKE1.sub(r"\1_\2", name)
    s = _SNAKE2.sub(r"\1_\2", s)
    return s.lower()


# --- data dictionary -----------------------------------------------------------


@dataclass(frozen=True)
class DictionaryEntry:
    name: str
    kind: str  # NODE ARC_PATTERN VARIABLE ENTITY ATTRIBUTE RELATION MODULE COUPLE ACTION DIAGRAM
    defined_in: tuple[str, str]
    referenced_by: tuple[tuple[str, str], ...]


def gen_dictionary(model: DesignModel) -> list[DictionaryEntry]:
    """One entry per named symbol with its definition site and all use sites.

    Use sites are recorded at named-element granularity: a node mentioned by
    an arc is referenced by its diagram, a couple by the passing module, a
    variable by every diagram and action touching it.
    """
    container = ("model", model.source_name)
    defined: dict[tuple[str, str, tuple[str, str]], set[tuple[str, str]]] = {}

    def define(name: str, kind: str, where: tuple[str, str]) -> None:
        defined.setdefault((name, kind, where), set())

    def refer(name: str, kind: str, where: tuple[str, str], user: tuple[str, str]) -> None:
        defined.setdefault((name, kind, where), set()).add(user)

    var_written_by: dict[str, str] = {}
    for act in model.actions:
        for asg in act.assignments:
            var_written_by.setdefault(asg.var, act.name)

    def var_home(var: str) -> tuple[str, str]:
        writer = var_written_by.get(var)
        return ("action", writer) if writer is not None else container

    for d in model.diagrams:
        define(d.name, "DIAGRAM", container)
        user = ("diagram", d.name)
        declared = d.node_names()
        for n in d.nodes:
            define(n.name, "NODE", user)
            for var in placeholders(n.output):
                refer(var, "VARIABLE", var_home(var), user)
        mentioned: set[str] = set()
        if d.entry is not None:
            mentioned.add(d.entry)
        mentioned.update(d.exits)
        for a in d.arcs:
            mentioned.add(a.from_node)
            if isinstance(a.target, PlainTarget):
                mentioned.add(a.target.node)
            else:
                mentioned.add(a.target.return_to)
                if model.diagram(a.target.diagram) is not None:
                    refer(a.target.diagram, "DIAGRAM", container, user)
            if isinstance(a.pattern, str):
                refer(a.pattern, "ARC_PATTERN", user, user)
            if a.guard is not None:
                refer(a.guard.var, "VARIABLE", var_home(a.guard.var), user)
            if a.action is not None and model.action(a.action) is not None:
                refer(a.action, "ACTION", container, user)
        for name in mentioned & declared:
            refer(name, "NODE", user, user)

    for s in model.schemas:
        entity_names = {e.name for e in s.entities}
        for e in s.entities:
            define(e.name, "ENTITY", ("schema", s.name))
            for attr in e.attributes:
                define(attr.name, "ATTRIBUTE", ("entity", e.name))
        for r in s.relations:
            define(r.name, "RELATION", ("schema", s.name))
            for end in (r.left, r.right):
                if end.entity in entity_names:
                    refer(end.entity, "ENTITY", ("schema", s.name), ("relation", r.name))

    for c in model.charts:
        declared = {m.name for m in c.modules}
        for m in c.modules:
            define(m.name, "MODULE", ("chart", c.name))
        for m in c.modules:
            user = ("module", m.name)
            for inv in m.invocations:
                if inv.callee in declared:
                    refer(inv.callee, "MODULE", ("chart", c.name), user)
                for couple in inv.couples:
                    refer(couple, "COUPLE", ("chart", c.name), user)

    for act in model.actions:
        define(act.name, "ACTION", container)
        user = ("action", act.name)
        for asg in act.assignments:
            refer(asg.var, "VARIABLE", var_home(asg.var), user)
            for t in asg.terms:
                if t.kind == "variable":
                    refer(t.value, "VARIABLE", var_home(t.value), user)

    entries = [
        DictionaryEntry(name, kind, where, tuple(sorted(refs)))
        for (name, kind, where), refs in defined.items()
    ]
    entries.sort(key=lambda e: (e.name, e.kind, e.defined_in))
    return entries


# --- SQL DDL ---------------------------------------------------------------------


_SQL_TYPE = {
    AttrType.INT: "INTEGER",
    AttrType.STRING: "TEXT",
    AttrType.BOOL: "BOOLEAN",
    AttrType.DATE: "DATE",
}


@dataclass
class _Column:
    name: str
    type: str
    not_null: bool = False
    references: tuple[str, str] | None = None

    def render(self) -> str:
        out = f"{self.name} {self.type}"
        if self.not_null:
            out += " NOT NULL"
        if self.references is not None:
            out += f" REFERENCES {self.references[0]}({self.references[1]})"
        return out


@dataclass
class _Table:
    name: str
    columns: list[_Column]
    primary_key: list[str]
    foreign_keys: list[tuple[list[str], str, list[str]]]

    def add_column(self, col: _Column) -> _Column:
        taken = {c.name for c in self.columns}
        if col.name in taken:
            n = 2
            while f"{col.name}_{n}" in taken:
                n += 1
            col.name = f"{col.name}_{n}"
        self.columns.append(col)
        return col

    def render(self) -> str:
        parts = [c.render() for c in self.columns]
        if self.primary_key:
            parts.append(f"PRIMARY KEY ({', '.join(self.primary_key)})")
        for cols, ref_table, ref_cols in self.foreign_keys:
            parts.append(
                f"FOREIGN KEY ({', '.join(cols)}) REFERENCES {ref_table}({', '.join(ref_cols)})"
            )
        return f"CREATE TABLE {self.name} ({', '.join(parts)});"


def _keyed(entity: Entity, relation_name: str) -> Entity:
    if not entity.key_attrs():
        raise GenError(
            "NO_KEY", f"entity '{entity.name}' is referenced by relation '{relation_name}' but has no key"
        )
    return entity


def _add_reference(table: _Table, referenced: Entity) -> list[str]:
    """Add FK columns for `referenced`'s key to `table`; return column names."""
    ref_table = snake(referenced.name)
    keys = referenced.key_attrs()
    cols: list[str] = []
    for k in keys:
        col = table.add_column(
            _Column(
                f"{ref_table}_{snake(k.name)}",
                _SQL_TYPE[k.type],
                not_null=True,
                references=(ref_table, snake(k.name)) if len(keys) == 1 else None,
            )
        )
        cols.append(col.name)
    if len(keys) > 1:
        table.foreign_keys.append((list(cols), ref_table, [snake(k.name) for k in keys]))
    return cols


def gen_sql(model: DesignModel, schema_name: str) -> str:
    """DDL for one schema; validated downstream by the ddl module's parser."""
    schema = model.schema(schema_name)
    if schema is None:
        raise GenError("SCHEMA_NOT_FOUND", f"no data schema named '{schema_name}'")
    prefix = f"{schema_name}."
    errors = [
        f
        for f in check_er(model)
        if f.severity is Severity.ERROR and f.subject_name.startswith(prefix)
    ]
    if errors:
        raise GenError("SCHEMA_HAS_ERRORS", f"schema '{schema_name}': {errors[0].line()}")

    tables: dict[str, _Table] = {}
    order: list[str] = []
    for e in schema.entities:
        t = _Table(snake(e.name), [], [], [])
        for attr in e.attributes:
            t.add_column(_Column(snake(attr.name), _SQL_TYPE[attr.type], not_null=attr.is_key))
        t.primary_key = [snake(a.name) for a in e.key_attrs()]
        tables[e.name] = t
        order.append(e.name)

    junctions: list[_Table] = []
    for r in schema.relations:
        left = schema_entity(schema, r.left.entity)
        right = schema_entity(schema, r.right.entity)
        cards = (r.left.card, r.right.card)
        if cards == (Card.MANY, Card.MANY):
            junction = _Table(snake(r.name), [], [], [])
            left_cols = _add_reference(junction, _keyed(left, r.name))
            right_cols = _add_reference(junction, _keyed(right, r.name))
            junction.primary_key = [*left_cols, *right_cols]
            junctions.append(junction)
        else:
            if cards == (Card.ONE, Card.MANY):
                referenced, holder = left, right
            elif cards == (Card.MANY, Card.ONE):
                referenced, holder = right, left
            else:  # 1-1: the right participant holds the reference
                referenced, holder = left, right
            _add_reference(tables[holder.name], _keyed(referenced, r.name))

    lines = [tables[name].render() for name in order]
    lines.extend(t.render() for t in junctions)
    return "\n".join(lines) + "\n"


def schema_entity(schema: ErSchema, name: str) -> Entity:
    for e in schema.entities:
        if e.name == name:
            return e
    raise GenError("SCHEMA_HAS_ERRORS", f"relation references unknown entity '{name}'")


# --- code skeletons ----------------------------------------------------------------


def _comment_safe(text: str) -> str:
    return text.replace("*/", "* /")


def _chart_skeleton(chart: ScChart) -> str:
    params: dict[str, list[str]] = {m.name: [] for m in chart.modules}
    for m in chart.modules:
        for inv in m.invocations:
            if inv.callee in params:
                for couple in inv.couples:
                    if couple not in params[inv.callee]:
                        params[inv.callee].append(couple)
    root = chart.root()
    ordered = ([root] if root is not None else []) + [
        m for m in chart.modules if root is None or m.name != root.name
    ]
    lines = [f"/* module skeleton for chart '{chart.name}' */", ""]
    for m in ordered:
        sig = ", ".join(params[m.name]) or "void"
        lines.append(f"void {m.name}({sig}) {{")
        lines.append("    /* TODO */")
        for inv in m.invocations:
            lines.append(f"    {inv.callee}({', '.join(inv.couples)});")
        lines.append("}")
        lines.append("")
    return "\n".join(lines)


def _diagram_skeleton(diagram: StdDiagram) -> str:
    const = {n.name: f"{diagram.name}_{n.name}".upper() for n in diagram.nodes}
    lines = [f"/* dialogue skeleton for diagram '{diagram.name}' */", ""]
    if diagram.nodes:
        lines.append(f"enum {snake(diagram.name)}_state {{")
        for i, n in enumerate(diagram.nodes):
            comma = "," if i < len(diagram.nodes) - 1 else ""
            lines.append(f"    {const[n.name]}{comma}")
        lines.append("};")
        lines.append("")
    used_actions = sorted({a.action for a in diagram.arcs if a.action is not None})
    for name in used_actions:
        lines.append(f"void action_{name}(void) {{")
        lines.append("    /* TODO */")
        lines.append("}")
        lines.append("")
    lines.append(f"void run_{snake(diagram.name)}(void) {{")
    assert diagram.entry is not None  # generation is gated on C003
    lines.append(f"    enum {snake(diagram.name)}_state state = {const[diagram.entry]}; /* entry */")
    lines.append("    for (;;) {")
    lines.append("        switch (state) {")
    for n in diagram.nodes:
        lines.append(f"        case {const[n.name]}:")
        lines.append(f"            /* output: {_comment_safe(escape_string(n.output))} */")
        for a in diagram.arcs_from(n.name):
            pattern = "otherwise" if isinstance(a.pattern, Otherwise) else escape_string(a.pattern)
            guard = ""
            if a.guard is not None:
                guard = f" [when {a.guard.var} {a.guard.op.value} {escape_string(a.guard.value)}]"
            do = f" [do {a.action}]" if a.action is not None else ""
            if isinstance(a.target, CallTarget):
                where = f"call {a.target.diagram}, return {const.get(a.target.return_to, a.target.return_to)}"
            else:
                where = const.get(a.target.node, a.target.node)
            lines.append(f"            /* on {_comment_safe(pattern)}{_comment_safe(guard)} -> {where}{do} */")
        if n.name in diagram.exits:
            lines.append("            /* exit */")
        lines.append("            break;")
    lines.append("        }")
    lines.append("    }")
    lines.append("}")
    lines.append("")
    return "\n".join(lines)


def gen_skeleton(model: DesignModel, kind: str, name: str) -> str:
    """Procedure stubs for a chart, or a state dispatch loop for a diagram."""
    if kind == "chart":
        chart = model.chart(name)
        if chart is None:
            raise GenError("TARGET_NOT_FOUND", f"no chart named '{name}'")
        errors = [
            f
            for f in check_sc(model)
            if f.severity is Severity.ERROR
            and (f.subject_name == name or f.subject_name.startswith(f"{name}."))
        ]
        if errors:
            raise GenError("TARGET_HAS_ERRORS", f"chart '{name}': {errors[0].line()}")
        return _chart_skeleton(chart)
    if kind == "diagram":
        diagram = model.diagram(name)
        if diagram is None:
            raise GenError("TARGET_NOT_FOUND", f"no diagram named '{name}'")
        errors = [
            f
            for f in check_std(model)
            if f.severity is Severity.ERROR
            and (f.subject_name == name or f.subject_name.startswith(f"{name}."))
        ]
        if errors:
            raise GenError("TARGET_HAS_ERRORS", f"diagram '{name}': {errors[0].line()}")
        return _diagram_skeleton(diagram)
    raise GenError("TARGET_NOT_FOUND", f"unknown skeleton target kind '{kind}'")


# --- design document -----------------------------------------------------------------


def _md_cell(text: str) -> str:
    return text.replace("\\", "\\\\").replace("|", "\\|").replace("\n", "\\n") or "-"


def gen_doc(model: DesignModel) -> str:
    """Markdown document: per-item sections, the dictionary, findings appendix."""
    title = model.source_name or "untitled model"
    lines = [f"# Design Document: {title}", ""]
    empty = not (model.diagrams or model.schemas or model.charts or model.actions)
    if empty:
        return lines[0] + "\n"
    for d in model.diagrams:
        lines.extend([f"## Diagram: {d.name}", "", "```", print_diagram(d).rstrip("\n"), "```", ""])
    for s in model.schemas:
        lines.extend([f"## Data: {s.name}", "", "```", print_schema(s).rstrip("\n"), "```", ""])
    for c in model.charts:
        lines.extend([f"## Chart: {c.name}", "", "```", print_chart(c).rstrip("\n"), "```", ""])
    lines.extend(["## Dictionary", ""])
    entries = gen_dictionary(model)
    lines.append("| Name | Kind | Defined in | Referenced by |")
    lines.append("| --- | --- | --- | --- |")
    for e in entries:
        refs = ", ".join(f"{k}:{n}" for k, n in e.referenced_by)
        lines.append(
            f"| {_md_cell(e.name)} | {e.kind} | {e.defined_in[0]}:{_md_cell(e.defined_in[1])} | {_md_cell(refs) if refs else '-'} |"
        )
    lines.append("")
    lines.extend(["## Findings", ""])
    findings = check_all(model)
    if findings:
        lines.extend(f"- {f.line()}" for f in findings)
    else:
        lines.append("No findings.")
    lines.append("")
    return "\n".join(lines)


def format_dictionary(entries: list[DictionaryEntry]) -> str:
    """Plain-text dictionary listing, one symbol per line."""
    lines = []
    for e in entries:
        refs = ", ".join(f"{k}:{n}" for k, n in e.referenced_by) or "-"
        lines.append(f"{e.name}\t{e.kind}\tdefined={e.defined_in[0]}:{e.defined_in[1]}\trefs={refs}")
    return "\n".join(lines) + ("\n" if lines else "")
