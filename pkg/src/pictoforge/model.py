"""In-memory design model shared by all tools.

Three notations live side by side in one DesignModel: hierarchical dialogue
diagrams (nodes emit output text, arcs fire on user input), entity-relationship
schemas, and structure charts. Models are immutable values: every element is a
frozen dataclass and every collection a tuple, so a model can be shared freely
across threads. Source spans are carried for diagnostics but excluded from
equality; `model_equal` is pure structural comparison with arc order (via
decl_index) significant.

Dangling cross-references (an arc targeting an undeclared node, a call to an
unknown diagram) are representable on purpose: `build_index` records them as
unresolved entries and the checker judges severity. Only local structural
rules (name uniqueness, dense arc ordinals, at most one chart root) are hard
errors here.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import ModelError

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

# `${name}` markers inside node output templates.
PLACEHOLDER_RE = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}")


def placeholders(template: str) -> list[str]:
    """Placeholder names referenced by an output template, in order."""
    return PLACEHOLDER_RE.findall(template)


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int  # 1-based
    col: int  # 1-based

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


class AttrType(str, Enum):
    INT = "int"
    STRING = "string"
    BOOL = "bool"
    DATE = "date"


class Card(str, Enum):
    ONE = "1"
    MANY = "N"


class GuardOp(str, Enum):
    EQ = "=="
    NEQ = "!="


# --- dialogue diagrams -------------------------------------------------------


@dataclass(frozen=True)
class StdNode:
    name: str
    output: str  # literal text, `${var}` marks an interpolation point
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class PlainTarget:
    node: str


@dataclass(frozen=True)
class CallTarget:
    diagram: str
    return_to: str


@dataclass(frozen=True)
class Otherwise:
    """Arc pattern that matches any input line."""


OTHERWISE = Otherwise()


@dataclass(frozen=True)
class Guard:
    var: str
    op: GuardOp
    value: str


@dataclass(frozen=True)
class StdArc:
    from_node: str
    target: PlainTarget | CallTarget
    pattern: str | Otherwise
    guard: Guard | None = None
    action: str | None = None
    decl_index: int = 0
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class StdDiagram:
    name: str
    entry: str | None
    exits: frozenset[str]
    nodes: tuple[StdNode, ...]
    arcs: tuple[StdArc, ...]
    span: SourceSpan | None = field(default=None, compare=False)

    def node_names(self) -> frozenset[str]:
        return frozenset(n.name for n in self.nodes)

    def arcs_from(self, node: str) -> list[StdArc]:
        """Outgoing arcs of `node` in decl_index order."""
        return sorted((a for a in self.arcs if a.from_node == node), key=lambda a: a.decl_index)


# --- actions -----------------------------------------------------------------


@dataclass(frozen=True)
class Term:
    """One term of an assignment expression: literal text, a variable, or the input line."""

    kind: str  # "literal" | "variable" | "input"
    value: str = ""


@dataclass(frozen=True)
class Assignment:
    var: str
    terms: tuple[Term, ...]


@dataclass(frozen=True)
class ActionDef:
    name: str
    assignments: tuple[Assignment, ...]
    span: SourceSpan | None = field(default=None, compare=False)


# --- entity-relationship schemas ----------------------------------------------


@dataclass(frozen=True)
class EntityAttr:
    name: str
    type: AttrType
    is_key: bool = False


@dataclass(frozen=True)
class Entity:
    name: str
    attributes: tuple[EntityAttr, ...]
    span: SourceSpan | None = field(default=None, compare=False)

    def key_attrs(self) -> list[EntityAttr]:
        return [a for a in self.attributes if a.is_key]


@dataclass(frozen=True)
class RelationEnd:
    entity: str
    card: Card


@dataclass(frozen=True)
class Relation:
    name: str
    left: RelationEnd
    right: RelationEnd
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ErSchema:
    name: str
    entities: tuple[Entity, ...]
    relations: tuple[Relation, ...]
    span: SourceSpan | None = field(default=None, compare=False)


# --- structure charts ----------------------------------------------------------


@dataclass(frozen=True)
class Invocation:
    callee: str
    couples: tuple[str, ...] = ()


@dataclass(frozen=True)
class ScModule:
    name: str
    is_root: bool
    invocations: tuple[Invocation, ...]
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ScChart:
    name: str
    modules: tuple[ScModule, ...]
    span: SourceSpan | None = field(default=None, compare=False)

    def root(self) -> ScModule | None:
        for m in self.modules:
            if m.is_root:
                return m
        return None


# --- the model ------------------------------------------------------------------


@dataclass(frozen=True)
class DesignModel:
    diagrams: tuple[StdDiagram, ...] = ()
    schemas: tuple[ErSchema, ...] = ()
    charts: tuple[ScChart, ...] = ()
    actions: tuple[ActionDef, ...] = ()
    source_name: str = field(default="", compare=False)

    def diagram(self, name: str) -> StdDiagram | None:
        for d in self.diagrams:
            if d.name == name:
                return d
        return None

    def schema(self, name: str) -> ErSchema | None:
        for s in self.schemas:
            if s.name == name:
                return s
        return None

    def chart(self, name: str) -> ScChart | None:
        for c in self.charts:
            if c.name == name:
                return c
        return None

    def action(self, name: str) -> ActionDef | None:
        for a in self.actions:
            if a.name == name:
                return a
        return None


def model_equal(a: DesignModel, b: DesignModel) -> bool:
    """Structural equality; spans and source_name are provenance and ignored."""
    return (
        a.diagrams == b.diagrams
        and a.schemas == b.schemas
        and a.charts == b.charts
        and a.actions == b.actions
    )


# --- name index -------------------------------------------------------------------


@dataclass
class NameIndex:
    """Resolution maps over one model, plus every dangling reference found.

    `toplevel` is keyed by (kind, name) with kind in diagram/schema/chart/action.
    Scoped elements are keyed by (container, name). `unresolved` holds
    (kind, name) pairs for every referenced-but-undeclared identifier, in first
    occurrence order; the checker decides what each one means.
    """

    toplevel: dict[tuple[str, str], object]
    nodes: dict[tuple[str, str], StdNode]
    entities: dict[tuple[str, str], Entity]
    modules: dict[tuple[str, str], ScModule]
    unresolved: tuple[tuple[str, str], ...]


def _dup(kind: str, name: str, first, second) -> ModelError:
    where = ""
    if getattr(first, "span", None) and getattr(second, "span", None):
        where = f" (declared at {first.span} and {second.span})"
    return ModelError("DUP_NAME", f"duplicate {kind} name '{name}'{where}")


def build_index(model: DesignModel) -> NameIndex:
    """Build resolution maps; raise ModelError on structural violations.

    Raises DUP_NAME for any name collision (top level or within a container)
    and INVALID_MODEL for broken arc ordinals, multiple chart roots, or
    malformed output placeholders. Dangling references never raise; they are
    returned in `unresolved`.
    """
    toplevel: dict[tuple[str, str], object] = {}
    for kind, elems in (
        ("diagram", model.diagrams),
        ("schema", model.schemas),
        ("chart", model.charts),
        ("action", model.actions),
    ):
        for elem in elems:
            key = (kind, elem.name)
            if key in toplevel:
                raise _dup(kind, elem.name, toplevel[key], elem)
            toplevel[key] = elem

    nodes: dict[tuple[str, str], StdNode] = {}
    entities: dict[tuple[str, str], Entity] = {}
    modules: dict[tuple[str, str], ScModule] = {}
    unresolved: list[tuple[str, str]] = []
    seen_unresolved: set[tuple[str, str]] = set()

    def dangle(kind: str, name: str) -> None:
        key = (kind, name)
        if key not in seen_unresolved:
            seen_unresolved.add(key)
            unresolved.append(key)

    for d in model.diagrams:
        for n in d.nodes:
            key = (d.name, n.name)
            if key in nodes:
                raise _dup("node", f"{d.name}.{n.name}", nodes[key], n)
            nodes[key] = n
            for var in placeholders(n.output):
                if not IDENT_RE.match(var):  # PLACEHOLDER_RE guarantees this
                    raise ModelError("INVALID_MODEL", f"bad placeholder '{var}' in node {n.name}")
        ordinals = sorted(a.decl_index for a in d.arcs)
        if ordinals != list(range(len(d.arcs))):
            raise ModelError("INVALID_MODEL", f"arc ordinals of diagram '{d.name}' are not dense")
        declared = d.node_names()
        if d.entry is not None and d.entry not in declared:
            dangle("node", d.entry)
        for ex in sorted(d.exits):
            if ex not in declared:
                dangle("node", ex)
        for a in d.arcs:
            if a.from_node not in declared:
                dangle("node", a.from_node)
            if isinstance(a.target, PlainTarget):
                if a.target.node not in declared:
                    dangle("node", a.target.node)
            else:
                if ("diagram", a.target.diagram) not in toplevel:
                    dangle("diagram", a.target.diagram)
                if a.target.return_to not in declared:
                    dangle("node", a.target.return_to)
            if a.action is not None and ("action", a.action) not in toplevel:
                dangle("action", a.action)

    for s in model.schemas:
        for e in s.entities:
            key = (s.name, e.name)
            if key in entities:
                raise _dup("entity", f"{s.name}.{e.name}", entities[key], e)
            entities[key] = e
            attr_names = [a.name for a in e.attributes]
            if len(attr_names) != len(set(attr_names)):
                raise ModelError("DUP_NAME", f"duplicate attribute name in entity '{e.name}'")
        rel_names: dict[str, Relation] = {}
        for r in s.relations:
            if r.name in rel_names:
                raise _dup("relation", f"{s.name}.{r.name}", rel_names[r.name], r)
            rel_names[r.name] = r
            for end in (r.left, r.right):
                if (s.name, end.entity) not in entities:
                    dangle("entity", end.entity)

    for c in model.charts:
        roots = [m for m in c.modules if m.is_root]
        if len(roots) > 1:
            raise ModelError("INVALID_MODEL", f"chart '{c.name}' has more than one root module")
        for m in c.modules:
            key = (c.name, m.name)
            if key in modules:
                raise _dup("module", f"{c.name}.{m.name}", modules[key], m)
            modules[key] = m
        for m in c.modules:
            for inv in m.invocations:
                if (c.name, inv.callee) not in modules:
                    dangle("module", inv.callee)

    return NameIndex(
        toplevel=toplevel,
        nodes=nodes,
        entities=entities,
        modules=modules,
        unresolved=tuple(unresolved),
    )
