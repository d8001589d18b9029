"""Semantic consistency checks over a design model.

Check catalogue (severity is fixed per code):

  C001 ERROR    arc references an undeclared node (source, target, or return point)
  C002 WARNING  node unreachable from the diagram entry
  C003 ERROR    diagram entry missing or undeclared
  C004 ERROR    two arcs from one node with identical pattern and
                non-distinguishing guards
  C005 ERROR    called diagram has no exit node
  C006 ERROR    call names an undefined diagram
  C007 ERROR    `do` names an undefined action
  C008 WARNING  variable read in a guard or output but never assigned
  C009 WARNING  non-exit node with no outgoing arcs
  C101 ERROR    duplicate entity name within a schema
  C102 ERROR    relation references an undefined entity
  C103 WARNING  entity has no key attribute
  C201 ERROR    module invokes an undefined module
  C202 WARNING  module participates in an invocation cycle
  C203 WARNING  module unreachable from the chart root
  C204 WARNING  chart has no root module
  C301 WARNING  data couple matches no entity attribute and no dialogue variable
  C302 WARNING  action assigns a variable never read by any output or guard

Findings attach to the nearest named element: arc problems to their source
node, C005 to the called diagram, C008/C302 to the variable. Scoped subjects
are qualified (`diagram.node`, `schema.entity`, `chart.module`). When a
diagram has no usable entry, C002 is suppressed for it (C003 already fires);
likewise C203 is suppressed for rootless charts. Output is sorted by
(code, subject, detail) so runs are byte-stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .model import (
    CallTarget,
    DesignModel,
    ErSchema,
    Otherwise,
    PlainTarget,
    ScChart,
    SourceSpan,
    StdDiagram,
    placeholders,
)


class Severity(str, Enum):
    ERROR = "ERROR"
    WARNING = "WARNING"


SEVERITY_BY_CODE: dict[str, Severity] = {
    "C001": Severity.ERROR,
    "C002": Severity.WARNING,
    "C003": Severity.ERROR,
    "C004": Severity.ERROR,
    "C005": Severity.ERROR,
    "C006": Severity.ERROR,
    "C007": Severity.ERROR,
    "C008": Severity.WARNING,
    "C009": Severity.WARNING,
    "C101": Severity.ERROR,
    "C102": Severity.ERROR,
    "C103": Severity.WARNING,
    "C201": Severity.ERROR,
    "C202": Severity.WARNING,
    "C203": Severity.WARNING,
    "C204": Severity.WARNING,
    "C301": Severity.WARNING,
    "C302": Severity.WARNING,
}


@dataclass(frozen=True)
class Finding:
    code: str
    severity: Severity
    subject_kind: str
    subject_name: str
    detail: str
    span: SourceSpan | None = field(default=None, compare=False)

    def line(self) -> str:
        return f"{self.code} {self.severity.value} {self.subject_kind}:{self.subject_name} - {self.detail}"


def _finding(code: str, kind: str, name: str, detail: str, span: SourceSpan | None = None) -> Finding:
    return Finding(code, SEVERITY_BY_CODE[code], kind, name, detail, span)


def _sorted(findings: list[Finding]) -> list[Finding]:
    return sorted(findings, key=lambda f: (f.code, f.subject_kind, f.subject_name, f.detail))


def reachable_nodes(diagram: StdDiagram) -> set[str]:
    """Nodes reachable from the entry; call arcs connect to their return point."""
    declared = diagram.node_names()
    if diagram.entry is None or diagram.entry not in declared:
        return set()
    seen = {diagram.entry}
    stack = [diagram.entry]
    arcs_by_from: dict[str, list] = {}
    for a in diagram.arcs:
        arcs_by_from.setdefault(a.from_node, []).append(a)
    while stack:
        cur = stack.pop()
        for a in arcs_by_from.get(cur, ()):
            nxt = a.target.node if isinstance(a.target, PlainTarget) else a.target.return_to
            if nxt in declared and nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def _pattern_text(pattern) -> str:
    return "otherwise" if isinstance(pattern, Otherwise) else repr(pattern)


def check_std(model: DesignModel) -> list[Finding]:
    """Dialogue-diagram checks C001-C009."""
    out: list[Finding] = []
    diagram_names = {d.name for d in model.diagrams}
    action_names = {a.name for a in model.actions}
    exitless_callers: dict[str, list[str]] = {}

    for d in model.diagrams:
        declared = d.node_names()
        node_span = {n.name: n.span for n in d.nodes}

        if d.entry is None:
            out.append(_finding("C003", "diagram", d.name, "no entry node declared", d.span))
        elif d.entry not in declared:
            out.append(
                _finding("C003", "diagram", d.name, f"entry names undeclared node '{d.entry}'", d.span)
            )

        for a in d.arcs:
            subject = f"{d.name}.{a.from_node}"
            if a.from_node not in declared:
                out.append(
                    _finding("C001", "node", subject, f"arc #{a.decl_index} leaves undeclared node '{a.from_node}'", a.span)
                )
            if isinstance(a.target, PlainTarget):
                if a.target.node not in declared:
                    out.append(
                        _finding("C001", "node", subject, f"arc #{a.decl_index} targets undeclared node '{a.target.node}'", a.span)
                    )
            else:
                if a.target.return_to not in declared:
                    out.append(
                        _finding(
                            "C001", "node", subject, f"arc #{a.decl_index} returns to undeclared node '{a.target.return_to}'", a.span
                        )
                    )
                if a.target.diagram not in diagram_names:
                    out.append(
                        _finding("C006", "node", subject, f"arc #{a.decl_index} calls undefined diagram '{a.target.diagram}'", a.span)
                    )
                else:
                    callee = model.diagram(a.target.diagram)
                    assert callee is not None
                    if not (callee.exits & callee.node_names()):
                        exitless_callers.setdefault(callee.name, []).append(d.name)
            if a.action is not None and a.action not in action_names:
                out.append(
                    _finding("C007", "node", subject, f"arc #{a.decl_index} runs undefined action '{a.action}'", a.span)
                )

        reachable = reachable_nodes(d)
        if d.entry is not None and d.entry in declared:
            for n in d.nodes:
                if n.name not in reachable:
                    out.append(
                        _finding("C002", "node", f"{d.name}.{n.name}", "unreachable from entry", n.span)
                    )

        groups: dict[tuple, list] = {}
        for a in d.arcs:
            pat = ("otherwise",) if isinstance(a.pattern, Otherwise) else ("literal", a.pattern)
            grd = None if a.guard is None else (a.guard.var, a.guard.op, a.guard.value)
            groups.setdefault((a.from_node, pat, grd), []).append(a)
        for (frm, pat, _grd), arcs in groups.items():
            if len(arcs) < 2:
                continue
            arcs = sorted(arcs, key=lambda a: a.decl_index)
            for i in range(len(arcs)):
                for j in range(i + 1, len(arcs)):
                    out.append(
                        _finding(
                            "C004",
                            "node",
                            f"{d.name}.{frm}",
                            f"arcs #{arcs[i].decl_index} and #{arcs[j].decl_index} both fire on "
                            f"{_pattern_text(arcs[i].pattern)} with the same guard",
                            arcs[j].span,
                        )
                    )

        has_out = {a.from_node for a in d.arcs}
        for n in d.nodes:
            if n.name not in d.exits and n.name not in has_out:
                out.append(
                    _finding("C009", "node", f"{d.name}.{n.name}", "non-exit node has no outgoing arcs", n.span)
                )

    for callee, callers in exitless_callers.items():
        out.append(
            _finding(
                "C005",
                "diagram",
                callee,
                f"called from {', '.join(sorted(set(callers)))} but has no exit node",
            )
        )

    reads = _read_variables(model)
    writes = {asg.var for act in model.actions for asg in act.assignments}
    for var in sorted(reads):
        if var not in writes:
            out.append(
                _finding("C008", "variable", var, f"read ({reads[var]}) but never assigned by any action")
            )

    return _sorted(out)


def _read_variables(model: DesignModel) -> dict[str, str]:
    """Variables read by guards or outputs, mapped to one describing site."""
    reads: dict[str, str] = {}
    for d in model.diagrams:
        for n in d.nodes:
            for var in placeholders(n.output):
                reads.setdefault(var, f"in output of node {d.name}.{n.name}")
        for a in d.arcs:
            if a.guard is not None:
                reads.setdefault(a.guard.var, f"in guard of arc #{a.decl_index} of diagram {d.name}")
    return reads


def check_er(model: DesignModel) -> list[Finding]:
    """Entity-relationship checks C101-C103."""
    out: list[Finding] = []
    for s in model.schemas:
        seen: set[str] = set()
        for e in s.entities:
            if e.name in seen:
                out.append(
                    _finding("C101", "entity", f"{s.name}.{e.name}", "duplicate entity name", e.span)
                )
            seen.add(e.name)
        for r in s.relations:
            for side, end in (("left", r.left), ("right", r.right)):
                if end.entity not in seen:
                    out.append(
                        _finding(
                            "C102", "relation", f"{s.name}.{r.name}", f"{side} side references undefined entity '{end.entity}'", r.span
                        )
                    )
        for e in s.entities:
            if not e.key_attrs():
                out.append(
                    _finding("C103", "entity", f"{s.name}.{e.name}", "entity has no key attribute", e.span)
                )
    return _sorted(out)


def chart_edges(chart: ScChart) -> dict[str, list[str]]:
    """Invocation edges between declared modules, in declaration order."""
    declared = {m.name for m in chart.modules}
    edges: dict[str, list[str]] = {m.name: [] for m in chart.modules}
    for m in chart.modules:
        for inv in m.invocations:
            if inv.callee in declared:
                edges[m.name].append(inv.callee)
    return edges


def _reachable_modules(edges: dict[str, list[str]], start: str) -> set[str]:
    seen = {start}
    stack = [start]
    while stack:
        cur = stack.pop()
        for nxt in edges.get(cur, ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def check_sc(model: DesignModel) -> list[Finding]:
    """Structure-chart checks C201-C204."""
    out: list[Finding] = []
    for c in model.charts:
        declared = {m.name for m in c.modules}
        for m in c.modules:
            for inv in m.invocations:
                if inv.callee not in declared:
                    out.append(
                        _finding(
                            "C201", "module", f"{c.name}.{m.name}", f"invokes undefined module '{inv.callee}'", m.span
                        )
                    )
        edges = chart_edges(c)
        for m in c.modules:
            onward = set()
            for nxt in edges[m.name]:
                onward |= _reachable_modules(edges, nxt)
            if m.name in onward:
                out.append(
                    _finding("C202", "module", f"{c.name}.{m.name}", "participates in an invocation cycle", m.span)
                )
        root = c.root()
        if root is None:
            out.append(_finding("C204", "chart", c.name, "chart has no root module", c.span))
        else:
            reachable = _reachable_modules(edges, root.name)
            for m in c.modules:
                if m.name not in reachable:
                    out.append(
                        _finding("C203", "module", f"{c.name}.{m.name}", f"unreachable from root '{root.name}'", m.span)
                    )
    return _sorted(out)


def dialogue_variables(model: DesignModel) -> set[str]:
    """Every variable name appearing in dialogues: assigned, referenced, read."""
    out: set[str] = set()
    for act in model.actions:
        for asg in act.assignments:
            out.add(asg.var)
            for t in asg.terms:
                if t.kind == "variable":
                    out.add(t.value)
    for d in model.diagrams:
        for n in d.nodes:
            out.update(placeholders(n.output))
        for a in d.arcs:
            if a.guard is not None:
                out.add(a.guard.var)
    return out


def check_cross(model: DesignModel) -> list[Finding]:
    """Cross-notation checks C301-C302."""
    out: list[Finding] = []
    attr_names = {a.name for s in model.schemas for e in s.entities for a in e.attributes}
    dialog_vars = dialogue_variables(model)
    known = attr_names | dialog_vars

    for c in model.charts:
        flagged: set[str] = set()
        for m in c.modules:
            for inv in m.invocations:
                for couple in inv.couples:
                    if couple not in known and couple not in flagged:
                        flagged.add(couple)
                        out.append(
                            _finding(
                                "C301",
                                "couple",
                                f"{c.name}.{couple}",
                                f"passed by module '{m.name}' but matches no entity attribute and no dialogue variable",
                                m.span,
                            )
                        )

    reads = set(_read_variables(model))
    writers: dict[str, list[str]] = {}
    for act in model.actions:
        for asg in act.assignments:
            if asg.var not in reads:
                writers.setdefault(asg.var, []).append(act.name)
    for var, actions in writers.items():
        out.append(
            _finding(
                "C302", "variable", var, f"assigned in {', '.join(sorted(set(actions)))} but never read by any output or guard"
            )
        )
    return _sorted(out)


def check_all(model: DesignModel) -> list[Finding]:
    """Every check over every notation, in one sorted list."""
    return _sorted(check_std(model) + check_er(model) + check_sc(model) + check_cross(model))


def has_errors(findings: list[Finding]) -> bool:
    return any(f.severity is Severity.ERROR for f in findings)
