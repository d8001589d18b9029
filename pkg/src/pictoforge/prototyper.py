"""Interactive execution of hierarchical dialogue diagrams.

A session walks one diagram at a time: the current node's output (with
`${var}` interpolation) goes to the transcript, then an input line selects an
arc. Arcs are tried in declaration order; the first whose pattern matches
(literal compares exactly after stripping one trailing line terminator,
`otherwise` matches anything) and whose guard holds wins. Unbound variables
read as empty text. A matched arc first runs its action (assignments see the
current input as `$input` and earlier assignments in the same action), then
moves. Call targets suspend the current diagram on a frame stack and enter the
callee's entry node; reaching an exit node pops back to the recorded return
node, or finishes the session at the root.

Termination is always observable: exit at the root is FINISHED, a non-exit
node without outgoing arcs is DEAD_END, and step/depth budgets trip
LIMIT_EXCEEDED (steps count arc traversals; an input that matches nothing
costs no step and leaves the session where it was, recording the input with a
NOMATCH marker).
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field

from .checker import Severity, check_std
from .errors import SessionError
from .model import CallTarget, DesignModel, PLACEHOLDER_RE, PlainTarget, StdArc, StdDiagram

OUTPUT = "OUTPUT"
INPUT = "INPUT"
ACTION = "ACTION"
CALL = "CALL"
RETURN = "RETURN"
END = "END"

RUNNING = "RUNNING"
FINISHED = "FINISHED"
DEAD_END = "DEAD_END"
LIMIT_EXCEEDED = "LIMIT_EXCEEDED"

DEFAULT_MAX_STEPS = 10_000
DEFAULT_MAX_DEPTH = 64


@dataclass(frozen=True)
class TranscriptEvent:
    kind: str  # OUTPUT INPUT ACTION CALL RETURN END
    text: str
    node: str
    step: int
    detail: str = ""  # NOMATCH marker on unmatched inputs


@dataclass
class Limits:
    max_steps: int = DEFAULT_MAX_STEPS
    max_depth: int = DEFAULT_MAX_DEPTH


@dataclass
class Session:
    """Live prototype state; advance with session_input, one caller at a time."""

    model: DesignModel
    frame_stack: list[tuple[str, str]]  # suspended (caller diagram, resume node)
    current_diagram: str
    current: str
    bindings: dict[str, str] = field(default_factory=dict)
    transcript: list[TranscriptEvent] = field(default_factory=list)
    status: str = RUNNING
    step_count: int = 0
    limits: Limits = field(default_factory=Limits)
    session_id: str = field(default_factory=lambda: uuid.uuid4().hex)

    def _diagram(self) -> StdDiagram:
        d = self.model.diagram(self.current_diagram)
        if d is None:
            raise SessionError("UNDEFINED_DIAGRAM", f"no diagram named '{self.current_diagram}'")
        return d

    def _emit(self, kind: str, text: str, detail: str = "") -> None:
        self.transcript.append(TranscriptEvent(kind, text, self.current, self.step_count, detail))


def interpolate(template: str, bindings: dict[str, str]) -> str:
    """Replace `${var}` markers; unbound variables read as empty text."""
    return PLACEHOLDER_RE.sub(lambda m: bindings.get(m.group(1), ""), template)


def session_start(
    model: DesignModel, root_diagram: str, limits: Limits | None = None
) -> Session:
    """Open a session at the root diagram's entry node.

    The model must be free of dialogue errors (check_std) so execution can
    never hit a dangling reference.
    """
    errors = [f for f in check_std(model) if f.severity is Severity.ERROR]
    if errors:
        raise SessionError(
            "MODEL_HAS_ERRORS", f"{len(errors)} dialogue error(s), first: {errors[0].line()}"
        )
    root = model.diagram(root_diagram)
    if root is None:
        raise SessionError("NO_SUCH_DIAGRAM", f"no diagram named '{root_diagram}'")
    assert root.entry is not None  # guaranteed by C003
    session = Session(
        model=model,
        frame_stack=[],
        current_diagram=root.name,
        current=root.entry,
        limits=limits or Limits(),
    )
    _enter_node(session)
    return session


def _node_output(session: Session) -> str:
    d = session._diagram()
    for n in d.nodes:
        if n.name == session.current:
            return interpolate(n.output, session.bindings)
    raise SessionError("UNDEFINED_TARGET", f"no node '{session.current}' in diagram '{d.name}'")


def _enter_node(session: Session) -> None:
    """Emit the entered node's output, then unwind exits / detect dead ends."""
    session._emit(OUTPUT, _node_output(session))
    while True:
        d = session._diagram()
        if session.current in d.exits:
            if session.frame_stack:
                caller, resume = session.frame_stack.pop()
                session._emit(RETURN, d.name)
                session.current_diagram = caller
                session.current = resume
                session._emit(OUTPUT, _node_output(session))
                continue
            session.status = FINISHED
            session._emit(END, FINISHED)
            return
        if not d.arcs_from(session.current):
            session.status = DEAD_END
            session._emit(END, DEAD_END)
        return


def _trim_line(line: str) -> str:
    if line.endswith("\r\n"):
        return line[:-2]
    if line.endswith("\n"):
        return line[:-1]
    return line


def _guard_holds(arc: StdArc, bindings: dict[str, str]) -> bool:
    g = arc.guard
    if g is None:
        return True
    actual = bindings.get(g.var, "")
    return (actual == g.value) if g.op.value == "==" else (actual != g.value)


def _select_arc(session: Session, line: str) -> StdArc | None:
    for arc in session._diagram().arcs_from(session.current):
        matches = True if not isinstance(arc.pattern, str) else arc.pattern == line
        if matches and _guard_holds(arc, session.bindings):
            return arc
    return None


def _run_action(session: Session, name: str, input_line: str) -> None:
    action = session.model.action(name)
    if action is None:
        raise SessionError("UNDEFINED_ACTION", f"no action named '{name}'")
    for asg in action.assignments:
        parts: list[str] = []
        for t in asg.terms:
            if t.kind == "literal":
                parts.append(t.value)
            elif t.kind == "variable":
                parts.append(session.bindings.get(t.value, ""))
            else:
                parts.append(input_line)
        session.bindings[asg.var] = "".join(parts)
    session._emit(ACTION, name)


def session_input(session: Session, line: str) -> Session:
    """Feed one input line; the session is advanced in place and returned."""
    if session.status != RUNNING:
        raise SessionError("SESSION_NOT_RUNNING", f"session status is {session.status}")
    line = _trim_line(line)
    arc = _select_arc(session, line)
    if arc is None:
        session._emit(INPUT, line, detail="NOMATCH")
        return session
    session._emit(INPUT, line)
    session.step_count += 1
    if arc.action is not None:
        _run_action(session, arc.action, line)
    if isinstance(arc.target, PlainTarget):
        session.current = arc.target.node
        _enter_node(session)
    else:
        if len(session.frame_stack) >= session.limits.max_depth:
            session.status = LIMIT_EXCEEDED
            session._emit(END, LIMIT_EXCEEDED, detail="max_depth")
            return session
        target: CallTarget = arc.target
        session.frame_stack.append((session.current_diagram, target.return_to))
        callee = session.model.diagram(target.diagram)
        if callee is None:
            raise SessionError("UNDEFINED_DIAGRAM", f"no diagram named '{target.diagram}'")
        assert callee.entry is not None
        session._emit(CALL, callee.name)
        session.current_diagram = callee.name
        session.current = callee.entry
        _enter_node(session)
    if session.status == RUNNING and session.step_count >= session.limits.max_steps:
        session.status = LIMIT_EXCEEDED
        session._emit(END, LIMIT_EXCEEDED, detail="max_steps")
    return session


@dataclass
class ScriptResult:
    session: Session
    unconsumed: list[str]

    @property
    def transcript(self) -> list[TranscriptEvent]:
        return self.session.transcript

    @property
    def status(self) -> str:
        return self.session.status


def session_run_script(
    model: DesignModel,
    root_diagram: str,
    inputs: list[str],
    limits: Limits | None = None,
) -> ScriptResult:
    """Headless run: feed inputs until exhausted or the session stops."""
    session = session_start(model, root_diagram, limits)
    remaining = list(inputs)
    while remaining and session.status == RUNNING:
        session_input(session, remaining.pop(0))
    return ScriptResult(session=session, unconsumed=remaining)


def _escape_line(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\n", "\\n").replace("\r", "\\r")


def format_transcript(events: list[TranscriptEvent], status: str) -> str:
    """Line format for headless transcripts: O:/I: events plus one status line."""
    lines: list[str] = []
    for ev in events:
        if ev.kind == OUTPUT:
            lines.append(f"O: {_escape_line(ev.text)}")
        elif ev.kind == INPUT:
            lines.append(f"I: {_escape_line(ev.text)}")
    lines.append(f"! {status}")
    return "\n".join(lines) + "\n"
