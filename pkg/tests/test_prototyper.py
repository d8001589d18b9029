from __future__ import annotations

import random

import pytest

from helpers_random import random_checked_dialogue, random_script
from pictoforge.errors import SessionError
from pictoforge.parser import parse, parse_file
from pictoforge.prototyper import (
    CALL,
    DEAD_END,
    FINISHED,
    INPUT,
    LIMIT_EXCEEDED,
    Limits,
    OUTPUT,
    RETURN,
    RUNNING,
    format_transcript,
    interpolate,
    session_input,
    session_run_script,
    session_start,
)


def outputs(session_or_result):
    return [e.text for e in session_or_result.transcript if e.kind == OUTPUT]


def test_start_dead_end_without_arcs():
    m = parse('diagram d { entry a; node a output "hi"; }')
    s = session_start(m, "d")
    assert outputs(s) == ["hi"]
    assert s.status == DEAD_END


def test_start_finished_when_entry_is_exit():
    m = parse('diagram d { entry a; exit a; node a output "bye"; }')
    s = session_start(m, "d")
    assert outputs(s) == ["bye"]
    assert s.status == FINISHED


def test_start_rejects_errored_model(broken_model):
    with pytest.raises(SessionError) as exc:
        session_start(broken_model, "broken")
    assert exc.value.code == "MODEL_HAS_ERRORS"


def test_start_rejects_unknown_diagram():
    m = parse('diagram d { entry a; exit a; node a output ""; }')
    with pytest.raises(SessionError) as exc:
        session_start(m, "nope")
    assert exc.value.code == "NO_SUCH_DIAGRAM"


def test_login_opens_with_prompt(fixtures_dir):
    m = parse_file(fixtures_dir / "login.use")
    s = session_start(m, "login")
    assert outputs(s) == ["Welcome to TimeKeeper.\nUser name?"]
    assert s.status == RUNNING


def test_literal_match_moves():
    m = parse(
        'diagram d { entry a; exit b; node a output "A"; node b output "B";'
        ' arc a -> b on "help"; }'
    )
    s = session_start(m, "d")
    session_input(s, "help")
    assert outputs(s) == ["A", "B"] and s.status == FINISHED


def test_otherwise_matches_anything():
    m = parse(
        'diagram d { entry a; exit b; node a output "A"; node b output "B";'
        ' arc a -> b on otherwise; }'
    )
    s = session_start(m, "d")
    session_input(s, "xyz")
    assert s.status == FINISHED


def test_no_match_stays_and_records():
    m = parse(
        'diagram d { entry a; exit b; node a output "A"; node b output "B";'
        ' arc a -> b on "only this"; }'
    )
    s = session_start(m, "d")
    session_input(s, "something else")
    last = s.transcript[-1]
    assert last.kind == INPUT and last.detail == "NOMATCH"
    assert s.current == "a" and s.status == RUNNING and s.step_count == 0


def test_decl_order_breaks_ties():
    # both arcs eligible at runtime (guard holds on unbound v), statically distinct
    m = parse(
        'diagram d { entry a; exit b; exit c; node a output "A"; node b output "B";'
        ' node c output "C"; arc a -> b on otherwise when v != "set"; arc a -> c on otherwise; }'
    )
    s = session_start(m, "d")
    session_input(s, "anything")
    assert s.current == "b"


def test_input_trimmed_of_line_terminator_only():
    m = parse(
        'diagram d { entry a; exit b; node a output "A"; node b output "B";'
        ' arc a -> b on "  spaced  "; }'
    )
    s = session_start(m, "d")
    session_input(s, "  spaced  \n")
    assert s.status == FINISHED


def test_call_and_return_trace(fixtures_dir):
    m = parse_file(fixtures_dir / "login.use")
    result = session_run_script(m, "login", ["ada", "secret", "y", "quit"])
    kinds = [e.kind for e in result.transcript]
    assert CALL in kinds and RETURN in kinds
    assert result.status == FINISHED
    want = (fixtures_dir / "golden" / "login.transcript").read_text(encoding="utf-8")
    assert format_transcript(result.transcript, result.status) == want


def test_guard_needs_action_first(fixtures_dir):
    m = parse_file(fixtures_dir / "gate.use")
    blocked = session_run_script(m, "gate", ["open"])
    assert blocked.status == RUNNING and blocked.session.current == "lobby"
    opened = session_run_script(m, "gate", ["open", "sudo", "open"])
    assert opened.status == FINISHED
    want = (fixtures_dir / "golden" / "gate.transcript").read_text(encoding="utf-8")
    assert format_transcript(opened.transcript, opened.status) == want


def test_kiosk_golden(fixtures_dir):
    m = parse_file(fixtures_dir / "kiosk.use")
    result = session_run_script(m, "kiosk", ["xyz", "go"])
    assert result.status == DEAD_END
    want = (fixtures_dir / "golden" / "kiosk.transcript").read_text(encoding="utf-8")
    assert format_transcript(result.transcript, result.status) == want


def test_empty_script_keeps_opening_output(fixtures_dir):
    m = parse_file(fixtures_dir / "login.use")
    result = session_run_script(m, "login", [])
    assert len(outputs(result)) == 1 and result.status == RUNNING


def test_inputs_after_finish_unconsumed():
    m = parse('diagram d { entry a; exit b; node a output "A"; node b output "B"; arc a -> b on otherwise; }')
    result = session_run_script(m, "d", ["go", "extra1", "extra2"])
    assert result.status == FINISHED
    assert result.unconsumed == ["extra1", "extra2"]


def test_limit_exceeded_at_exactly_max_steps(fixtures_dir):
    m = parse_file(fixtures_dir / "loop.use")
    result = session_run_script(m, "forever", list("abcdefg"), Limits(max_steps=5))
    assert result.status == LIMIT_EXCEEDED
    assert result.session.step_count == 5
    assert result.unconsumed == ["f", "g"]
    want = (fixtures_dir / "golden" / "loop.transcript").read_text(encoding="utf-8")
    assert format_transcript(result.transcript, result.status) == want


def test_depth_limit():
    # self-recursive diagram: every input calls back into r
    m = parse(
        """
diagram r {
  entry a;
  exit z;
  node a output "A";
  node z output "Z";
  arc a -> call r return z on otherwise;
}
"""
    )
    result = session_run_script(m, "r", ["x"] * 10, Limits(max_depth=3))
    assert result.status == LIMIT_EXCEEDED
    assert len(result.session.frame_stack) <= 3


def test_input_rejected_when_not_running():
    m = parse('diagram d { entry a; exit a; node a output "bye"; }')
    s = session_start(m, "d")
    with pytest.raises(SessionError) as exc:
        session_input(s, "hello?")
    assert exc.value.code == "SESSION_NOT_RUNNING"


def test_action_assignments_in_order_and_input_term():
    m = parse(
        """
diagram d {
  entry a;
  exit b;
  node a output "A";
  node b output "got ${combo}";
  arc a -> b on otherwise do build;
}
action build {
  first = $input;
  combo = first + "+" + $input;
}
"""
    )
    result = session_run_script(m, "d", ["hi"])
    assert outputs(result)[-1] == "got hi+hi"


def test_interpolation_identity_without_markers():
    text = "plain $ text {x} with no markers"
    assert interpolate(text, {"x": "nope"}) == text


def test_unbound_variable_reads_empty():
    assert interpolate("<${missing}>", {}) == "<>"


def test_transcript_steps_monotonic(fixtures_dir):
    m = parse_file(fixtures_dir / "login.use")
    result = session_run_script(m, "login", ["ada", "secret", "y", "again", "y", "quit"])
    steps = [e.step for e in result.transcript]
    assert steps == sorted(steps)


def test_determinism(fixtures_dir):
    m = parse_file(fixtures_dir / "gate.use")
    a = session_run_script(m, "gate", ["open", "sudo", "open"])
    b = session_run_script(m, "gate", ["open", "sudo", "open"])
    assert a.transcript == b.transcript and a.status == b.status


def test_fuzz_checked_models_never_fault():
    for seed in range(60):
        model = random_checked_dialogue(seed)
        rng = random.Random(seed * 31 + 1)
        root = rng.choice([d.name for d in model.diagrams])
        result = session_run_script(
            model, root, random_script(rng, rng.randint(0, 25)), Limits(max_steps=500)
        )
        assert result.status in (RUNNING, FINISHED, DEAD_END, LIMIT_EXCEEDED)


def test_arc_selection_minimal_decl_index():
    # brute force: the selected arc equals min(decl_index) over eligible arcs
    for seed in range(30):
        model = random_checked_dialogue(seed + 400, max_diagrams=1)
        d = model.diagrams[0]
        s = session_start(model, d.name)
        rng = random.Random(seed)
        for line in random_script(rng, 10):
            if s.status != RUNNING:
                break
            eligible = []
            for a in d.arcs_from(s.current):
                matches = not isinstance(a.pattern, str) or a.pattern == line
                g = a.guard
                holds = g is None or (
                    (s.bindings.get(g.var, "") == g.value) == (g.op.value == "==")
                )
                if matches and holds:
                    eligible.append(a.decl_index)
            before_node = s.current
            session_input(s, line)
            took_arc = s.transcript[-1].kind != INPUT or s.transcript[-1].detail != "NOMATCH"
            if eligible:
                assert took_arc, f"seed {seed}: arc {min(eligible)} should fire"
            else:
                assert not took_arc and s.current == before_node
