from __future__ import annotations

import json

import pytest

from pictoforge.checker import check_all
from pictoforge.cli import cli_main
from pictoforge.model import model_equal
from pictoforge.parser import parse_file
from pictoforge.repository import RepoStore


def run(capsys, *argv):
    code = cli_main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_parse_prints_canonical(capsys, fixtures_dir):
    code, out, err = run(capsys, "parse", str(fixtures_dir / "login.use"))
    assert code == 0
    assert out.startswith("diagram login {")
    assert err == ""


def test_parse_errors_exit_one(capsys, tmp_path):
    bad = tmp_path / "bad.use"
    bad.write_text('diagram d { node a output "x\\q"; }')
    code, out, err = run(capsys, "parse", str(bad))
    assert code == 1
    assert "LEX003" in err


def test_parse_missing_file_exit_three(capsys):
    code, _, err = run(capsys, "parse", "/nonexistent/f.use")
    assert code == 3 and "cannot read" in err


def test_check_clean_fixture_silent(capsys, fixtures_dir):
    code, out, err = run(capsys, "check", str(fixtures_dir / "login.use"))
    assert code == 0
    assert out == ""


def test_check_broken_fixture(capsys, fixtures_dir):
    code, out, _ = run(capsys, "check", str(fixtures_dir / "broken.use"))
    assert code == 1
    lines = out.splitlines()
    assert any(line.startswith("C001 ERROR node:broken.start - ") for line in lines)


def test_check_warning_only_exit_zero(capsys, fixtures_dir):
    code, out, _ = run(capsys, "check", str(fixtures_dir / "workshop.use"))
    assert code == 0
    assert all(" WARNING " in line for line in out.splitlines())


def test_usage_error_exit_two(capsys):
    assert run(capsys, "definitely-not-a-command")[0] == 2
    assert run(capsys, "gen", "sql", "/tmp/x.use")[0] != 0  # missing schema name handled later


def test_gen_writes_named_files(capsys, fixtures_dir, tmp_path):
    out_dir = tmp_path / "artifacts"
    for generator, name, filename in (
        ("dict", None, "workshop_dict.dict.txt"),
        ("sql", "inventory", "workshop_sql.sql"),
        ("skeleton", "ops", "workshop_skeleton.skel.c"),
        ("doc", None, "workshop_doc.md"),
    ):
        argv = ["gen", generator, str(fixtures_dir / "workshop.use")]
        if name:
            argv.append(name)
        argv += ["--out", str(out_dir)]
        code, out, err = run(capsys, *argv)
        assert code == 0, err
        assert out.strip().endswith(filename)
        assert (out_dir / filename).is_file()
    assert (out_dir / "workshop_sql.sql").read_text().startswith("CREATE TABLE person ")


def test_gen_sql_needs_name(capsys, fixtures_dir):
    code, _, err = run(capsys, "gen", "sql", str(fixtures_dir / "workshop.use"))
    assert code == 2 and "schema name" in err


def test_run_script_matches_golden(capsys, fixtures_dir):
    for name, diagram in (("login", "login"), ("gate", "gate"), ("kiosk", "kiosk")):
        code, out, _ = run(
            capsys,
            "run",
            str(fixtures_dir / f"{name}.use"),
            diagram,
            "--script",
            str(fixtures_dir / f"{name}.script"),
        )
        want = (fixtures_dir / "golden" / f"{name}.transcript").read_text(encoding="utf-8")
        assert code == 0
        assert out == want


def test_run_script_limit_and_unconsumed(capsys, fixtures_dir):
    code, out, err = run(
        capsys,
        "run",
        str(fixtures_dir / "loop.use"),
        "forever",
        "--script",
        str(fixtures_dir / "loop.script"),
        "--max-steps",
        "5",
    )
    want = (fixtures_dir / "golden" / "loop.transcript").read_text(encoding="utf-8")
    assert code == 0
    assert out == want
    assert err.count("unconsumed input:") == 2


def test_repo_workflow(capsys, fixtures_dir, tmp_path):
    root = str(tmp_path / "store")
    assert run(capsys, "repo", "init", root)[0] == 0
    repo = ["--repo", root, "repo"]
    assert run(capsys, *repo, "lock", "--holder", "ada")[0] == 0
    code, out, _ = run(capsys, *repo, "commit", str(fixtures_dir / "login.use"), "--author", "ada", "-m", "first")
    assert code == 0 and "revision 1" in out
    assert run(capsys, *repo, "unlock", "--holder", "ada")[0] == 0

    code, out, _ = run(capsys, *repo, "log")
    assert code == 0 and out.startswith("r1 ada ")

    out_file = tmp_path / "checked_out.use"
    code, _, _ = run(capsys, *repo, "checkout", "1", "-o", str(out_file))
    assert code == 0
    assert model_equal(parse_file(out_file), parse_file(fixtures_dir / "login.use"))

    doc_file = tmp_path / "r1.json"
    assert run(capsys, *repo, "export", "1", "-o", str(doc_file))[0] == 0
    json.loads(doc_file.read_text())

    root2 = str(tmp_path / "store2")
    assert run(capsys, "repo", "init", root2)[0] == 0
    assert run(capsys, "--repo", root2, "repo", "lock", "--holder", "bob")[0] == 0
    code, out, _ = run(capsys, "--repo", root2, "repo", "import", str(doc_file), "--author", "bob")
    assert code == 0 and "revision 1" in out


def test_repo_commit_without_lock_exit_three(capsys, fixtures_dir, tmp_path):
    root = str(tmp_path / "store")
    run(capsys, "repo", "init", root)
    code, _, err = run(
        capsys, "--repo", root, "repo", "commit", str(fixtures_dir / "login.use"), "--author", "x"
    )
    assert code == 3 and "NOT_LOCKED" in err


def test_repo_env_var(capsys, fixtures_dir, tmp_path, monkeypatch):
    root = tmp_path / "envstore"
    monkeypatch.setenv("PICTOFORGE_REPO", str(root))
    assert run(capsys, "repo", "init")[0] == 0
    assert (root / "schema.txt").is_file()


def test_events_emitted_by_commands(capsys, fixtures_dir, tmp_path):
    root = str(tmp_path / "store")
    run(capsys, "repo", "init", root)
    run(capsys, "--repo", root, "check", str(fixtures_dir / "workshop.use"))
    run(
        capsys, "--repo", root, "gen", "doc", str(fixtures_dir / "workshop.use"),
        "--out", str(tmp_path / "gen"),
    )
    run(
        capsys, "--repo", root, "run", str(fixtures_dir / "kiosk.use"), "kiosk",
        "--script", str(fixtures_dir / "kiosk.script"),
    )
    events = RepoStore(root).event_log.read()
    kinds = [e.kind for e in events]
    assert kinds == ["CHECK_COMPLETED", "ARTIFACT_GENERATED", "SESSION_ENDED"]
    findings = check_all(parse_file(fixtures_dir / "workshop.use"))
    assert events[0].payload == {"errors": "0", "warnings": str(len(findings))}
    assert events[2].payload["status"] == "DEAD_END"


def test_events_tail_cli(capsys, fixtures_dir, tmp_path):
    root = str(tmp_path / "store")
    run(capsys, "repo", "init", root)
    run(capsys, "--repo", root, "check", str(fixtures_dir / "login.use"))
    run(capsys, "--repo", root, "check", str(fixtures_dir / "gate.use"))
    code, out, _ = run(capsys, "--repo", root, "events", "tail", "--no-follow")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 2
    assert lines[0].startswith("1|CHECK_COMPLETED|login.use|")
    code, out, _ = run(capsys, "--repo", root, "events", "tail", "--from", "2", "--no-follow")
    assert len(out.splitlines()) == 1
