"""Command-line workbench binding all the tools together.

Subcommands: parse, check, gen, run, repo, events, serve. Exit codes:
0 success, 1 the input has errors (parse errors or ERROR findings),
2 usage error, 3 I/O or store error. The store root comes from --repo or the
PICTOFORGE_REPO environment variable; commands that have a store configured
announce themselves on its event log.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import bus
from .checker import Severity, check_all
from .errors import GenError, PictoforgeError, RepoError, SessionError
from .generators import format_dictionary, gen_dictionary, gen_doc, gen_skeleton, gen_sql
from .model import DesignModel
from .parser import ParseFailure, parse_file
from .printer import pretty_print
from .prototyper import (
    END,
    Limits,
    OUTPUT,
    RUNNING,
    format_transcript,
    session_input,
    session_run_script,
    session_start,
)
from .repository import RepoStore

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_IO = 3


class _Fail(Exception):
    def __init__(self, exit_code: int, message: str):
        super().__init__(message)
        self.exit_code = exit_code


def _repo_root(args) -> Path | None:
    if getattr(args, "repo", None):
        return Path(args.repo)
    env = os.environ.get("PICTOFORGE_REPO")
    return Path(env) if env else None


def _store(args) -> RepoStore:
    root = _repo_root(args)
    if root is None:
        raise _Fail(EXIT_USAGE, "no store configured; pass --repo or set PICTOFORGE_REPO")
    return RepoStore(root)


def _event_log(args) -> bus.EventLog | None:
    root = _repo_root(args)
    if root is None:
        return None
    store = RepoStore(root)
    return store.event_log if store.exists() else None


def _load(path: str) -> DesignModel:
    try:
        return parse_file(path)
    except FileNotFoundError:
        raise _Fail(EXIT_IO, f"cannot read {path}")
    except ParseFailure as e:
        for err in e.errors:
            print(err, file=sys.stderr)
        raise _Fail(EXIT_FINDINGS, f"{len(e.errors)} parse error(s) in {path}")


def _cmd_parse(args) -> int:
    model = _load(args.file)
    sys.stdout.write(pretty_print(model))
    return EXIT_OK


def _cmd_check(args) -> int:
    model = _load(args.file)
    findings = check_all(model)
    for f in findings:
        print(f.line())
    errors = sum(1 for f in findings if f.severity is Severity.ERROR)
    log = _event_log(args)
    if log is not None:
        log.emit(
            bus.CHECK_COMPLETED,
            subject=model.source_name,
            payload={"errors": str(errors), "warnings": str(len(findings) - errors)},
        )
    return EXIT_FINDINGS if errors else EXIT_OK


_GEN_EXT = {"dict": ".dict.txt", "sql": ".sql", "skeleton": ".skel.c", "doc": ".md"}


def _cmd_gen(args) -> int:
    model = _load(args.file)
    stem = Path(args.file).stem
    if args.generator == "dict":
        text = format_dictionary(gen_dictionary(model))
    elif args.generator == "doc":
        text = gen_doc(model)
    elif args.generator == "sql":
        if not args.name:
            raise _Fail(EXIT_USAGE, "gen sql needs the data schema name")
        text = gen_sql(model, args.name)
    else:  # skeleton
        if not args.name:
            raise _Fail(EXIT_USAGE, "gen skeleton needs a chart or diagram name")
        kind = args.kind
        if kind is None:
            is_chart = model.chart(args.name) is not None
            is_diagram = model.diagram(args.name) is not None
            if is_chart and is_diagram:
                raise _Fail(EXIT_USAGE, f"'{args.name}' is both a chart and a diagram; pass --kind")
            kind = "chart" if is_chart else "diagram"
        text = gen_skeleton(model, kind, args.name)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / f"{stem}_{args.generator}{_GEN_EXT[args.generator]}"
    out_path.write_text(text, encoding="utf-8")
    print(out_path)
    log = _event_log(args)
    if log is not None:
        log.emit(
            bus.ARTIFACT_GENERATED,
            subject=model.source_name,
            payload={"generator": args.generator, "path": str(out_path)},
        )
    return EXIT_OK


def _cmd_run(args) -> int:
    model = _load(args.file)
    limits = Limits()
    if args.max_steps is not None:
        limits.max_steps = args.max_steps
    if args.max_depth is not None:
        limits.max_depth = args.max_depth
    if args.script:
        try:
            script = Path(args.script).read_text(encoding="utf-8").splitlines()
        except OSError:
            raise _Fail(EXIT_IO, f"cannot read script {args.script}")
        result = session_run_script(model, args.diagram, script, limits)
        sys.stdout.write(format_transcript(result.transcript, result.status))
        for line in result.unconsumed:
            print(f"unconsumed input: {line}", file=sys.stderr)
        final = result.status
    else:
        session = session_start(model, args.diagram, limits)
        for ev in session.transcript:
            if ev.kind == OUTPUT:
                print(ev.text)
        while session.status == RUNNING:
            try:
                line = input("> ")
            except EOFError:
                print()
                break
            before = len(session.transcript)
            session_input(session, line)
            for ev in session.transcript[before:]:
                if ev.kind == OUTPUT:
                    print(ev.text)
                elif ev.kind == END:
                    print(f"[{ev.text}]")
        final = session.status
    log = _event_log(args)
    if log is not None:
        log.emit(bus.SESSION_ENDED, subject=args.diagram, payload={"status": final})
    return EXIT_OK


def _cmd_repo(args) -> int:
    if args.repo_cmd == "init":
        root = Path(args.path) if args.path else _repo_root(args)
        if root is None:
            raise _Fail(EXIT_USAGE, "repo init needs a path (argument, --repo, or PICTOFORGE_REPO)")
        store = RepoStore.init(root)
        print(f"initialized empty store at {store.root}")
        return EXIT_OK
    store = _store(args)
    if args.repo_cmd == "commit":
        model = _load(args.file)
        rev = store.commit(model, args.author, args.message)
        print(f"committed revision {rev.number} ({rev.model_digest[:12]})")
        return EXIT_OK
    if args.repo_cmd == "checkout":
        model = store.checkout(args.revision)
        text = pretty_print(model)
        if args.output:
            Path(args.output).write_text(text, encoding="utf-8")
            print(args.output)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    if args.repo_cmd == "lock":
        lock = store.lock(args.holder)
        print(f"locked by {lock.holder}")
        return EXIT_OK
    if args.repo_cmd == "unlock":
        store.unlock(args.holder)
        print("unlocked")
        return EXIT_OK
    if args.repo_cmd == "log":
        for rev in store.revisions():
            print(f"r{rev.number} {rev.author} {rev.timestamp} {rev.model_digest[:12]} {rev.message}")
        return EXIT_OK
    if args.repo_cmd == "export":
        doc = store.export(args.revision)
        if args.output:
            Path(args.output).write_text(doc, encoding="utf-8")
            print(args.output)
        else:
            sys.stdout.write(doc)
        return EXIT_OK
    if args.repo_cmd == "import":
        try:
            doc = Path(args.file).read_text(encoding="utf-8")
        except OSError:
            raise _Fail(EXIT_IO, f"cannot read {args.file}")
        rev = store.import_doc(doc, args.author)
        print(f"imported as revision {rev.number}")
        return EXIT_OK
    raise _Fail(EXIT_USAGE, f"unknown repo command {args.repo_cmd!r}")


def _cmd_events(args) -> int:
    store = _store(args)
    log = store.event_log
    try:
        for event in log.tail(args.from_seq, follow=args.follow):
            print(event.line(), flush=True)
    except KeyboardInterrupt:
        pass
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .service import WorkbenchConfig, serve

    root = _repo_root(args)
    if root is None:
        raise _Fail(EXIT_USAGE, "serve needs a store; pass --repo or set PICTOFORGE_REPO")
    ui_dir = Path(args.ui) if args.ui else None
    config = WorkbenchConfig(repo_root=root, listen_port=args.port, ui_dir=ui_dir)
    serve(config)
    return EXIT_OK


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pictoforge", description=__doc__)
    ap.add_argument("--repo", help="record store root (default: $PICTOFORGE_REPO)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse a .use file and print its canonical form")
    p.add_argument("file")
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("check", help="run all consistency checks")
    p.add_argument("file")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("gen", help="generate an artifact from a model")
    p.add_argument("generator", choices=("dict", "sql", "skeleton", "doc"))
    p.add_argument("file")
    p.add_argument("name", nargs="?", help="schema name (sql) or chart/diagram name (skeleton)")
    p.add_argument("--kind", choices=("chart", "diagram"), help="disambiguate skeleton targets")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("run", help="run a dialogue diagram interactively or from a script")
    p.add_argument("file")
    p.add_argument("diagram")
    p.add_argument("--script", help="file with one input line per line; prints the transcript")
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--max-depth", type=int, default=None)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("repo", help="record store operations")
    rsub = p.add_subparsers(dest="repo_cmd", required=True)
    rp = rsub.add_parser("init")
    rp.add_argument("path", nargs="?")
    rp = rsub.add_parser("commit")
    rp.add_argument("file")
    rp.add_argument("--author", required=True)
    rp.add_argument("--message", "-m", default="")
    rp = rsub.add_parser("checkout")
    rp.add_argument("revision", type=int)
    rp.add_argument("--output", "-o")
    rp = rsub.add_parser("lock")
    rp.add_argument("--holder", required=True)
    rp = rsub.add_parser("unlock")
    rp.add_argument("--holder", required=True)
    rsub.add_parser("log")
    rp = rsub.add_parser("export")
    rp.add_argument("revision", type=int)
    rp.add_argument("--output", "-o")
    rp = rsub.add_parser("import")
    rp.add_argument("file")
    rp.add_argument("--author", required=True)
    p.set_defaults(func=_cmd_repo)

    p = sub.add_parser("events", help="event log operations")
    esub = p.add_subparsers(dest="events_cmd", required=True)
    ep = esub.add_parser("tail")
    ep.add_argument("--from", dest="from_seq", type=int, default=1)
    ep.add_argument("--no-follow", dest="follow", action="store_false")
    p.set_defaults(func=_cmd_events)

    p = sub.add_parser("serve", help="serve the workbench HTTP API")
    p.add_argument("--port", type=int, default=7468)
    p.add_argument("--ui", help="also serve a browser UI from this directory")
    p.set_defaults(func=_cmd_serve)

    return ap


def cli_main(argv: list[str] | None = None) -> int:
    ap = build_arg_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except _Fail as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except (GenError, SessionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FINDINGS if e.code in ("MODEL_HAS_ERRORS", "SCHEMA_HAS_ERRORS", "TARGET_HAS_ERRORS") else EXIT_USAGE
    except RepoError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except PictoforgeError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
