"""Append-only event log plus command triggers, for tool-to-tool signalling.

Events live in a single text log, one per line:

    seq|kind|subject|revision|timestamp|k1=v1;k2=v2

Sequence numbers are dense and assigned under a cross-process append lock, so
any number of emitters stay consistent; tailers just read the file and may
follow it for new appends. Subjects, payload keys, and payload values are
percent-encoded where they would collide with the separators, so the format
round-trips arbitrary text.

Trigger rules map an event kind to an external command template; `{subject}`
and `{revision}` substitute into the command's arguments and the payload is
piped to the command as `key=value` lines (keys sorted). Rules load from a
`triggers.conf` beside the log: one `KIND command...` per line, `#` comments.
"""

from __future__ import annotations

import os
import shlex
import subprocess
import time
import urllib.parse
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from filelock import FileLock

from .errors import BusError

DIAGRAM_COMMITTED = "DIAGRAM_COMMITTED"
CHECK_COMPLETED = "CHECK_COMPLETED"
ARTIFACT_GENERATED = "ARTIFACT_GENERATED"
SESSION_ENDED = "SESSION_ENDED"

EVENT_KINDS = (DIAGRAM_COMMITTED, CHECK_COMPLETED, ARTIFACT_GENERATED, SESSION_ENDED)

_RESERVED = "%|;=\\\n\r"


def _enc(value: str) -> str:
    return urllib.parse.quote(value, safe="".join(c for c in map(chr, range(32, 127)) if c not in _RESERVED))


def _dec(value: str) -> str:
    return urllib.parse.unquote(value)


@dataclass(frozen=True)
class Event:
    seq: int
    kind: str
    subject: str
    revision: int | None
    timestamp: int  # UTC seconds
    payload: dict[str, str] = field(default_factory=dict)

    def line(self) -> str:
        payload = ";".join(f"{_enc(k)}={_enc(v)}" for k, v in sorted(self.payload.items()))
        rev = "" if self.revision is None else str(self.revision)
        return f"{self.seq}|{self.kind}|{_enc(self.subject)}|{rev}|{self.timestamp}|{payload}"


def parse_event(line: str) -> Event:
    parts = line.split("|")
    if len(parts) != 6:
        raise BusError("LOG_IO", f"malformed event line: {line!r}")
    seq, kind, subject, rev, ts, payload_text = parts
    payload: dict[str, str] = {}
    if payload_text:
        for item in payload_text.split(";"):
            key, _, value = item.partition("=")
            payload[_dec(key)] = _dec(value)
    return Event(
        seq=int(seq),
        kind=kind,
        subject=_dec(subject),
        revision=int(rev) if rev else None,
        timestamp=int(ts),
        payload=payload,
    )


class EventLog:
    """One append-only log file; safe for concurrent emitters and tailers."""

    def __init__(self, path: str | os.PathLike):
        self.path = Path(path)
        self._lock = FileLock(str(self.path) + ".lock")

    def _read_lines(self) -> list[str]:
        try:
            return self.path.read_text(encoding="utf-8").splitlines()
        except FileNotFoundError:
            return []
        except OSError as e:
            raise BusError("LOG_IO", f"cannot read event log {self.path}: {e}")

    def read(self, from_seq: int = 1) -> list[Event]:
        return [ev for ev in map(parse_event, self._read_lines()) if ev.seq >= from_seq]

    def last_seq(self) -> int:
        lines = self._read_lines()
        if not lines:
            return 0
        return parse_event(lines[-1]).seq

    def emit(
        self,
        kind: str,
        subject: str,
        revision: int | None = None,
        payload: dict[str, str] | None = None,
        timestamp: int | None = None,
    ) -> Event:
        """Append one event; the sequence number is assigned under the lock."""
        if kind not in EVENT_KINDS:
            raise BusError("LOG_IO", f"unknown event kind '{kind}'")
        try:
            with self._lock:
                event = Event(
                    seq=self.last_seq() + 1,
                    kind=kind,
                    subject=subject,
                    revision=revision,
                    timestamp=int(time.time()) if timestamp is None else timestamp,
                    payload=dict(payload or {}),
                )
                with self.path.open("a", encoding="utf-8") as f:
                    f.write(event.line() + "\n")
                    f.flush()
                    os.fsync(f.fileno())
        except OSError as e:
            raise BusError("LOG_IO", f"cannot append to event log {self.path}: {e}")
        return event

    def tail(
        self, from_seq: int = 1, follow: bool = False, poll_interval: float = 0.05
    ) -> Iterator[Event]:
        """Yield events with seq >= from_seq in order; optionally follow appends."""
        next_seq = max(1, from_seq)
        while True:
            for ev in self.read(next_seq):
                next_seq = ev.seq + 1
                yield ev
            if not follow:
                return
            time.sleep(poll_interval)


# --- triggers ------------------------------------------------------------------


@dataclass(frozen=True)
class TriggerRule:
    kind: str
    command: str  # template; {subject} and {revision} substitute per event

    def __post_init__(self):
        if not self.command.strip():
            raise BusError("LOG_IO", "trigger command template is empty")


@dataclass(frozen=True)
class SpawnReport:
    rule: TriggerRule
    status: str  # "exit:<code>" or "SPAWN_FAIL"
    detail: str = ""


def load_rules(path: str | os.PathLike) -> list[TriggerRule]:
    """Read trigger rules: one `KIND command template` per line."""
    rules: list[TriggerRule] = []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        return rules
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        kind, _, command = line.partition(" ")
        if kind not in EVENT_KINDS:
            raise BusError("LOG_IO", f"unknown event kind in trigger rule: {kind!r}")
        rules.append(TriggerRule(kind, command.strip()))
    return rules


def payload_stdin(event: Event) -> bytes:
    """Payload as the `key=value` lines a triggered command receives."""
    return "".join(f"{k}={v}\n" for k, v in sorted(event.payload.items())).encode("utf-8")


def dispatch(rules: list[TriggerRule], event: Event, timeout: float = 30.0) -> list[SpawnReport]:
    """Run every rule matching the event's kind exactly once; never abort early."""
    reports: list[SpawnReport] = []
    for rule in rules:
        if rule.kind != event.kind:
            continue
        argv = [
            tok.replace("{subject}", event.subject).replace(
                "{revision}", "" if event.revision is None else str(event.revision)
            )
            for tok in shlex.split(rule.command)
        ]
        try:
            proc = subprocess.run(
                argv,
                input=payload_stdin(event),
                stdout=subprocess.DEVNULL,
                stderr=subprocess.DEVNULL,
                timeout=timeout,
            )
            reports.append(SpawnReport(rule, f"exit:{proc.returncode}"))
        except (OSError, subprocess.SubprocessError) as e:
            reports.append(SpawnReport(rule, "SPAWN_FAIL", str(e)))
    return reports


class Dispatcher:
    """Tail a log and run triggers, at most once per (event, rule) pair."""

    def __init__(self, log: EventLog, rules: list[TriggerRule]):
        self.log = log
        self.rules = rules
        self._seen: set[int] = set()

    def run(self, from_seq: int = 1, follow: bool = False) -> list[SpawnReport]:
        reports: list[SpawnReport] = []
        for event in self.log.tail(from_seq, follow=follow):
            if event.seq in self._seen:
                continue
            self._seen.add(event.seq)
            reports.extend(dispatch(self.rules, event))
        return reports
