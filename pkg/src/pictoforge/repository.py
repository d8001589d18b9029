"""Shared persistent store for design models.

The store is a plain directory so every byte of it stays inspectable:

    <root>/schema.txt       table and field listing (written at init)
    <root>/tables/<T>.recs  one table per file: a header line naming the
                            fields, then one record per line, tab-separated
    <root>/LOCK             advisory whole-store write lock (holder + time)
    <root>/revisions.log    one line per revision: number, author, timestamp,
                            message, digest, source name

Every commit appends the full flat decomposition of the model, each record
tagged with `revision_added`, so any past revision reconstructs exactly by
filtering; nothing is ever rewritten. Table files are replaced via
write-to-temp-then-rename so readers only ever see fully committed state.
Field values escape backslash, tab, newline, and carriage return; the digest
is the SHA-256 of the model's canonical printed text.

Fine-grained child records (entity attributes, invocation couples, action
assignment terms, plus schema/chart declarations) live in the SYMBOL table,
keyed by a dotted owner path and an ordinal.

Writers must hold the advisory lock (create-if-absent on LOCK, so acquisition
is atomic across processes); readers never block. Commits announce themselves
on the event log beside the store.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass
from pathlib import Path

from . import bus
from .errors import RepoError
from .model import (
    ActionDef,
    Assignment,
    AttrType,
    CallTarget,
    Card,
    DesignModel,
    Entity,
    EntityAttr,
    ErSchema,
    Guard,
    GuardOp,
    Invocation,
    OTHERWISE,
    PlainTarget,
    Relation,
    RelationEnd,
    ScChart,
    ScModule,
    StdArc,
    StdDiagram,
    StdNode,
    Term,
    build_index,
)
from .printer import pretty_print

TABLES: dict[str, list[tuple[str, str]]] = {
    "DIAGRAM": [
        ("revision_added", "int"),
        ("name", "str"),
        ("entry", "str"),
        ("exits", "str"),  # comma-joined node names
    ],
    "NODE": [
        ("revision_added", "int"),
        ("diagram", "str"),
        ("name", "str"),
        ("output", "str"),
    ],
    "ARC": [
        ("revision_added", "int"),
        ("diagram", "str"),
        ("decl_index", "int"),
        ("from_node", "str"),
        ("target_kind", "str"),  # PLAIN | CALL
        ("target", "str"),
        ("return_to", "str"),
        ("pattern_kind", "str"),  # LITERAL | OTHERWISE
        ("pattern", "str"),
        ("guard_var", "str"),
        ("guard_op", "str"),  # EQ | NEQ | empty
        ("guard_value", "str"),
        ("action", "str"),
    ],
    "ENTITY": [
        ("revision_added", "int"),
        ("schema", "str"),
        ("name", "str"),
    ],
    "RELATION": [
        ("revision_added", "int"),
        ("schema", "str"),
        ("name", "str"),
        ("left_entity", "str"),
        ("left_card", "str"),
        ("right_entity", "str"),
        ("right_card", "str"),
    ],
    "MODULE": [
        ("revision_added", "int"),
        ("chart", "str"),
        ("name", "str"),
        ("is_root", "int"),
    ],
    "ACTION": [
        ("revision_added", "int"),
        ("name", "str"),
    ],
    "SYMBOL": [
        ("revision_added", "int"),
        ("kind", "str"),  # SCHEMA CHART ATTRIBUTE INVOCATION COUPLE ASSIGNMENT TERM
        ("owner", "str"),  # dotted path into the owning element
        ("ordinal", "int"),
        ("name", "str"),
        ("detail", "str"),
    ],
}

_TABLE_ORDER = tuple(TABLES)


def _escape(value: str) -> str:
    return (
        value.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n").replace("\r", "\\r")
    )


def _unescape(value: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(value):
        c = value[i]
        if c == "\\" and i + 1 < len(value):
            nxt = value[i + 1]
            out.append({"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}.get(nxt, nxt))
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def schema_text() -> str:
    """Normative table listing, written verbatim to schema.txt at init."""
    lines = ["# record store schema: one table per file under tables/", ""]
    for table, fields in TABLES.items():
        lines.append(f"TABLE {table}")
        for name, ftype in fields:
            lines.append(f"  {name} {ftype}")
        lines.append("")
    return "\n".join(lines)


@dataclass(frozen=True)
class Revision:
    number: int
    author: str
    timestamp: int  # UTC seconds
    message: str
    model_digest: str
    source_name: str = ""


@dataclass(frozen=True)
class Lock:
    holder: str
    acquired_at: int


def model_digest(model: DesignModel) -> str:
    return hashlib.sha256(pretty_print(model).encode("utf-8")).hexdigest()


# --- flattening ---------------------------------------------------------------


def decompose(model: DesignModel, revision: int) -> dict[str, list[list]]:
    """Flatten a model into per-table records tagged with `revision`."""
    rev = revision
    recs: dict[str, list[list]] = {t: [] for t in TABLES}
    for d in model.diagrams:
        recs["DIAGRAM"].append([rev, d.name, d.entry or "", ",".join(sorted(d.exits))])
        for n in d.nodes:
            recs["NODE"].append([rev, d.name, n.name, n.output])
        for a in sorted(d.arcs, key=lambda a: a.decl_index):
            if isinstance(a.target, PlainTarget):
                tkind, target, ret = "PLAIN", a.target.node, ""
            else:
                tkind, target, ret = "CALL", a.target.diagram, a.target.return_to
            pkind, pat = ("OTHERWISE", "") if not isinstance(a.pattern, str) else ("LITERAL", a.pattern)
            gvar, gop, gval = ("", "", "")
            if a.guard is not None:
                gvar, gop, gval = a.guard.var, a.guard.op.name, a.guard.value
            recs["ARC"].append(
                [rev, d.name, a.decl_index, a.from_node, tkind, target, ret, pkind, pat, gvar, gop, gval, a.action or ""]
            )
    for s in model.schemas:
        recs["SYMBOL"].append([rev, "SCHEMA", "", 0, s.name, ""])
        for e in s.entities:
            recs["ENTITY"].append([rev, s.name, e.name])
            for i, attr in enumerate(e.attributes):
                detail = attr.type.value + (" key" if attr.is_key else "")
                recs["SYMBOL"].append([rev, "ATTRIBUTE", f"{s.name}.{e.name}", i, attr.name, detail])
        for r in s.relations:
            recs["RELATION"].append(
                [rev, s.name, r.name, r.left.entity, r.left.card.value, r.right.entity, r.right.card.value]
            )
    for c in model.charts:
        recs["SYMBOL"].append([rev, "CHART", "", 0, c.name, ""])
        for m in c.modules:
            recs["MODULE"].append([rev, c.name, m.name, int(m.is_root)])
            for i, inv in enumerate(m.invocations):
                recs["SYMBOL"].append([rev, "INVOCATION", f"{c.name}.{m.name}", i, inv.callee, ""])
                for j, couple in enumerate(inv.couples):
                    recs["SYMBOL"].append([rev, "COUPLE", f"{c.name}.{m.name}.{i}", j, couple, ""])
    for act in model.actions:
        recs["ACTION"].append([rev, act.name])
        for i, asg in enumerate(act.assignments):
            recs["SYMBOL"].append([rev, "ASSIGNMENT", act.name, i, asg.var, ""])
            for j, t in enumerate(asg.terms):
                recs["SYMBOL"].append([rev, "TERM", f"{act.name}.{i}", j, t.kind, t.value])
    return recs


def reconstruct(records: dict[str, list[list]], source_name: str = "") -> DesignModel:
    """Rebuild a model from one revision's records (inverse of decompose)."""

    def rows(table: str) -> list[list]:
        return records.get(table, [])

    def symbol_rows(kind: str, owner: str) -> list[list]:
        out = [r for r in rows("SYMBOL") if r[1] == kind and r[2] == owner]
        return sorted(out, key=lambda r: r[3])

    nodes_by_diagram: dict[str, list[StdNode]] = {}
    for _, diagram, name, output in rows("NODE"):
        nodes_by_diagram.setdefault(diagram, []).append(StdNode(name, output))
    arcs_by_diagram: dict[str, list[StdArc]] = {}
    for _, diagram, decl_index, frm, tkind, target, ret, pkind, pat, gvar, gop, gval, action in rows("ARC"):
        tgt = PlainTarget(target) if tkind == "PLAIN" else CallTarget(target, ret)
        pattern = OTHERWISE if pkind == "OTHERWISE" else pat
        guard = Guard(gvar, GuardOp[gop], gval) if gop else None
        arcs_by_diagram.setdefault(diagram, []).append(
            StdArc(frm, tgt, pattern, guard, action or None, decl_index)
        )
    diagrams = []
    for _, name, entry, exits in rows("DIAGRAM"):
        diagrams.append(
            StdDiagram(
                name=name,
                entry=entry or None,
                exits=frozenset(x for x in exits.split(",") if x),
                nodes=tuple(nodes_by_diagram.get(name, [])),
                arcs=tuple(sorted(arcs_by_diagram.get(name, []), key=lambda a: a.decl_index)),
            )
        )

    entities_by_schema: dict[str, list[Entity]] = {}
    for _, schema, name in rows("ENTITY"):
        attrs = []
        for r in symbol_rows("ATTRIBUTE", f"{schema}.{name}"):
            parts = r[5].split()
            attrs.append(EntityAttr(r[4], AttrType(parts[0]), len(parts) > 1 and parts[1] == "key"))
        entities_by_schema.setdefault(schema, []).append(Entity(name, tuple(attrs)))
    relations_by_schema: dict[str, list[Relation]] = {}
    for _, schema, name, le, lc, re_, rc in rows("RELATION"):
        relations_by_schema.setdefault(schema, []).append(
            Relation(name, RelationEnd(le, Card(lc)), RelationEnd(re_, Card(rc)))
        )
    schemas = [
        ErSchema(
            r[4],
            tuple(entities_by_schema.get(r[4], [])),
            tuple(relations_by_schema.get(r[4], [])),
        )
        for r in symbol_rows("SCHEMA", "")
    ]

    modules_by_chart: dict[str, list[ScModule]] = {}
    for _, chart, name, is_root in rows("MODULE"):
        invocations = []
        for i, inv in enumerate(symbol_rows("INVOCATION", f"{chart}.{name}")):
            couples = tuple(r[4] for r in symbol_rows("COUPLE", f"{chart}.{name}.{i}"))
            invocations.append(Invocation(inv[4], couples))
        modules_by_chart.setdefault(chart, []).append(ScModule(name, bool(int(is_root)), tuple(invocations)))
    charts = [
        ScChart(r[4], tuple(modules_by_chart.get(r[4], []))) for r in symbol_rows("CHART", "")
    ]

    actions = []
    for row in rows("ACTION"):
        name = row[1]
        assignments = []
        for i, asg in enumerate(symbol_rows("ASSIGNMENT", name)):
            terms = tuple(Term(r[4], r[5]) for r in symbol_rows("TERM", f"{name}.{i}"))
            assignments.append(Assignment(asg[4], terms))
        actions.append(ActionDef(name, tuple(assignments)))

    return DesignModel(
        diagrams=tuple(diagrams),
        schemas=tuple(schemas),
        charts=tuple(charts),
        actions=tuple(actions),
        source_name=source_name,
    )


# --- the store -----------------------------------------------------------------


class RepoStore:
    """Handle on a store directory; all methods re-read committed state."""

    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)

    # paths

    @property
    def tables_dir(self) -> Path:
        return self.root / "tables"

    @property
    def lock_path(self) -> Path:
        return self.root / "LOCK"

    @property
    def revlog_path(self) -> Path:
        return self.root / "revisions.log"

    @property
    def event_log(self) -> bus.EventLog:
        return bus.EventLog(self.root / "events.log")

    def _table_path(self, table: str) -> Path:
        return self.tables_dir / f"{table}.recs"

    # lifecycle

    @classmethod
    def init(cls, root: str | os.PathLike) -> "RepoStore":
        """Create an empty store; the directory must be empty or absent."""
        path = Path(root)
        if path.exists() and any(path.iterdir()):
            raise RepoError("NOT_EMPTY", f"refusing to init store in non-empty directory {path}")
        store = cls(path)
        store.tables_dir.mkdir(parents=True, exist_ok=True)
        (path / "schema.txt").write_text(schema_text(), encoding="utf-8")
        for table, fields in TABLES.items():
            header = "\t".join(name for name, _ in fields)
            store._table_path(table).write_text(header + "\n", encoding="utf-8")
        store.revlog_path.write_text("", encoding="utf-8")
        return store

    def exists(self) -> bool:
        return (self.root / "schema.txt").is_file() and self.tables_dir.is_dir()

    def _require(self) -> None:
        if not self.exists():
            raise RepoError("NO_STORE", f"no record store at {self.root}")

    # revisions

    def revisions(self) -> list[Revision]:
        self._require()
        out: list[Revision] = []
        for line in self.revlog_path.read_text(encoding="utf-8").splitlines():
            if not line:
                continue
            number, author, ts, message, digest, source = (
                _unescape(f) for f in line.split("\t")
            )
            out.append(Revision(int(number), author, int(ts), message, digest, source))
        return out

    @property
    def current_revision(self) -> int:
        return len(self.revisions())

    # locking

    def lock(self, holder: str) -> Lock:
        """Acquire the advisory write lock; raise BUSY naming the holder."""
        self._require()
        acquired = int(time.time())
        try:
            fd = os.open(self.lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            current = self.lock_holder()
            raise RepoError("BUSY", f"store locked by '{current.holder if current else '?'}'")
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(f"{_escape(holder)}\t{acquired}\n")
        return Lock(holder, acquired)

    def lock_holder(self) -> Lock | None:
        try:
            content = self.lock_path.read_text(encoding="utf-8").strip()
        except FileNotFoundError:
            return None
        if not content:
            return None
        holder, ts = content.split("\t")
        return Lock(_unescape(holder), int(ts))

    def unlock(self, holder: str) -> None:
        current = self.lock_holder()
        if current is None or current.holder != holder:
            owner = current.holder if current else "nobody"
            raise RepoError("NOT_HOLDER", f"lock held by '{owner}', not '{holder}'")
        self.lock_path.unlink()

    def _require_lock(self, author: str) -> None:
        current = self.lock_holder()
        if current is None or current.holder != author:
            raise RepoError("NOT_LOCKED", f"'{author}' does not hold the store lock")

    # reading

    def _read_table(self, table: str) -> list[list]:
        text = self._table_path(table).read_text(encoding="utf-8")
        lines = text.splitlines()
        if not lines:
            raise RepoError("STORE_CORRUPT", f"table {table} is missing its header")
        fields = TABLES[table]
        out: list[list] = []
        for line in lines[1:]:
            raw = line.split("\t")
            if len(raw) != len(fields):
                raise RepoError("STORE_CORRUPT", f"bad record width in table {table}")
            row = []
            for (name, ftype), cell in zip(fields, raw):
                value = _unescape(cell)
                row.append(int(value) if ftype == "int" else value)
            out.append(row)
        return out

    def records_at(self, revision: int) -> dict[str, list[list]]:
        """All records of one revision, per table, in committed order."""
        return {
            table: [r for r in self._read_table(table) if r[0] == revision] for table in TABLES
        }

    def checkout(self, revision: int) -> DesignModel:
        """Reconstruct the model committed at `revision` (1-based)."""
        self._require()
        revs = self.revisions()
        if revision < 1 or revision > len(revs):
            raise RepoError("NO_SUCH_REVISION", f"revision {revision} does not exist")
        meta = revs[revision - 1]
        model = reconstruct(self.records_at(revision), source_name=meta.source_name)
        if model_digest(model) != meta.model_digest:
            raise RepoError("STORE_CORRUPT", f"digest mismatch reading revision {revision}")
        return model

    # writing

    def _append_records(self, recs: dict[str, list[list]]) -> None:
        for table in _TABLE_ORDER:
            new = recs.get(table, [])
            if not new:
                continue
            path = self._table_path(table)
            existing = path.read_text(encoding="utf-8")
            lines = [existing if existing.endswith("\n") else existing + "\n"]
            for row in new:
                lines.append("\t".join(_escape(str(v)) for v in row) + "\n")
            tmp = path.with_suffix(".recs.tmp")
            tmp.write_text("".join(lines), encoding="utf-8")
            os.replace(tmp, path)

    def _append_revision(self, rev: Revision) -> None:
        existing = self.revlog_path.read_text(encoding="utf-8")
        line = "\t".join(
            _escape(str(v))
            for v in (rev.number, rev.author, rev.timestamp, rev.message, rev.model_digest, rev.source_name)
        )
        tmp = self.revlog_path.with_suffix(".log.tmp")
        tmp.write_text(existing + line + "\n", encoding="utf-8")
        os.replace(tmp, self.revlog_path)

    def commit(self, model: DesignModel, author: str, message: str) -> Revision:
        """Commit a model snapshot as the next revision; requires the lock."""
        self._require()
        self._require_lock(author)
        build_index(model)  # reject structurally broken models before persisting
        number = self.current_revision + 1
        digest = model_digest(model)
        rev = Revision(number, author, int(time.time()), message, digest, model.source_name)
        self._append_records(decompose(model, number))
        self._append_revision(rev)
        readback = reconstruct(self.records_at(number), source_name=model.source_name)
        if model_digest(readback) != digest:
            raise RepoError("STORE_CORRUPT", f"digest mismatch reading back revision {number}")
        self.event_log.emit(
            bus.DIAGRAM_COMMITTED,
            subject=model.source_name or "model",
            revision=number,
            payload={"author": author, "message": message, "digest": digest},
        )
        return rev

    # interchange

    def export(self, revision: int) -> str:
        """Self-describing JSON document for one revision."""
        self._require()
        revs = self.revisions()
        if revision < 1 or revision > len(revs):
            raise RepoError("NO_SUCH_REVISION", f"revision {revision} does not exist")
        meta = revs[revision - 1]
        doc = {
            "revision": {
                "number": meta.number,
                "author": meta.author,
                "timestamp": meta.timestamp,
                "message": meta.message,
                "source_name": meta.source_name,
            },
            "digest": meta.model_digest,
            "tables": {
                table: {
                    "fields": [name for name, _ in TABLES[table]],
                    "records": rows,
                }
                for table, rows in self.records_at(revision).items()
            },
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def import_doc(self, doc_text: str, author: str) -> Revision:
        """Commit the model carried by an interchange document; requires the lock."""
        self._require()
        try:
            doc = json.loads(doc_text)
        except json.JSONDecodeError as e:
            raise RepoError("MALFORMED_DOC", f"interchange document is not valid JSON: {e}")
        if not isinstance(doc, dict) or not {"revision", "digest", "tables"} <= set(doc):
            raise RepoError("MALFORMED_DOC", "missing one of the keys: revision, digest, tables")
        tables = doc["tables"]
        if not isinstance(tables, dict) or set(tables) != set(TABLES):
            raise RepoError("MALFORMED_DOC", "table set does not match the store schema")
        records: dict[str, list[list]] = {}
        for table, fields in TABLES.items():
            body = tables[table]
            if not isinstance(body, dict) or body.get("fields") != [n for n, _ in fields]:
                raise RepoError("MALFORMED_DOC", f"bad field list for table {table}")
            rows = body.get("records")
            if not isinstance(rows, list) or any(
                not isinstance(r, list) or len(r) != len(fields) for r in rows
            ):
                raise RepoError("MALFORMED_DOC", f"bad records for table {table}")
            coerced = []
            for r in rows:
                row = []
                for (fname, ftype), cell in zip(fields, r):
                    if ftype == "int" and not isinstance(cell, int):
                        raise RepoError("MALFORMED_DOC", f"field {table}.{fname} must be an integer")
                    if ftype == "str" and not isinstance(cell, str):
                        raise RepoError("MALFORMED_DOC", f"field {table}.{fname} must be a string")
                    row.append(cell)
                coerced.append(row)
            records[table] = coerced
        source = doc["revision"].get("source_name", "") if isinstance(doc["revision"], dict) else ""
        model = reconstruct(records, source_name=source)
        if model_digest(model) != doc["digest"]:
            raise RepoError("STORE_CORRUPT", "digest does not match the document's records")
        message = doc["revision"].get("message", "") if isinstance(doc["revision"], dict) else ""
        return self.commit(model, author, message)
