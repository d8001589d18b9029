"""Parser and validator for the SQL subset the schema generator emits.

This is the receiving side of a dual check: generated DDL must parse and
validate here, and this module shares no code with the generator. The subset:

    CREATE TABLE name (
        col TYPE [NOT NULL] [REFERENCES table(col)],
        ...,
        [PRIMARY KEY (col, ...),]
        [FOREIGN KEY (col, ...) REFERENCES table(col, ...), ...]
    );

Types are INTEGER, TEXT, BOOLEAN, DATE. Validation: unique table names,
unique column names per table, primary-key and foreign-key columns declared,
references point at existing tables (self-reference allowed) and declared
columns, and foreign-key column lists agree in arity.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

COLUMN_TYPES = ("INTEGER", "TEXT", "BOOLEAN", "DATE")


class DdlError(Exception):
    pass


@dataclass
class DdlColumn:
    name: str
    type: str
    not_null: bool = False
    references: tuple[str, str] | None = None  # (table, column)


@dataclass
class DdlForeignKey:
    columns: list[str]
    ref_table: str
    ref_columns: list[str]


@dataclass
class DdlTable:
    name: str
    columns: list[DdlColumn] = field(default_factory=list)
    primary_key: list[str] = field(default_factory=list)
    foreign_keys: list[DdlForeignKey] = field(default_factory=list)

    def column(self, name: str) -> DdlColumn | None:
        for c in self.columns:
            if c.name == name:
                return c
        return None


_TOKEN_RE = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*|[(),;])")


def _tokenize(text: str) -> list[str]:
    tokens: list[str] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            rest = text[pos:].strip()
            if not rest:
                break
            raise DdlError(f"unexpected character {rest[0]!r}")
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


class _Cursor:
    def __init__(self, tokens: list[str]):
        self.toks = tokens
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self) -> str:
        if self.i >= len(self.toks):
            raise DdlError("unexpected end of DDL")
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, *words: str) -> None:
        for w in words:
            tok = self.take()
            if tok.upper() != w:
                raise DdlError(f"expected {w}, got {tok!r}")

    def name(self) -> str:
        tok = self.take()
        if not re.match(r"[A-Za-z_][A-Za-z0-9_]*\Z", tok):
            raise DdlError(f"expected a name, got {tok!r}")
        return tok


def _name_list(cur: _Cursor) -> list[str]:
    cur.expect("(")
    names = [cur.name()]
    while cur.peek() == ",":
        cur.take()
        names.append(cur.name())
    cur.expect(")")
    return names


def parse_ddl(text: str) -> list[DdlTable]:
    """Parse and validate a DDL script; raise DdlError on any problem."""
    cur = _Cursor(_tokenize(text))
    tables: list[DdlTable] = []
    by_name: dict[str, DdlTable] = {}
    while cur.peek() is not None:
        cur.expect("CREATE", "TABLE")
        table = DdlTable(cur.name())
        if table.name in by_name:
            raise DdlError(f"duplicate table name {table.name!r}")
        cur.expect("(")
        while True:
            tok = cur.peek()
            if tok is None:
                raise DdlError("unexpected end of DDL inside CREATE TABLE")
            if tok.upper() == "PRIMARY":
                cur.take()
                cur.expect("KEY")
                if table.primary_key:
                    raise DdlError(f"two PRIMARY KEY clauses in table {table.name!r}")
                table.primary_key = _name_list(cur)
            elif tok.upper() == "FOREIGN":
                cur.take()
                cur.expect("KEY")
                cols = _name_list(cur)
                cur.expect("REFERENCES")
                ref_table = cur.name()
                ref_cols = _name_list(cur)
                table.foreign_keys.append(DdlForeignKey(cols, ref_table, ref_cols))
            else:
                col = DdlColumn(cur.name(), cur.take().upper())
                if col.type not in COLUMN_TYPES:
                    raise DdlError(f"unknown column type {col.type!r} in table {table.name!r}")
                if table.column(col.name) is not None:
                    raise DdlError(f"duplicate column {col.name!r} in table {table.name!r}")
                while cur.peek() is not None and cur.peek() not in (",", ")"):
                    word = cur.take().upper()
                    if word == "NOT":
                        cur.expect("NULL")
                        col.not_null = True
                    elif word == "REFERENCES":
                        ref_table = cur.name()
                        cur.expect("(")
                        ref_col = cur.name()
                        cur.expect(")")
                        col.references = (ref_table, ref_col)
                    else:
                        raise DdlError(f"unexpected token {word!r} in column definition")
                table.columns.append(col)
            tok = cur.take()
            if tok == ",":
                continue
            if tok == ")":
                break
            raise DdlError(f"expected ',' or ')', got {tok!r}")
        cur.expect(";")
        tables.append(table)
        by_name[table.name] = table

    # cross validation
    for table in tables:
        if not table.columns:
            raise DdlError(f"table {table.name!r} has no columns")
        col_names = {c.name for c in table.columns}
        for pk in table.primary_key:
            if pk not in col_names:
                raise DdlError(f"primary key column {pk!r} not declared in {table.name!r}")
        for col in table.columns:
            if col.references is not None:
                ref_table, ref_col = col.references
                target = by_name.get(ref_table)
                if target is None:
                    raise DdlError(f"column {col.name!r} references unknown table {ref_table!r}")
                if target.column(ref_col) is None:
                    raise DdlError(f"column {col.name!r} references unknown column {ref_table}.{ref_col}")
        for fk in table.foreign_keys:
            if len(fk.columns) != len(fk.ref_columns):
                raise DdlError(f"foreign key arity mismatch in {table.name!r}")
            for c in fk.columns:
                if c not in col_names:
                    raise DdlError(f"foreign key column {c!r} not declared in {table.name!r}")
            target = by_name.get(fk.ref_table)
            if target is None:
                raise DdlError(f"foreign key references unknown table {fk.ref_table!r}")
            for c in fk.ref_columns:
                if target.column(c) is None:
                    raise DdlError(f"foreign key references unknown column {fk.ref_table}.{c}")
    return tables
