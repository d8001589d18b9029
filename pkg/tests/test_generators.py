from __future__ import annotations

import random

import pytest

from helpers_random import random_schema
from pictoforge.ddl import DdlError, parse_ddl
from pictoforge.errors import GenError
from pictoforge.generators import (
    format_dictionary,
    gen_dictionary,
    gen_doc,
    gen_skeleton,
    gen_sql,
    snake,
)
from pictoforge.model import DesignModel, PlainTarget, placeholders
from pictoforge.parser import parse


# --- dictionary ---------------------------------------------------------------


def test_dictionary_empty_model():
    assert gen_dictionary(DesignModel()) == []


def test_dictionary_minimal_diagram():
    m = parse('diagram d { entry a; node a output "hi"; }', "mini")
    entries = {(e.name, e.kind): e for e in gen_dictionary(m)}
    assert set(entries) == {("a", "NODE"), ("d", "DIAGRAM")}
    node = entries[("a", "NODE")]
    assert node.defined_in == ("diagram", "d")
    assert node.referenced_by == (("diagram", "d"),)
    assert entries[("d", "DIAGRAM")].defined_in == ("model", "mini")


def oracle_uses(model, name, kind, defined_in):
    """Membership rescan: does each named element use this symbol instance?"""
    users = set()
    for d in model.diagrams:
        u = ("diagram", d.name)
        in_scope = defined_in in (("diagram", d.name), ("model", model.source_name)) or kind in (
            "VARIABLE",
            "ACTION",
            "DIAGRAM",
        )
        if not in_scope:
            continue
        if kind == "NODE" and defined_in == ("diagram", d.name):
            mentioned = set()
            if d.entry:
                mentioned.add(d.entry)
            mentioned |= set(d.exits)
            for a in d.arcs:
                mentioned.add(a.from_node)
                mentioned.add(a.target.node if isinstance(a.target, PlainTarget) else a.target.return_to)
            if name in mentioned and name in {n.name for n in d.nodes}:
                users.add(u)
        if kind == "DIAGRAM":
            for a in d.arcs:
                if not isinstance(a.target, PlainTarget) and a.target.diagram == name:
                    if model.diagram(name) is not None:
                        users.add(u)
        if kind == "ARC_PATTERN" and defined_in == ("diagram", d.name):
            if any(a.pattern == name for a in d.arcs if isinstance(a.pattern, str)):
                users.add(u)
        if kind == "ACTION":
            if any(a.action == name for a in d.arcs) and model.action(name) is not None:
                users.add(u)
        if kind == "VARIABLE":
            used = any(a.guard is not None and a.guard.var == name for a in d.arcs) or any(
                name in placeholders(n.output) for n in d.nodes
            )
            if used:
                users.add(u)
    for s in model.schemas:
        if kind == "ENTITY" and defined_in == ("schema", s.name):
            for r in s.relations:
                if name in (r.left.entity, r.right.entity) and any(e.name == name for e in s.entities):
                    users.add(("relation", r.name))
    for c in model.charts:
        declared = {m_.name for m_ in c.modules}
        for m_ in c.modules:
            if kind == "MODULE" and defined_in == ("chart", c.name):
                if any(i.callee == name and name in declared for i in m_.invocations):
                    users.add(("module", m_.name))
            if kind == "COUPLE" and defined_in == ("chart", c.name):
                if any(name in i.couples for i in m_.invocations):
                    users.add(("module", m_.name))
    for act in model.actions:
        if kind == "VARIABLE":
            reads = {t.value for asg in act.assignments for t in asg.terms if t.kind == "variable"}
            writes = {asg.var for asg in act.assignments}
            if name in reads | writes:
                users.add(("action", act.name))
    return users


def test_dictionary_cross_references_match_scan_oracle(workshop_model, login_model):
    for model in (workshop_model, login_model):
        for entry in gen_dictionary(model):
            expected = oracle_uses(model, entry.name, entry.kind, entry.defined_in)
            assert set(entry.referenced_by) == expected, (entry.name, entry.kind)


def test_dictionary_sorted_no_duplicate_refs(workshop_model):
    entries = gen_dictionary(workshop_model)
    keys = [(e.name, e.kind, e.defined_in) for e in entries]
    assert keys == sorted(keys)
    for e in entries:
        assert len(set(e.referenced_by)) == len(e.referenced_by)


def test_format_dictionary_row_count(workshop_model):
    entries = gen_dictionary(workshop_model)
    assert len(format_dictionary(entries).splitlines()) == len(entries)


# --- SQL ------------------------------------------------------------------------


def test_snake_case():
    assert snake("Person") == "person"
    assert snake("PersonRecord") == "person_record"
    assert snake("already_snake") == "already_snake"
    assert snake("HTTPServer2") == "http_server2"


def test_sql_single_entity_shape():
    m = parse("data s { entity Person { id: int key; name: string; } }")
    assert gen_sql(m, "s") == (
        "CREATE TABLE person (id INTEGER NOT NULL, name TEXT, PRIMARY KEY (id));\n"
    )


def test_sql_one_to_many_fk_on_many_side(workshop_model):
    ddl = gen_sql(workshop_model, "inventory")
    tables = {t.name: t for t in parse_ddl(ddl)}
    car = tables["car"]
    fk = car.column("person_id")
    assert fk is not None and fk.not_null and fk.references == ("person", "id")
    assert fk.type == "INTEGER"


def test_sql_one_to_one_fk_on_right_side(workshop_model):
    tables = {t.name: t for t in parse_ddl(gen_sql(workshop_model, "inventory"))}
    badge = tables["badge"]
    assert badge.column("person_id").references == ("person", "id")
    assert tables["person"].column("badge_serial") is None


def test_sql_many_to_many_junction(workshop_model):
    tables = {t.name: t for t in parse_ddl(gen_sql(workshop_model, "inventory"))}
    likes = tables["likes"]
    assert [c.name for c in likes.columns] == ["person_id", "car_vin"]
    assert likes.primary_key == ["person_id", "car_vin"]
    refs = {c.references for c in likes.columns}
    assert refs == {("person", "id"), ("car", "vin")}


def test_sql_errors():
    m = parse("data s { entity P { id: int key; } entity NoKey { x: int; } relation r(P 1, NoKey N); relation bad(NoKey 1, P N); }")
    with pytest.raises(GenError) as exc:
        gen_sql(m, "missing")
    assert exc.value.code == "SCHEMA_NOT_FOUND"
    with pytest.raises(GenError) as exc:
        gen_sql(m, "s")
    assert exc.value.code == "NO_KEY"  # `bad` references keyless NoKey

    ghost = parse("data g { entity P { id: int key; } relation r(P 1, Ghost N); }")
    with pytest.raises(GenError) as exc:
        gen_sql(ghost, "g")
    assert exc.value.code == "SCHEMA_HAS_ERRORS"


def test_sql_self_relation_and_duplicate_columns():
    m = parse("data s { entity P { id: int key; } relation knows(P N, P N); relation boss(P 1, P N); }")
    ddl = gen_sql(m, "s")
    tables = {t.name: t for t in parse_ddl(ddl)}
    knows = tables["knows"]
    assert [c.name for c in knows.columns] == ["p_id", "p_id_2"]
    assert tables["p"].column("p_id") is not None  # boss FK on the N side


def test_sql_composite_key_uses_table_level_fk():
    m = parse(
        "data s { entity P { a: int key; b: string key; } entity Q { id: int key; } relation r(P 1, Q N); }"
    )
    tables = {t.name: t for t in parse_ddl(gen_sql(m, "s"))}
    q = tables["q"]
    assert q.column("p_a") is not None and q.column("p_b") is not None
    assert q.foreign_keys and q.foreign_keys[0].ref_table == "p"
    assert q.foreign_keys[0].ref_columns == ["a", "b"]


def test_sql_property_random_schemas_reparse():
    for seed in range(100):
        rng = random.Random(seed)
        schema = random_schema(rng, "s")
        m = DesignModel(schemas=(schema,))
        try:
            ddl = gen_sql(m, "s")
        except GenError as e:
            raise AssertionError(f"seed {seed}: {e}")
        try:
            tables = parse_ddl(ddl)
        except DdlError as e:
            raise AssertionError(f"seed {seed}: generated DDL rejected: {e}\n{ddl}")
        assert len(tables) >= len(schema.entities)


# --- skeletons ---------------------------------------------------------------------


def test_chart_skeleton_shape(workshop_model):
    text = gen_skeleton(workshop_model, "chart", "ops")
    stubs = [line for line in text.splitlines() if line.startswith("void ")]
    names = [s.split("(")[0].removeprefix("void ") for s in stubs]
    assert names[0] == "main"  # root first
    assert set(names) == {"main", "fetch_user", "report"}
    body = text[text.index("void main") :]
    first_call = body.index("fetch_user(user_name);")
    second_call = body.index("report(user_name, zzz_unused);")
    assert first_call < second_call  # invocation order preserved
    assert "/* TODO */" in text


def test_chart_skeleton_root_calls_leaf():
    m = parse("chart c { module root_m root { invokes leaf; } module leaf { } }")
    text = gen_skeleton(m, "chart", "c")
    stubs = [line for line in text.splitlines() if line.startswith("void ")]
    assert len(stubs) == 2
    assert "    leaf();" in text.splitlines()


def test_diagram_skeleton_minimal():
    m = parse('diagram d { entry a; node a output "hi"; }')
    text = gen_skeleton(m, "diagram", "d")
    assert "case D_A:" in text
    assert text.count("case ") == 1


def test_diagram_skeleton_full(login_model):
    text = gen_skeleton(login_model, "diagram", "login")
    assert text.count("case ") == len(login_model.diagram("login").nodes)
    assert "void action_remember_user(void)" in text
    assert "call confirm" in text


def test_skeleton_errors(broken_model, workshop_model):
    with pytest.raises(GenError) as exc:
        gen_skeleton(workshop_model, "chart", "nope")
    assert exc.value.code == "TARGET_NOT_FOUND"
    with pytest.raises(GenError) as exc:
        gen_skeleton(broken_model, "diagram", "broken")
    assert exc.value.code == "TARGET_HAS_ERRORS"


def test_skeleton_deterministic(workshop_model):
    assert gen_skeleton(workshop_model, "chart", "ops") == gen_skeleton(
        workshop_model, "chart", "ops"
    )


# --- document -------------------------------------------------------------------------


def test_doc_empty_model():
    assert gen_doc(DesignModel(source_name="void.use")) == "# Design Document: void.use\n"


def test_doc_section_count(workshop_model):
    doc = gen_doc(workshop_model)
    item_sections = [
        line
        for line in doc.splitlines()
        if line.startswith(("## Diagram: ", "## Data: ", "## Chart: "))
    ]
    expected = (
        len(workshop_model.diagrams) + len(workshop_model.schemas) + len(workshop_model.charts)
    )
    assert len(item_sections) == expected


def test_doc_dictionary_rows_match(workshop_model):
    doc = gen_doc(workshop_model)
    entries = gen_dictionary(workshop_model)
    table_rows = [
        line for line in doc.splitlines() if line.startswith("| ") and not line.startswith("| Name") and not line.startswith("| ---")
    ]
    assert len(table_rows) == len(entries)


def test_doc_findings_appendix(broken_model, login_model):
    assert "- C001" in gen_doc(broken_model)
    assert "No findings." in gen_doc(login_model)
