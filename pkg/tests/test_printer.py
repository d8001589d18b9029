from __future__ import annotations

import pytest

from conftest import fixture_models
from helpers_random import random_model
from pictoforge.model import DesignModel, model_equal
from pictoforge.parser import parse
from pictoforge.printer import escape_string, pretty_print


def test_empty_model_prints_empty():
    assert pretty_print(DesignModel()) == ""


def test_minimal_diagram_canonical_form():
    m = parse('diagram d{entry a;node a output "hi";}')
    assert pretty_print(m) == 'diagram d {\n  entry a;\n  node a output "hi";\n}\n'


def test_escape_string_round_trip_chars():
    assert escape_string('a"b\\c\nd') == '"a\\"b\\\\c\\nd"'
    with pytest.raises(ValueError):
        escape_string("bad\rchar")


@pytest.mark.parametrize("name", sorted(fixture_models()))
def test_fixture_round_trip(name):
    model = fixture_models()[name]
    printed = pretty_print(model)
    again = parse(printed, name)
    assert model_equal(model, again)
    assert pretty_print(again) == printed  # idempotent


def test_random_models_round_trip():
    for seed in range(50):
        model = random_model(seed)
        printed = pretty_print(model)
        reparsed = parse(printed, f"rt{seed}")
        assert model_equal(model, reparsed), f"seed {seed}"
        assert pretty_print(reparsed) == printed, f"seed {seed}"


def test_source_idempotent_fixpoint(fixtures_dir):
    source = (fixtures_dir / "workshop.use").read_text(encoding="utf-8")
    once = pretty_print(parse(source, "w"))
    twice = pretty_print(parse(once, "w"))
    assert once == twice
