from __future__ import annotations

from pathlib import Path

import pytest

from pictoforge.parser import parse_file

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def login_model():
    return parse_file(FIXTURES / "login.use")


@pytest.fixture
def workshop_model():
    return parse_file(FIXTURES / "workshop.use")


@pytest.fixture
def broken_model():
    return parse_file(FIXTURES / "broken.use")


def fixture_models() -> dict[str, object]:
    """Every .use fixture, parsed fresh."""
    return {p.name: parse_file(p) for p in sorted(FIXTURES.glob("*.use"))}


# Acceptance reporting: one PASS/FAIL line per test_acceptance criterion.

_acceptance_results: list[tuple[str, str]] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and item.module.__name__ == "test_acceptance":
        name = item.name.replace("test_", "", 1)
        _acceptance_results.append((name, "PASS" if report.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict in _acceptance_results:
        terminalreporter.write_line(f"{verdict}  {name}")
