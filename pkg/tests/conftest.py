from pathlib import Path

import pytest

from wsdiscovery.ontology import load_ontology
from wsdiscovery.profiles import load_profile, load_request

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def onto():
    return load_ontology(FIXTURES / "university.ontology.json")


@pytest.fixture
def req1():
    return load_request(FIXTURES / "req1.request.json")


@pytest.fixture
def req2():
    return load_request(FIXTURES / "req2.request.json")


@pytest.fixture
def wser1():
    return load_profile(FIXTURES / "wser1.profile.json")


@pytest.fixture
def wser2():
    return load_profile(FIXTURES / "wser2.profile.json")


# -- acceptance summary: one PASS/FAIL line per criterion -------------------------

_acceptance = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance.append((marker.args[0], marker.args[1], report.outcome))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    grouped = {}
    for number, title, outcome in _acceptance:
        entry = grouped.setdefault(number, [title, True])
        entry[1] = entry[1] and outcome == "passed"
    for number in sorted(grouped):
        title, ok = grouped[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}")
