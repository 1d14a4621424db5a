"""Shared fixtures and the acceptance-criteria summary hook."""

import pytest

import ecoepi as ee

# criterion number -> (label, passed); filled by the makereport hook below
_CRITERIA = {}

# free-form lines appended to the acceptance summary by individual tests
_NOTES = []


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(num, label): tag a test as one numbered acceptance criterion",
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, label = mark.args
    if report.when == "call":
        _CRITERIA[num] = (label, report.passed)
    elif report.when == "setup" and not report.passed:
        _CRITERIA[num] = (label, False)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        label, ok = _CRITERIA[num]
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {num}: {label} ... {status}")
    for note in _NOTES:
        terminalreporter.write_line(note)


@pytest.fixture
def acceptance_note():
    """Record a line to print under the acceptance-criteria summary."""
    return _NOTES.append


@pytest.fixture(scope="session")
def presets():
    """First-initial LoadedScenario for every built-in preset."""
    return {name: ee.preset_scenario(name) for name in ee.PRESET_NAMES}


@pytest.fixture(scope="session")
def preset_refs(presets):
    """Reference attractors, built once per preset and shared."""
    return {
        name: ee.build_references(loaded.scenario)
        for name, loaded in presets.items()
    }
