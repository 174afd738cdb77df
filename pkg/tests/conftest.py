"""Shared fixtures and the acceptance summary printed after every run."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from iotcred.registry import MemoryRegistry
from iotcred.world import build_world

settings.register_profile(
    "suite", deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("suite")

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

CRITERIA = {
    1: "policy table exhaustion and rule witnesses",
    2: "lifecycle oracle over randomized interleavings",
    3: "ownership transfer with three proofs and replay rejection",
    4: "single-fault verification diagnostics",
    5: "codec round trips and binary < text",
    6: "fragmentation arithmetic and MQTT/CoAP overhead delta",
    7: "delegation equivalence and device-side savings",
    8: "envelope byte-flip and round trip",
    9: "memory/file registry equivalence incl. reopen",
}

_outcomes: dict[int, list[bool]] = defaultdict(list)


@pytest.fixture
def world():
    """A fresh fixture deployment in an in-memory registry."""
    return build_world(MemoryRegistry())


@pytest.fixture(scope="session")
def shared_world():
    """A read-only deployment shared across tests that never mutate it."""
    return build_world(MemoryRegistry())


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _outcomes[marker.args[0]].append(report.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number, title in CRITERIA.items():
        results = _outcomes.get(number)
        if not results:
            status = "NOT RUN"
        else:
            status = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status} - {title} ({len(results or [])} tests)")
