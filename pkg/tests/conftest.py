from __future__ import annotations

import pytest

from bmatch import MarkMatrix, Orientation, PreferenceInstance, QuotaVector

# pass/fail lines collected by test_acceptance.py
ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


@pytest.fixture
def four_peer_instance() -> PreferenceInstance:
    """The acyclic but non-global 4-peer instance (peers 1..4 mapped to 0..3)."""
    return PreferenceInstance([[1, 2, 3], [0, 2, 3], [3, 0, 1], [2, 0, 1]])


@pytest.fixture
def m1() -> MarkMatrix:
    return MarkMatrix([[0, 3, 1], [2, 0, 1], [3, 1, 0]], Orientation.HIGHER)


@pytest.fixture
def m2() -> MarkMatrix:
    return MarkMatrix([[0, 1, 2], [1, 0, 3], [1, 2, 0]], Orientation.HIGHER)


@pytest.fixture
def global_k4() -> PreferenceInstance:
    """Global ranking 1 < 2 < 3 < 4 on the complete graph (0-based here)."""
    return PreferenceInstance([[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]])


@pytest.fixture
def b1_k4() -> QuotaVector:
    return QuotaVector.uniform(4, 1)
