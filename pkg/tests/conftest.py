from __future__ import annotations

import pytest

from socialprox.graph import build_graph

# Collected by tests/test_acceptance.py, printed once at the end of the run.
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def g1():
    """Four-cycle u -> z -> v -> z' -> u (rebuilt from the walk/broadcast narrative)."""
    return build_graph([("u", "z"), ("z", "v"), ("v", "zp"), ("zp", "u")])


@pytest.fixture
def g2():
    """Hub z fed by u and x, feeding v and w."""
    return build_graph([("u", "z"), ("x", "z"), ("z", "v"), ("z", "w")])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
