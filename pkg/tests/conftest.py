import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from collatz_ergodic import COLLATZ_T, THREE_N_MINUS_ONE  # noqa: E402
from collatz_ergodic.hopf import classify_window  # noqa: E402


@pytest.fixture(scope="session")
def t_report():
    return classify_window(COLLATZ_T, 10**4)


@pytest.fixture(scope="session")
def m_report():
    return classify_window(THREE_N_MINUS_ONE, 1000)


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record one acceptance line: ``verdict(k, ok, detail, seconds, limit)``."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def record(k, ok, detail, seconds, limit):
        in_time = seconds < limit
        lines.append((k, ok and in_time, f"{detail}; {seconds:.3f}s (limit {limit}s)"))
        return ok and in_time
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for k, ok, detail in sorted(lines):
        terminalreporter.line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
