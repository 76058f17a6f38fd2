import time

import pytest

RUNTIME_LIMIT = 60.0

# Filled by tests/test_acceptance.py; one (label, passed, detail) per criterion.
ACCEPTANCE_LINES: list[tuple[str, bool, str]] = []

_state = {}


def _full_run(config) -> bool:
    """True when no selection narrowed the run to part of the suite."""
    if config.getoption("keyword") or config.getoption("markexpr"):
        return False
    paths = [str(a) for a in config.invocation_params.args if not str(a).startswith("-")]
    return all(p.rstrip("/").endswith("tests") or p == "." for p in paths)


def pytest_sessionstart(session):
    _state["start"] = time.perf_counter()


def pytest_sessionfinish(session, exitstatus):
    elapsed = time.perf_counter() - _state["start"]
    _state["elapsed"] = elapsed
    if ACCEPTANCE_LINES and _full_run(session.config):
        ok = elapsed < RUNTIME_LIMIT
        _state["runtime_line"] = (
            f"{'PASS' if ok else 'FAIL'} 8-runtime: full suite {elapsed:.1f} s (limit {RUNTIME_LIMIT:.0f} s)"
        )
        if not ok and session.exitstatus == pytest.ExitCode.OK:
            session.exitstatus = pytest.ExitCode.TESTS_FAILED


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for label, ok, detail in ACCEPTANCE_LINES:
        tr.write_line(f"{'PASS' if ok else 'FAIL'} {label}: {detail}")
    if "runtime_line" in _state:
        tr.write_line(_state["runtime_line"])
