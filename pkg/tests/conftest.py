import time

import pytest

_LINES: list[str] = []


class Recorder:
    """Formats one PASS/FAIL line per acceptance criterion."""

    def __init__(self):
        self.t0 = time.perf_counter()

    def elapsed(self) -> float:
        return time.perf_counter() - self.t0

    def __call__(self, number, title: str, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number} {title}: {detail} ({self.elapsed():.1f} s)"
        _LINES.append(line)
        print(line)
        return ok


@pytest.fixture
def acceptance():
    return Recorder()


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
