import pytest
from hypothesis import settings

# the same examples every run, so the suite output is reproducible
settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")

# criterion -> list of (part, ok, detail), filled by the acceptance suite
GATE: dict = {}


@pytest.fixture
def gate():
    def record(criterion: int, part: str, ok: bool, detail: str = "") -> None:
        GATE.setdefault(criterion, []).append((part, ok, detail))
    return record


def pytest_terminal_summary(terminalreporter):
    if not GATE:
        return
    terminalreporter.section("acceptance gate")
    for crit in sorted(GATE):
        parts = GATE[crit]
        verdict = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        terminalreporter.write_line(f"CRITERION {crit}: {verdict}")
        for part, ok, detail in parts:
            terminalreporter.write_line(f"    {'ok  ' if ok else 'FAIL'} {part}: {detail}")
