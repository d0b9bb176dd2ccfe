import pytest

_RESULTS: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance verdict; the lines are repeated in the terminal summary."""

    def record(number: int, title: str, passed: bool, elapsed: float, limit: float, detail: str = ""):
        ok = passed and elapsed < limit
        line = (f"{'PASS' if ok else 'FAIL'} [{number:>2}] {title}: {detail} "
                f"({elapsed:.2f}s, limit {limit:g}s)")
        _RESULTS.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_RESULTS, key=lambda l: int(l.split("[")[1].split("]")[0])):
            terminalreporter.write_line(line)
