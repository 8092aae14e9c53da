import pytest


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(n, title, passed, detail)``."""
    lines = request.config.stash.setdefault(_KEY, {})

    def record(number, title, passed, detail=""):
        line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
        lines[number] = line
        print(line)
        return passed

    return record


_KEY = pytest.StashKey[dict]()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_KEY, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        terminalreporter.write_line(lines[n])
