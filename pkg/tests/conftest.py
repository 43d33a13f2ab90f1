import pytest

_KEY = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance(request):
    lines = request.config.stash.setdefault(_KEY, [])

    def record(criterion, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
        print(line)
        lines.append(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
