import pytest

_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_KEY] = []


@pytest.fixture
def verdict(request):
    """Record one ``<id> PASS|FAIL <detail>`` line for the acceptance summary."""
    lines = request.config.stash[_KEY]

    def record(cid, ok, detail):
        line = f"{cid} {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: (s.split()[0][:2], s)):
            terminalreporter.write_line(line)
