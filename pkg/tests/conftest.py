import pytest

LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[LINES] = []


@pytest.fixture
def acceptance_log(request):
    """Collects criterion lines for the terminal summary."""
    return request.config.stash[LINES]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
