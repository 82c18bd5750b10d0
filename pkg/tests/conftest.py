import pytest

from hdgmg.mesh import MeshHierarchy


@pytest.fixture(scope="session")
def hierarchy():
    """Internal levels 0..5 (published levels 1..6)."""
    return MeshHierarchy(6)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
