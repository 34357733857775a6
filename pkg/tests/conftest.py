import pytest

_CRITERIA = []


@pytest.fixture
def criterion():
    """Return ``record(name, ok, detail)``: prints and stores one PASS/FAIL line, then asserts."""

    def record(name, ok, detail=""):
        line = f"{name} {'PASS' if ok else 'FAIL'} {detail}".rstrip()
        print(line)
        _CRITERIA.append(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda s: int(s.split()[0][1:])):
            terminalreporter.write_line(line)
