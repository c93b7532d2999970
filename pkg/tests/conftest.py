import pytest

_CRITERIA = {}


@pytest.fixture(scope="session")
def criterion():
    """Record one acceptance verdict: ``criterion(number, passed, detail)``."""

    def record(number, passed, detail=""):
        _CRITERIA.setdefault(number, []).append((bool(passed), detail))
        print(f"criterion {number}: {'PASS' if passed else 'FAIL'} {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA, key=lambda k: (int(str(k).rstrip("abcdefgh")), str(k))):
        for passed, detail in _CRITERIA[number]:
            terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
