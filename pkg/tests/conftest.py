import pytest

_CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record the outcome of an acceptance criterion for the end-of-run summary."""
    def record(number: int, title: str, ok: bool, detail: str = "") -> bool:
        status = "PASS" if ok else "FAIL"
        _CRITERIA[number] = f"{status} criterion {number:2d}: {title}" + (f" ({detail})" if detail else "")
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[n])
