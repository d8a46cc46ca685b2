import pytest

_VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record a one-line PASS/FAIL summary, printed after the run."""

    def record(label: str, ok: bool | None, detail: str = "") -> bool:
        status = "INFO" if ok is None else "PASS" if ok else "FAIL"
        _VERDICTS.append(f"{status}  {label}" + (f"  ({detail})" if detail else ""))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
