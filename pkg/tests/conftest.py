"""Collects the acceptance verdicts and prints them after the test session."""
import pytest

_VERDICTS: dict[int, tuple[bool, str]] = {}


class Verdicts:
    def record(self, number: int, passed: bool, detail: str) -> None:
        _VERDICTS[number] = (bool(passed), detail)


@pytest.fixture(scope="session")
def verdicts():
    return Verdicts()


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_VERDICTS):
        passed, detail = _VERDICTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if passed else 'FAIL'}  {detail}")
