import pytest

_ACCEPTANCE = []


@pytest.fixture
def record():
    """Record an acceptance outcome; returns ``passed`` so tests can assert on it."""
    def _record(number, title, passed, detail, seconds):
        _ACCEPTANCE.append((number, title, bool(passed), detail, seconds))
        return passed
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail, seconds in sorted(_ACCEPTANCE):
        terminalreporter.write_line(
            f"criterion {number}: {'PASS' if passed else 'FAIL'}  {title}  ({detail}; {seconds:.1f} s)")
