import re

import pytest

_VERDICTS: dict[str, tuple[str, str]] = {}


class Verdict:
    """Records one PASS/FAIL line per acceptance criterion and asserts it."""

    def __call__(self, number, ok: bool, detail: str):
        status = "PASS" if ok else "FAIL"
        key = f"{number:>2}"
        _VERDICTS[key] = (status, detail)
        print(f"criterion {key}: {status}  {detail}")
        assert ok, f"criterion {number}: {detail}"


@pytest.fixture
def verdict():
    return Verdict()


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    order = lambda k: (int(re.match(r"\s*(\d+)", k).group(1)), k.strip())  # noqa: E731
    for key in sorted(_VERDICTS, key=order):
        status, detail = _VERDICTS[key]
        terminalreporter.write_line(f"criterion {key}: {status}  {detail}")
