import pytest

ACCEPTANCE: dict[int, tuple[str, str]] = {}


@pytest.fixture
def record_acceptance():
    def record(number: int, title: str, ok: bool, detail: str = ""):
        ACCEPTANCE[number] = ("PASS" if ok else "FAIL", f"{title}: {detail}" if detail else title)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        status, text = ACCEPTANCE[number]
        terminalreporter.write_line(f"ACCEPTANCE {number:2d} {status}  {text}")
