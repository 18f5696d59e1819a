import pytest

# criterion id -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record():
    def _record(n: int, passed: bool, detail: str) -> bool:
        ACCEPTANCE[n] = (bool(passed), detail)
        print(f"CRITERION {n:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"CRITERION {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    passed = sum(ok for ok, _ in ACCEPTANCE.values())
    terminalreporter.write_line(f"{passed}/{len(ACCEPTANCE)} criteria passed")
