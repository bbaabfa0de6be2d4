import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance results, filled by tests/test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def report(capsys):
    def _report(n: int, passed: bool, detail: str) -> None:
        ACCEPTANCE[n] = (passed, detail)
        with capsys.disabled():
            print(f"\ncriterion {n:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
    return _report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
