import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))


@pytest.fixture
def hospital_csv(tmp_path):
    from rwalk import synthetic

    return synthetic.write_hospital_csv(tmp_path / "hospital.csv", seed=1)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
    missing = [n for n in range(1, 11) if n not in results]
    for n in missing:
        terminalreporter.write_line(f"FAIL  criterion {n:>2}: did not run to completion")
