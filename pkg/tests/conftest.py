import sys
import warnings
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from starkhcp.config import RunConfig  # noqa: E402
from starkhcp.pipeline import Simulation  # noqa: E402

# criterion -> (passed, detail); filled by test_acceptance, printed at the end
ACCEPTANCE: dict = {}


def record(criterion: str, passed: bool, detail: str):
    ACCEPTANCE[criterion] = (bool(passed), detail)
    print(f"{'PASS' if passed else 'FAIL'} {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda s: int(s.split()[0])):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


@pytest.fixture(scope="session")
def cs_sim():
    """Default cesium run: F = 160 V/cm, Q = 0.002, basis 10-40."""
    return Simulation(RunConfig())


@pytest.fixture(scope="session")
def cs_carpet(cs_sim):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return cs_sim.carpet()
