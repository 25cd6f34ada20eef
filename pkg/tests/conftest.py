import sys
from pathlib import Path

import pytest

from repocorpus.analysis import FrontendConfig, scan_repository

FIXTURES = Path(__file__).parent / "fixtures"
CPP_REPO = FIXTURES / "cpp_repo"
PY_REPO = FIXTURES / "py_repo"


@pytest.fixture(scope="session")
def cpp_graph():
    return scan_repository(CPP_REPO, FrontendConfig("cpp", ["include"]))


@pytest.fixture(scope="session")
def py_graph():
    return scan_repository(PY_REPO, FrontendConfig("python", ["."]))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
