import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fodeploy import DeploymentConfig, FaultScenario, example_path, validate_model  # noqa: E402

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


@pytest.fixture(scope="session")
def model_doc():
    with open(example_path(), encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def model(model_doc):
    return validate_model(model_doc)


@pytest.fixture(scope="session")
def reference_initial():
    with open(example_path("example_initial.json"), encoding="utf-8") as fh:
        return DeploymentConfig.from_dict(json.load(fh))


@pytest.fixture(scope="session")
def e1_isolated():
    return FaultScenario(frozenset({"e1"}), 1)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: int(r[0].split()[0])):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {name}  {detail}")
