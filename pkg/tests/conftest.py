import numpy as np
import pytest
from hypothesis import settings

from desense.config import default_layout, replica_layout, prototype_cell, prototype_film

settings.register_profile("ci", max_examples=200, deadline=None)
settings.register_profile("fast", max_examples=20, deadline=None)
settings.load_profile("ci")

np.seterr(over="raise", divide="raise", invalid="raise", under="ignore")


@pytest.fixture
def film():
    return prototype_film()


@pytest.fixture
def cell():
    return prototype_cell()


@pytest.fixture
def layout():
    return default_layout()


@pytest.fixture
def replica():
    return replica_layout()


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call" or "test_acceptance" not in rep.nodeid:
                continue
            props = dict(rep.user_properties)
            if "criterion" in props:
                lines.append((props["criterion"], "PASS" if rep.passed else "FAIL", props.get("detail", "")))
    if lines:
        terminalreporter.section("acceptance criteria")
        for num, verdict, detail in sorted(lines):
            terminalreporter.write_line(f"criterion {num:>2}: {verdict}  {detail}")
