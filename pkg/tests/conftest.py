import math

import numpy as np
import pytest
from hypothesis import settings

from qkclf import circuits

settings.register_profile("qkclf", max_examples=60, deadline=None)
settings.load_profile("qkclf")


@pytest.fixture
def toy():
    return circuits.toy_dataset(math.pi / 2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call":
                continue
            props = dict(rep.user_properties)
            if "criterion" in props:
                name = props["criterion"]
                if props.get("measured"):
                    name = f"{name} | {props['measured']}"
                lines.append((name, "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, status in sorted(lines, key=lambda t: int(t[0].split()[0][2:])):
            terminalreporter.write_line(f"[{status}] {name}")
