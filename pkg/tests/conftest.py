from __future__ import annotations

import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

from sigfuzz import benchmarks  # noqa: E402
from sigfuzz.ir import instrument, parse_model  # noqa: E402

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES: list = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def ondlc():
    return benchmarks.load("ondlc")


@pytest.fixture(scope="session")
def ondlc_im(ondlc):
    return instrument(ondlc)


@pytest.fixture(scope="session")
def guidance_im():
    return instrument(benchmarks.load("guidance"))


PASSTHROUGH = """
model pass samples=3
port inp in signal int32
port outp out signal int32
link inp.0 -> outp.0
"""

RELOP = """
model relop samples=1
port inp in signal int32 range -100 100
port pos out signal bool
block zero Constant {value=0,type=int32}
block gt RelationalOp {op=gt}
link inp.0 -> gt.0
link zero.0 -> gt.1
link gt.0 -> pos.0
"""


@pytest.fixture
def passthrough():
    return parse_model(PASSTHROUGH)


@pytest.fixture
def relop():
    return parse_model(RELOP)
