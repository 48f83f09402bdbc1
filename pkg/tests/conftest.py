import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from reactive_dcs.comanche import comanche_main  # noqa: E402
from reactive_dcs.synth import build_arena, make_controller, synthesize  # noqa: E402

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SCENARIOS = os.path.join(ROOT, "scenarios")
FIXTURES = os.path.join(ROOT, "tests", "fixtures")

_cache = {}


def synthesized(async_mode):
    """(model, arena, winning, controller) of a Comanche variant, built once per session."""
    key = "async" if async_mode else "sync"
    if key not in _cache:
        model = comanche_main(async_mode=async_mode)
        arena = build_arena(model.node)
        winning = synthesize(arena)
        _cache[key] = (model, arena, winning, make_controller(arena, winning))
    return _cache[key]


@pytest.fixture(scope="session")
def comanche_sync():
    return synthesized(False)


@pytest.fixture(scope="session")
def comanche_async():
    return synthesized(True)


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE:
        terminalreporter.write_line(line)
