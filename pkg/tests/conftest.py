import math

import numpy as np
import pytest

from scenfuzz.archetypes import generate
from scenfuzz.sim import Trace, simulate


def make_trace(ego_xy, dest=(100.0, 0.0), min_dist=5.0, collided=False, steps=5, npcs=1):
    """Hand-built trace: ego moves straight to `ego_xy`, NPCs parked far away."""
    ex, ey = ego_xy
    ego = np.zeros((steps, 7))
    ego[:, 0] = np.linspace(ex - steps, ex, steps)
    ego[:, 1] = ey
    ego[:, 3] = 10.0
    ego[:, 5:] = (4.5, 2.0)
    npc = np.zeros((steps, npcs, 7))
    npc[:, :, 0] = 1000.0
    npc[:, :, 5:] = (4.5, 2.0)
    coll = np.zeros(steps, dtype=bool)
    fault = np.zeros((steps, 2), dtype=int)
    if collided:
        coll[-1] = True
        fault[-1] = (0, 1)
        min_dist = 0.0
    mins = np.full(steps, float(min_dist))
    return Trace(0.1, np.arange(steps) * 0.1, ego, npc, coll, fault, mins, tuple(dest),
                 "collision" if collided else ("arrival" if math.dist(ego_xy, dest) <= 1 else "timeout"))


@pytest.fixture(scope="session")
def lane_follow_spec():
    return generate("lane-follow", 0)[0]


@pytest.fixture(scope="session")
def lane_follow_trace(lane_follow_spec):
    return simulate(lane_follow_spec)


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
