import math

import numpy as np
import pytest

from scenfuzz.archetypes import generate
from scenfuzz.scenario import EgoSpec, NpcSpec, ScenarioSpec, VehicleState, Waypoint
from scenfuzz.maps import two_way_road
from scenfuzz.sim import Trace, attribute_fault, min_bb_distance, simulate, step_kinematics


def test_straight_line_kinematics():
    s = VehicleState(0, 0, 0, 10)
    n = step_kinematics(s, (0.0, 0.0), 0.1)
    assert (n.x, n.y, n.speed) == pytest.approx((1.0, 0.0, 10.0))
    n = step_kinematics(s, (2.0, 0.0), 0.1)
    assert n.x == pytest.approx(0.1 * 10.1)
    assert n.accel == pytest.approx(2.0)


def test_no_reversing_and_realized_accel():
    n = step_kinematics(VehicleState(0, 0, 0, 0.2), (-6.0, 0.0), 0.1)
    assert n.speed == 0.0
    assert n.accel == pytest.approx(-2.0)


def test_turning_changes_heading_left():
    n = step_kinematics(VehicleState(0, 0, 0, 10), (0.0, 0.3), 0.1)
    assert 0 < n.heading < 0.2 and n.y > 0


def test_simulation_deterministic(lane_follow_spec):
    a = simulate(lane_follow_spec)
    b = simulate(lane_follow_spec)
    assert np.array_equal(a.ego, b.ego) and np.array_equal(a.npcs, b.npcs)
    assert a.outcome == b.outcome


def test_trace_shapes_and_roundtrip(lane_follow_trace):
    t = lane_follow_trace
    assert t.ego.shape == (len(t), 7) and t.npcs.shape == (len(t), 3, 7)
    assert np.all(np.diff(t.min_distance) <= 0)
    again = Trace.from_dict(t.to_dict())
    assert np.array_equal(again.ego, t.ego) and again.outcome == t.outcome


def test_lane_follow_arrives(lane_follow_trace):
    t = lane_follow_trace
    assert t.outcome == "arrival"
    assert math.dist(t.final_position, t.destination) <= 1.0
    assert not t.fault.any()


def _rear_end():
    m = two_way_road()
    ego = EgoSpec(20, -1.75, 0, (170, -1.75), ("e_in",), speed=8)
    npc = NpcSpec((Waypoint(5, -1.75, 20), Waypoint(150, -1.75, 20)))
    return ScenarioSpec(m, ego, (npc,), t_max=20)


def test_collision_ends_run_with_one_hot_fault():
    t = simulate(_rear_end())
    assert t.outcome == "collision" and t.collided
    assert tuple(t.fault[-1]) == (0, 1)
    assert t.collision[-1] and not t.collision[:-1].any()
    assert t.fault[-1].sum() == 1 and not t.fault[:-1].any()
    assert t.min_bb_distance == 0.0


def test_fault_attribution():
    ego = VehicleState(0, 0, 0, 10)
    ahead = VehicleState(4.0, 0, 0, 2)
    assert attribute_fault(ego, ahead, False) == (1, 0)
    assert attribute_fault(ego, ahead, True) == (1, 0)
    behind = VehicleState(-4.0, 0, 0, 15)
    assert attribute_fault(ego, behind, False) == (0, 1)


def test_min_bb_distance_symmetric():
    a = VehicleState(0, 0, 0.3, 1)
    b = VehicleState(8, 3, 2.0, 1)
    assert min_bb_distance(a, b) == min_bb_distance(b, a) > 0


@pytest.mark.parametrize("arch", ["lane-change", "intersection-straight", "intersection-left"])
def test_other_archetypes_run(arch):
    t = simulate(generate(arch, 1)[0])
    assert t.outcome in ("arrival", "collision", "timeout")
    assert len(t) >= 2
