import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from scenfuzz.abstraction import (ACTION_NAMES, AbstractionConfig, ScenarioMatrix, TraceTooShortError,
                                  abstract_action, abstract_scenario, abstract_scene, abstract_violation,
                                  npc_scene_vectors, sample_indices, scene_cell, variable_labels)
from scenfuzz.scenario import VehicleState

from conftest import make_trace

CFG = AbstractionConfig()


def rotate(v: VehicleState, phi: float) -> VehicleState:
    c, s = math.cos(phi), math.sin(phi)
    return VehicleState(c * v.x - s * v.y, s * v.x + c * v.y, v.heading + phi, v.speed)


def test_cell_layout():
    ego = VehicleState(0, 0, 0, 0)  # facing +x; right is -y
    # bearings measured counter-clockwise from the ego's right: ahead 90, left 180, behind 270
    assert scene_cell(ego, 1.0, -5.0, CFG) == 0 * 4 + 0
    assert scene_cell(ego, 30.0, -1.0, CFG) == 1 * 4 + 2
    assert scene_cell(ego, 5.0, 1.0, CFG) == 2 * 4 + 0
    assert scene_cell(ego, -1.0, 45.0, CFG) == 4 * 4 + 3
    assert scene_cell(ego, -30.0, 1.0, CFG) == 5 * 4 + 2
    assert scene_cell(ego, 20.0, -2.0, CFG) == 1 * 4 + 1
    assert scene_cell(ego, 0.0, -51.0, CFG) is None
    # heading pi/2: ahead is +y, right is +x
    north = VehicleState(0, 0, math.pi / 2, 0)
    assert scene_cell(north, 5.0, 1.0, CFG) == 0
    assert scene_cell(north, -1.0, 5.0, CFG) == 2 * 4


def test_cell_ring_clamped_at_range():
    ego = VehicleState(0, 0, 0, 0)
    assert scene_cell(ego, 50.0, 0.0, CFG) % CFG.n == CFG.n - 1


def test_labels():
    labels = variable_labels(CFG)
    assert len(labels) == CFG.n_vars == 39
    assert labels[:2] == ["sr0", "sr1"] and labels[-2:] == ["f_ego", "f_npc"]


def near_cell_edge(ego, n, tol=1e-6):
    """True if an NPC sits (numerically) on a sector or ring boundary."""
    dx, dy = n.x - ego.x, n.y - ego.y
    r = math.hypot(dx, dy)
    if r < tol or abs(r / (CFG.perception_range / CFG.n) - round(r / (CFG.perception_range / CFG.n))) < tol:
        return True
    bearing = (math.atan2(dy, dx) - ego.heading + math.pi / 2) % (2 * math.pi)
    k = bearing / (2 * math.pi / CFG.m)
    return abs(k - round(k)) < tol


npc_st = st.tuples(st.floats(-60, 60), st.floats(-60, 60), st.floats(0, 6.3))


@settings(max_examples=300, deadline=None)
@given(st.floats(-100, 100), st.floats(-100, 100), st.floats(-7, 7), st.lists(npc_st, max_size=6),
       st.floats(-math.pi, math.pi), st.randoms(use_true_random=False))
def test_scene_invariants(ex, ey, eh, rel, phi, rnd):
    ego = VehicleState(ex, ey, eh, 5)
    npcs = [VehicleState(ex + dx, ey + dy, h, 3) for dx, dy, h in rel]
    for n in npcs:
        assume(not near_cell_edge(ego, n))
    vec = abstract_scene(ego, npcs, CFG)
    assert vec.shape == (CFG.m * CFG.n,)
    assert set(np.unique(vec)) <= {0, 1}
    shuffled = list(npcs)
    rnd.shuffle(shuffled)
    assert np.array_equal(abstract_scene(ego, shuffled, CFG), vec)
    rot = abstract_scene(rotate(ego, phi), [rotate(n, phi) for n in npcs], CFG)
    assert np.array_equal(rot, vec)
    ored = np.zeros_like(vec)
    for n in npcs:
        ored |= abstract_scene(ego, [n], CFG)
    assert np.array_equal(ored, vec)


@given(st.floats(-10, 10), st.floats(-7, 7), st.floats(-0.5, 0.5))
def test_action_exclusions(accel, heading, dh):
    prev = VehicleState(0, 0, heading, 5)
    cur = VehicleState(1, 0, heading + dh, 5, accel)
    a = abstract_action(prev, cur, CFG)
    acc, dec, left, right, keep = a
    assert not (acc and dec) and not (left and right)
    assert keep == int(not (acc or dec or left or right))


def test_action_semantics():
    prev = VehicleState(0, 0, 1.0, 5)
    assert abstract_action(prev, VehicleState(0, 0, 1.2, 5, 0.0), CFG).tolist() == [0, 0, 1, 0, 0]
    assert abstract_action(prev, VehicleState(0, 0, 0.8, 5, 0.0), CFG).tolist() == [0, 0, 0, 1, 0]
    assert abstract_action(prev, VehicleState(0, 0, 1.0, 5, 0.1), CFG).tolist() == [1, 0, 0, 0, 0]
    assert abstract_action(prev, VehicleState(0, 0, 1.0, 5, -0.1), CFG).tolist() == [0, 1, 0, 0, 0]
    assert abstract_action(prev, VehicleState(0, 0, 1.05, 5, 0.05), CFG).tolist() == [0, 0, 0, 0, 1]
    assert abstract_action(None, VehicleState(0, 0, 1, 5, 3), CFG).tolist() == [0] * len(ACTION_NAMES)


def test_violation_vector():
    assert abstract_violation((1, 0)).tolist() == [1, 0]
    with pytest.raises(ValueError):
        abstract_violation((1, 1))


def test_sample_indices_include_last():
    assert sample_indices(10, 4) == [0, 4, 8, 9]
    assert sample_indices(9, 4) == [0, 4, 8]


def test_matrix_of_trace(lane_follow_trace):
    X = abstract_scenario(lane_follow_trace, CFG)
    assert X.shape == (39, len(lane_follow_trace))
    assert set(np.unique(X.data)) <= {0, 1}
    assert (X.data[32:37].sum(axis=0)[1:] >= 1).all()
    again = ScenarioMatrix.from_csv(X.to_csv())
    assert np.array_equal(again.data, X.data) and again.labels == X.labels and again.steps == X.steps


def test_stride(lane_follow_trace):
    X = abstract_scenario(lane_follow_trace, AbstractionConfig(stride=5))
    assert X.shape[1] == len(sample_indices(len(lane_follow_trace), 5))


def test_npc_vectors_or_to_scene(lane_follow_trace):
    X = abstract_scenario(lane_follow_trace, CFG)
    per = [npc_scene_vectors(lane_follow_trace, k, CFG) for k in range(lane_follow_trace.n_npcs)]
    assert np.array_equal(np.bitwise_or.reduce(per).T, X.data[:32])


def test_too_short():
    with pytest.raises(TraceTooShortError):
        abstract_scenario(make_trace((10, 0), steps=1), CFG)


def test_config_validation():
    with pytest.raises(ValueError):
        AbstractionConfig(m=0)
    with pytest.raises(ValueError):
        AbstractionConfig(accel_threshold=-0.1)
    assert AbstractionConfig.from_dict(CFG.to_dict()) == CFG
