import json
import math

import pytest

from scenfuzz.archetypes import ARCHETYPES, adjacent_and_opposite, generate
from scenfuzz.maps import four_way_intersection, one_way_road, two_way_road
from scenfuzz.scenario import (InvalidScenarioError, NpcSpec, ScenarioSpec, SchemaVersionError, VehicleState,
                               Waypoint)


@pytest.mark.parametrize("arch", ARCHETYPES)
def test_archetypes_validate_and_roundtrip(arch):
    for spec in generate(arch, 3, count=2):
        spec.validate()
        again = ScenarioSpec.from_dict(json.loads(json.dumps(spec.to_dict())))
        assert again.to_dict() == spec.to_dict()


def test_generation_is_seeded():
    a = generate("intersection-left", 5)[0].to_dict()
    b = generate("intersection-left", 5)[0].to_dict()
    c = generate("intersection-left", 6)[0].to_dict()
    assert a == b and a != c


def test_unknown_archetype():
    with pytest.raises(ValueError):
        generate("roundabout", 0)


@pytest.mark.parametrize("factory", [two_way_road, one_way_road, four_way_intersection])
def test_maps_validate(factory):
    factory().validate()


def test_on_map_and_locate():
    m = two_way_road()
    assert m.on_map(50, -1.75) and m.on_map(50, 5.0)
    assert not m.on_map(50, 12.0)
    lane, s, d = m.locate(50, -2.0)
    assert lane.id == "e_in" and s == pytest.approx(50) and d == pytest.approx(-0.25)
    lane, s, _ = m.locate(50, 1.75)
    assert lane.id == "w_in" and s == pytest.approx(250)


def test_intersection_junction_box():
    m = four_way_intersection()
    assert m.on_map(0, 0)
    assert m.junctions[0].contains(0, 0)


def _with_npc(spec, npc):
    return spec.with_npcs([npc])


def test_validation_errors(lane_follow_spec):
    spec = lane_follow_spec
    with pytest.raises(InvalidScenarioError):
        _with_npc(spec, NpcSpec((Waypoint(50, -1.75, 5),))).validate()
    with pytest.raises(InvalidScenarioError):
        _with_npc(spec, NpcSpec((Waypoint(50, -1.75, 5), Waypoint(60, -1.75, 30)))).validate()
    with pytest.raises(InvalidScenarioError):
        _with_npc(spec, NpcSpec((Waypoint(50, 40, 5), Waypoint(60, -1.75, 5)))).validate()
    with pytest.raises(InvalidScenarioError):
        spec.with_npcs([]).validate()


def test_schema_version_checked(lane_follow_spec):
    d = lane_follow_spec.to_dict()
    d["schema_version"] = 99
    with pytest.raises(SchemaVersionError):
        ScenarioSpec.from_dict(d)
    d["schema_version"] = 1
    del d["ego"]
    with pytest.raises(InvalidScenarioError):
        ScenarioSpec.from_dict(d)


def test_vehicle_state_wraps_heading():
    v = VehicleState(0, 0, -math.pi / 2, 1)
    assert v.heading == pytest.approx(1.5 * math.pi)
    assert VehicleState.from_list(v.to_list()) == v


def test_adjacent_and_opposite_layout():
    import numpy as np
    spec = adjacent_and_opposite(np.random.default_rng(0))
    spec.validate()
    opposite, adjacent = spec.npcs
    assert spec.map.locate(opposite.waypoints[0].x, opposite.waypoints[0].y)[0].id == "w_in"
    assert spec.map.locate(adjacent.waypoints[0].x, adjacent.waypoints[0].y)[0].id == "e_out"
