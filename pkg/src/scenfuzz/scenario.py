"""Scenario genotype: road map, ego task and NPC waypoint plans.

Everything here round-trips through plain JSON dicts (SI units throughout).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Optional

from .geometry import Polyline, wrap_angle

SCHEMA_VERSION = 1

DEFAULT_LENGTH = 4.5
DEFAULT_WIDTH = 2.0
V_MAX = 25.0
# slack allowed outside a lane edge when deciding whether a point is on the road
ON_MAP_TOLERANCE = 0.25


class InvalidScenarioError(ValueError):
    pass


class SchemaVersionError(ValueError):
    pass


def check_schema(d: dict, kind: str) -> None:
    if not isinstance(d, dict):
        raise InvalidScenarioError(f"{kind}: expected a JSON object")
    version = d.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(f"{kind}: schema_version {version!r} != {SCHEMA_VERSION}")


@dataclass(frozen=True)
class Lane:
    id: str
    centerline: tuple[tuple[float, float], ...]
    width: float = 3.5
    direction: str = ""
    left: Optional[str] = None
    right: Optional[str] = None
    left_same_direction: bool = True
    right_same_direction: bool = True
    successors: tuple[str, ...] = ()

    @cached_property
    def path(self) -> Polyline:
        return Polyline(self.centerline)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "centerline": [list(p) for p in self.centerline],
            "width": self.width,
            "direction": self.direction,
            "left": self.left,
            "right": self.right,
            "left_same_direction": self.left_same_direction,
            "right_same_direction": self.right_same_direction,
            "successors": list(self.successors),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Lane":
        return cls(
            id=str(d["id"]),
            centerline=tuple((float(x), float(y)) for x, y in d["centerline"]),
            width=float(d.get("width", 3.5)),
            direction=str(d.get("direction", "")),
            left=d.get("left"),
            right=d.get("right"),
            left_same_direction=bool(d.get("left_same_direction", True)),
            right_same_direction=bool(d.get("right_same_direction", True)),
            successors=tuple(d.get("successors", ())),
        )


@dataclass(frozen=True)
class Junction:
    """Axis-aligned conflict area (an unsignalized intersection box)."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def contains(self, x: float, y: float, margin: float = 0.0) -> bool:
        return (self.xmin - margin <= x <= self.xmax + margin
                and self.ymin - margin <= y <= self.ymax + margin)

    def to_dict(self) -> dict:
        return {"xmin": self.xmin, "ymin": self.ymin, "xmax": self.xmax, "ymax": self.ymax}

    @classmethod
    def from_dict(cls, d: dict) -> "Junction":
        return cls(float(d["xmin"]), float(d["ymin"]), float(d["xmax"]), float(d["ymax"]))


@dataclass(frozen=True)
class MapSpec:
    name: str
    lanes: tuple[Lane, ...]
    junctions: tuple[Junction, ...] = ()

    @cached_property
    def by_id(self) -> dict[str, Lane]:
        return {lane.id: lane for lane in self.lanes}

    def lane(self, lane_id: str) -> Lane:
        try:
            return self.by_id[lane_id]
        except KeyError:
            raise InvalidScenarioError(f"unknown lane {lane_id!r}") from None

    def validate(self) -> None:
        if not self.lanes:
            raise InvalidScenarioError("map has no lanes")
        if len(self.by_id) != len(self.lanes):
            raise InvalidScenarioError("duplicate lane ids")
        for lane in self.lanes:
            if lane.width <= 0:
                raise InvalidScenarioError(f"lane {lane.id}: width must be > 0")
            if len(lane.centerline) < 2:
                raise InvalidScenarioError(f"lane {lane.id}: centerline needs >= 2 points")
            for side in ("left", "right"):
                other_id = getattr(lane, side)
                if other_id is None:
                    continue
                other = self.lane(other_id)
                same = getattr(lane, f"{side}_same_direction")
                # same-direction neighbours mirror sides, opposing ones share a side
                back_side = ("right" if side == "left" else "left") if same else side
                if getattr(other, back_side) != lane.id:
                    raise InvalidScenarioError(
                        f"adjacency not symmetric: {lane.id}.{side}={other_id}")
                if getattr(other, f"{back_side}_same_direction") != same:
                    raise InvalidScenarioError(
                        f"direction flag mismatch between {lane.id} and {other_id}")
            for succ in lane.successors:
                self.lane(succ)

    def locate(self, x: float, y: float, candidates=None) -> tuple[Lane, float, float]:
        """Nearest lane to a point: (lane, arc length, lateral offset)."""
        best = None
        for lane in (candidates if candidates is not None else self.lanes):
            s, d = lane.path.project((x, y))
            # points projected past a lane end are penalized by the overshoot
            over = max(0.0, -s, s - lane.path.length)
            score = math.hypot(d, over)
            if best is None or score < best[0]:
                best = (score, lane, s, d)
        return best[1], best[2], best[3]

    def on_map(self, x: float, y: float) -> bool:
        for lane in self.lanes:
            s, d = lane.path.project((x, y))
            if -0.5 <= s <= lane.path.length + 0.5 and abs(d) <= 0.5 * lane.width + ON_MAP_TOLERANCE:
                return True
        for j in self.junctions:
            if j.contains(x, y):
                return True
        return False

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "lanes": [lane.to_dict() for lane in self.lanes],
            "junctions": [j.to_dict() for j in self.junctions],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MapSpec":
        check_schema(d, "map")
        return cls(
            name=str(d.get("name", "")),
            lanes=tuple(Lane.from_dict(x) for x in d["lanes"]),
            junctions=tuple(Junction.from_dict(x) for x in d.get("junctions", ())),
        )


@dataclass(frozen=True)
class Waypoint:
    x: float
    y: float
    speed: float

    def to_list(self) -> list[float]:
        return [self.x, self.y, self.speed]


@dataclass(frozen=True)
class NpcSpec:
    waypoints: tuple[Waypoint, ...]
    length: float = DEFAULT_LENGTH
    width: float = DEFAULT_WIDTH

    def to_dict(self) -> dict:
        return {"waypoints": [w.to_list() for w in self.waypoints],
                "length": self.length, "width": self.width}

    @classmethod
    def from_dict(cls, d: dict) -> "NpcSpec":
        return cls(
            waypoints=tuple(Waypoint(float(x), float(y), float(v)) for x, y, v in d["waypoints"]),
            length=float(d.get("length", DEFAULT_LENGTH)),
            width=float(d.get("width", DEFAULT_WIDTH)),
        )


@dataclass(frozen=True)
class EgoSpec:
    x: float
    y: float
    heading: float
    destination: tuple[float, float]
    route: tuple[str, ...]
    speed: float = 0.0
    length: float = DEFAULT_LENGTH
    width: float = DEFAULT_WIDTH

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "heading": self.heading,
                "destination": list(self.destination), "route": list(self.route),
                "speed": self.speed, "length": self.length, "width": self.width}

    @classmethod
    def from_dict(cls, d: dict) -> "EgoSpec":
        return cls(
            x=float(d["x"]), y=float(d["y"]), heading=float(d["heading"]),
            destination=(float(d["destination"][0]), float(d["destination"][1])),
            route=tuple(d["route"]),
            speed=float(d.get("speed", 0.0)),
            length=float(d.get("length", DEFAULT_LENGTH)),
            width=float(d.get("width", DEFAULT_WIDTH)),
        )


@dataclass(frozen=True)
class ScenarioSpec:
    map: MapSpec
    ego: EgoSpec
    npcs: tuple[NpcSpec, ...]
    t_max: float = 30.0
    dt: float = 0.1
    archetype: str = ""

    def validate(self) -> None:
        self.map.validate()
        if self.dt <= 0 or self.t_max <= 0:
            raise InvalidScenarioError("dt and t_max must be positive")
        if not self.npcs:
            raise InvalidScenarioError("scenario needs at least one NPC")
        if not self.ego.route:
            raise InvalidScenarioError("ego route is empty")
        for lane_id in self.ego.route:
            self.map.lane(lane_id)
        if not self.map.on_map(self.ego.x, self.ego.y):
            raise InvalidScenarioError("ego start is off the map")
        if not self.map.on_map(*self.ego.destination):
            raise InvalidScenarioError("ego destination is off the map")
        for k, npc in enumerate(self.npcs):
            if len(npc.waypoints) < 2:
                raise InvalidScenarioError(f"npc {k}: needs >= 2 waypoints")
            if npc.length <= 0 or npc.width <= 0:
                raise InvalidScenarioError(f"npc {k}: extents must be positive")
            for w in npc.waypoints:
                if not 0.0 <= w.speed <= V_MAX:
                    raise InvalidScenarioError(f"npc {k}: waypoint speed {w.speed} outside [0, {V_MAX}]")
                if not self.map.on_map(w.x, w.y):
                    raise InvalidScenarioError(f"npc {k}: waypoint ({w.x:.2f}, {w.y:.2f}) is off the map")

    def with_npcs(self, npcs) -> "ScenarioSpec":
        return replace(self, npcs=tuple(npcs))

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "archetype": self.archetype,
            "t_max": self.t_max,
            "dt": self.dt,
            "map": self.map.to_dict(),
            "ego": self.ego.to_dict(),
            "npcs": [n.to_dict() for n in self.npcs],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        check_schema(d, "scenario")
        try:
            return cls(
                map=MapSpec.from_dict(d["map"]),
                ego=EgoSpec.from_dict(d["ego"]),
                npcs=tuple(NpcSpec.from_dict(n) for n in d["npcs"]),
                t_max=float(d.get("t_max", 30.0)),
                dt=float(d.get("dt", 0.1)),
                archetype=str(d.get("archetype", "")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SchemaVersionError):
                raise
            raise InvalidScenarioError(f"malformed scenario: {exc}") from exc


@dataclass(frozen=True)
class VehicleState:
    x: float
    y: float
    heading: float
    speed: float
    accel: float = 0.0
    length: float = DEFAULT_LENGTH
    width: float = DEFAULT_WIDTH

    def __post_init__(self):
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    def to_list(self) -> list[float]:
        return [self.x, self.y, self.heading, self.speed, self.accel, self.length, self.width]

    @classmethod
    def from_list(cls, v) -> "VehicleState":
        x, y, h, sp, a, ln, w = (float(t) for t in v)
        return cls(x, y, h, sp, a, ln, w)


__all__ = [
    "SCHEMA_VERSION", "V_MAX", "InvalidScenarioError", "SchemaVersionError", "Lane", "Junction",
    "MapSpec", "Waypoint", "NpcSpec", "EgoSpec", "ScenarioSpec", "VehicleState",
]
