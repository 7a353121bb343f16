"""Seeded generators for the four functional scenario archetypes."""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .geometry import Polyline
from .maps import four_way_intersection, one_way_road, two_way_road
from .scenario import EgoSpec, MapSpec, NpcSpec, ScenarioSpec, Waypoint

ARCHETYPES = ("lane-follow", "lane-change", "intersection-straight", "intersection-left")

_MAPS: dict[str, MapSpec] = {}


def _map(name: str) -> MapSpec:
    # maps are immutable; sharing one instance keeps the lane geometry caches warm
    if name not in _MAPS:
        _MAPS[name] = {"two_way_road": two_way_road, "one_way_road": one_way_road,
                       "four_way_intersection": four_way_intersection}[name]()
    return _MAPS[name]


def _path_of(m: MapSpec, lane_ids: Sequence[str]) -> Polyline:
    pts: list[tuple[float, float]] = []
    for lid in lane_ids:
        for p in m.lane(lid).centerline:
            if not pts or math.dist(p, pts[-1]) > 1e-6:
                pts.append(p)
    return Polyline(pts)


def _npc_along(m: MapSpec, lane_ids: Sequence[str], s0: float, spacing: float, count: int,
               speeds: Sequence[float]) -> NpcSpec:
    path = _path_of(m, lane_ids)
    wps = []
    for i in range(count):
        s = min(s0 + i * spacing, path.length - 0.5)
        x, y = path.point_at(s)
        wps.append(Waypoint(round(x, 6), round(y, 6), round(float(speeds[i]), 6)))
    # drop duplicates that the clamp at the lane end can create
    out = [wps[0]]
    for w in wps[1:]:
        if math.hypot(w.x - out[-1].x, w.y - out[-1].y) > 1.0:
            out.append(w)
    if len(out) < 2:
        x, y = path.point_at(max(0.0, s0 - spacing))
        out.insert(0, Waypoint(round(x, 6), round(y, 6), out[0].speed))
    return NpcSpec(tuple(out))


def _speeds(rng: np.random.Generator, lo: float, hi: float, n: int) -> list[float]:
    base = rng.uniform(lo, hi)
    return [float(np.clip(base + rng.uniform(-1.0, 1.0), 0.0, hi + 1.0)) for _ in range(n)]


def lane_follow(rng: np.random.Generator) -> ScenarioSpec:
    """Ego follows the inner eastbound lane of a two-way four-lane road."""
    m = _map("two_way_road")
    ego = EgoSpec(20.0, -1.75, 0.0, (170.0, -1.75), ("e_in",), speed=8.0)
    npcs = (
        _npc_along(m, ["e_in"], rng.uniform(55.0, 80.0), 30.0, 6, _speeds(rng, 7.0, 10.0, 6)),
        _npc_along(m, ["e_out"], rng.uniform(25.0, 60.0), 30.0, 6, _speeds(rng, 6.0, 11.0, 6)),
        _npc_along(m, ["w_in"], rng.uniform(70.0, 160.0), 30.0, 6, _speeds(rng, 6.0, 11.0, 6)),
    )
    return ScenarioSpec(m, ego, npcs, t_max=35.0, dt=0.1, archetype="lane-follow")


def lane_change(rng: np.random.Generator) -> ScenarioSpec:
    """Ego moves from lane l1 to lane l2 of a one-way four-lane road."""
    m = _map("one_way_road")
    ego = EgoSpec(20.0, -5.25, 0.0, (170.0, -8.75), ("l1", "l2"), speed=8.0)
    npcs = (
        _npc_along(m, ["l2"], rng.uniform(40.0, 70.0), 30.0, 6, _speeds(rng, 7.0, 11.0, 6)),
        _npc_along(m, ["l1"], rng.uniform(60.0, 90.0), 30.0, 6, _speeds(rng, 8.0, 11.0, 6)),
        _npc_along(m, ["l2"], rng.uniform(0.0, 10.0), 30.0, 6, _speeds(rng, 6.0, 9.0, 6)),
        _npc_along(m, ["l3"], rng.uniform(20.0, 60.0), 30.0, 6, _speeds(rng, 6.0, 11.0, 6)),
    )
    return ScenarioSpec(m, ego, npcs, t_max=35.0, dt=0.1, archetype="lane-change")


def _junction_npc(m: MapSpec, lanes: Sequence[str], rng, s_lo, s_hi, v_lo, v_hi) -> NpcSpec:
    return _npc_along(m, lanes, rng.uniform(s_lo, s_hi), 12.0, 12, _speeds(rng, v_lo, v_hi, 12))


def intersection_straight(rng: np.random.Generator) -> ScenarioSpec:
    """Ego crosses an unsignalized intersection heading north."""
    m = _map("four_way_intersection")
    ego = EgoSpec(1.75, -60.0, 0.5 * math.pi, (1.75, 50.0), ("s_in", "s>n", "n_out"), speed=6.0)
    npcs = (
        _junction_npc(m, ["w_in", "w>e", "e_out"], rng, 20.0, 60.0, 5.0, 9.0),
        _junction_npc(m, ["e_in", "e>w", "w_out"], rng, 20.0, 60.0, 5.0, 9.0),
        _junction_npc(m, ["n_in", "n>s", "s_out"], rng, 30.0, 70.0, 5.0, 9.0),
    )
    return ScenarioSpec(m, ego, npcs, t_max=35.0, dt=0.1, archetype="intersection-straight")


def intersection_left(rng: np.random.Generator) -> ScenarioSpec:
    """Ego turns left at an unsignalized intersection."""
    m = _map("four_way_intersection")
    ego = EgoSpec(1.75, -60.0, 0.5 * math.pi, (-50.0, 1.75), ("s_in", "s>w", "w_out"), speed=6.0)
    npcs = (
        _junction_npc(m, ["n_in", "n>s", "s_out"], rng, 30.0, 70.0, 5.0, 9.0),
        _junction_npc(m, ["e_in", "e>w", "w_out"], rng, 20.0, 60.0, 5.0, 9.0),
        _junction_npc(m, ["w_in", "w>e", "e_out"], rng, 20.0, 60.0, 5.0, 9.0),
    )
    return ScenarioSpec(m, ego, npcs, t_max=35.0, dt=0.1, archetype="intersection-left")


def adjacent_and_opposite(rng: np.random.Generator) -> ScenarioSpec:
    """Two NPCs: one in the adjacent same-direction lane that cuts in ahead of
    the ego and slows down, one driving past in the opposite lane."""
    m = _map("two_way_road")
    ego = EgoSpec(20.0, -1.75, 0.0, (200.0, -1.75), ("e_in",), speed=8.0)
    x0 = rng.uniform(28.0, 36.0)
    v = rng.uniform(13.0, 14.5)
    cut = x0 + rng.uniform(50.0, 65.0)
    slow = rng.uniform(3.0, 5.0)
    adjacent = NpcSpec((
        Waypoint(round(x0, 6), -5.25, round(v, 6)),
        Waypoint(round(cut - 15.0, 6), -5.25, round(v, 6)),
        Waypoint(round(cut, 6), -1.75, round(v, 6)),
        Waypoint(round(cut + 25.0, 6), -1.75, round(slow, 6)),
        Waypoint(round(cut + 60.0, 6), -1.75, round(slow, 6)),
        Waypoint(round(cut + 120.0, 6), -1.75, round(v, 6)),
    ))
    opposite = _npc_along(m, ["w_in"], rng.uniform(20.0, 60.0), 40.0, 6, _speeds(rng, 8.0, 11.0, 6))
    return ScenarioSpec(m, ego, (opposite, adjacent), t_max=30.0, dt=0.1, archetype="adjacent-opposite")


GENERATORS = {
    "lane-follow": lane_follow,
    "lane-change": lane_change,
    "intersection-straight": intersection_straight,
    "intersection-left": intersection_left,
}


def generate(archetype: str, seed: int, count: int = 1) -> list[ScenarioSpec]:
    """`count` reproducible scenarios of the given archetype."""
    try:
        gen = GENERATORS[archetype]
    except KeyError:
        raise ValueError(f"unknown archetype {archetype!r}; choose from {', '.join(ARCHETYPES)}") from None
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        spec = gen(rng)
        spec.validate()
        out.append(spec)
    return out
