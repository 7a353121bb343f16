"""Built-in road layouts for the four functional scenario archetypes."""
from __future__ import annotations

import math

import numpy as np

from .scenario import Junction, Lane, MapSpec

LANE_WIDTH = 3.5


def _straight(x0: float, x1: float, y: float) -> tuple[tuple[float, float], ...]:
    return ((x0, y), (x1, y))


def two_way_road(length: float = 300.0) -> MapSpec:
    """Straight road, two lanes each way. Eastbound lanes at y<0 (right-hand traffic)."""
    w = LANE_WIDTH
    lanes = (
        Lane("e_in", _straight(0.0, length, -0.5 * w), w, "east",
             left="w_in", right="e_out", left_same_direction=False),
        Lane("e_out", _straight(0.0, length, -1.5 * w), w, "east", left="e_in"),
        Lane("w_in", _straight(length, 0.0, 0.5 * w), w, "west",
             left="e_in", right="w_out", left_same_direction=False),
        Lane("w_out", _straight(length, 0.0, 1.5 * w), w, "west", left="w_in"),
    )
    return MapSpec("two_way_road", lanes)


def one_way_road(n_lanes: int = 4, length: float = 300.0) -> MapSpec:
    """Straight one-way road; lane l0 is the leftmost, all eastbound."""
    w = LANE_WIDTH
    lanes = []
    for i in range(n_lanes):
        lanes.append(Lane(
            f"l{i}", _straight(0.0, length, -(i + 0.5) * w), w, "east",
            left=f"l{i - 1}" if i > 0 else None,
            right=f"l{i + 1}" if i < n_lanes - 1 else None,
        ))
    return MapSpec("one_way_road", tuple(lanes))


def _rot(p, quarter_turns: int):
    x, y = p
    for _ in range(quarter_turns % 4):
        x, y = -y, x
    return (round(x, 9) + 0.0, round(y, 9) + 0.0)


def _arc(cx, cy, r, a0, a1, n=8):
    return [(cx + r * math.cos(a), cy + r * math.sin(a)) for a in np.linspace(a0, a1, n)]


def four_way_intersection(arm: float = 100.0) -> MapSpec:
    """Unsignalized cross intersection centered at the origin, one lane per direction.

    Arms are named by compass side (s, e, n, w); `<side>_in` approaches the
    junction, `<side>_out` leaves it. Connector lanes are named
    `<from>><to>`.
    """
    w = LANE_WIDTH
    h = w  # junction half-size: one lane each way
    sides = ["s", "e", "n", "w"]  # each is the previous rotated 90 deg counter-clockwise

    # south arm, then rotated for the others
    base_in = [(0.5 * w, -arm), (0.5 * w, -h)]
    base_out = [(-0.5 * w, -h), (-0.5 * w, -arm)]
    straight = [(0.5 * w, -h), (0.5 * w, h)]
    left = _arc(-h, -h, h + 0.5 * w, 0.0, 0.5 * math.pi)
    right = _arc(h, -h, h - 0.5 * w, math.pi, 0.5 * math.pi, n=5)

    lanes = []
    for q, side in enumerate(sides):
        opp = sides[(q + 2) % 4]
        to_left = sides[(q + 3) % 4]
        to_right = sides[(q + 1) % 4]
        lanes.append(Lane(
            f"{side}_in", tuple(_rot(p, q) for p in base_in), w, f"{side}_in",
            left=f"{side}_out", left_same_direction=False,
            successors=(f"{side}>{opp}", f"{side}>{to_left}", f"{side}>{to_right}"),
        ))
        lanes.append(Lane(
            f"{side}_out", tuple(_rot(p, q) for p in base_out), w, f"{side}_out",
            left=f"{side}_in", left_same_direction=False,
        ))
        for name, pts, dest in ((opp, straight, opp), (to_left, left, to_left), (to_right, right, to_right)):
            lanes.append(Lane(
                f"{side}>{name}", tuple(_rot(p, q) for p in pts), w, "connector",
                successors=(f"{dest}_out",),
            ))
    return MapSpec("four_way_intersection", tuple(lanes), (Junction(-h, -h, h, h),))
