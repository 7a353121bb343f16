"""Deterministic discrete-time 2D traffic simulator.

Vehicles follow a kinematic bicycle model. NPCs chase their waypoints with
pure pursuit and never try to avoid anyone; the ego is driven by an
`EgoPlanner`. A run ends on the first collision, on arrival within
`ARRIVAL_THRESHOLD` of the destination, or after `t_max`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .geometry import angle_diff, box_corners, contact_point, convex_distance
from .planner import EgoPlanner
from .scenario import SCHEMA_VERSION, MapSpec, NpcSpec, ScenarioSpec, VehicleState, check_schema

ARRIVAL_THRESHOLD = 1.0
LANE_CROSS_MEMORY = 20
NPC_WHEELBASE = 2.7
NPC_MAX_STEER = 0.6
NPC_ACCEL_LIMITS = (-6.0, 3.0)
NPC_SPEED_GAIN = 1.0


def step_kinematics(state: VehicleState, cmd: tuple[float, float], dt: float,
                    wheelbase: float = 2.7) -> VehicleState:
    """Advance one step of the kinematic bicycle model.

    Speed is clamped at zero (no reversing). Position and heading are
    integrated with the midpoint speed; `accel` of the new state is the
    acceleration actually realized after the clamp.
    """
    accel, steer = cmd
    v_new = max(0.0, state.speed + accel * dt)
    v_mid = 0.5 * (state.speed + v_new)
    yaw_rate = v_mid / wheelbase * math.tan(steer)
    h_mid = state.heading + 0.5 * yaw_rate * dt
    x = state.x + v_mid * dt * math.cos(h_mid)
    y = state.y + v_mid * dt * math.sin(h_mid)
    return VehicleState(x, y, state.heading + yaw_rate * dt, v_new, (v_new - state.speed) / dt,
                        state.length, state.width)


def corners(v: VehicleState) -> np.ndarray:
    return box_corners(v.x, v.y, v.heading, v.length, v.width)


def min_bb_distance(a: VehicleState, b: VehicleState) -> float:
    """Shortest distance between two vehicles' bounding boxes (0 when they overlap)."""
    return convex_distance(corners(a), corners(b))


def attribute_fault(ego: VehicleState, npc: VehicleState, ego_crossed_lane: bool) -> tuple[int, int]:
    """Blame a collision on the ego (1, 0) or on the NPC (0, 1).

    The ego is at fault if it crossed a lane boundary recently, or if it hit
    the NPC with its front half while driving faster than the NPC.
    """
    if ego_crossed_lane:
        return 1, 0
    cx, cy = contact_point(corners(ego), corners(npc))
    forward = (cx - ego.x) * math.cos(ego.heading) + (cy - ego.y) * math.sin(ego.heading)
    if forward > 0.0 and ego.speed > npc.speed:
        return 1, 0
    return 0, 1


class NpcController:
    """Pure pursuit toward the next waypoint plus proportional speed tracking."""

    def __init__(self, spec: NpcSpec, m: MapSpec):
        self.wps = spec.waypoints
        self.target = 1
        self.spec = spec
        self._map = m

    def initial_state(self) -> VehicleState:
        w0, w1 = self.wps[0], self.wps[1]
        if math.hypot(w1.x - w0.x, w1.y - w0.y) > 1e-6:
            heading = math.atan2(w1.y - w0.y, w1.x - w0.x)
        else:
            lane, s, _ = self._map.locate(w0.x, w0.y)
            heading = lane.path.heading_at(s)
        return VehicleState(w0.x, w0.y, heading, w0.speed, 0.0, self.spec.length, self.spec.width)

    def command(self, v: VehicleState) -> tuple[float, float]:
        wps = self.wps
        # skip waypoints that are reached or already behind us
        while self.target < len(wps):
            w = wps[self.target]
            p = wps[self.target - 1]
            dist = math.hypot(w.x - v.x, w.y - v.y)
            sx, sy = w.x - p.x, w.y - p.y
            behind = (w.x - v.x) * sx + (w.y - v.y) * sy < 0.0
            if dist < 2.5 or behind:
                self.target += 1
            else:
                break
        if self.target >= len(wps):
            v_target = wps[-1].speed
            steer = 0.0
        else:
            w = wps[self.target]
            p = wps[self.target - 1]
            seg = math.hypot(w.x - p.x, w.y - p.y)
            dist = math.hypot(w.x - v.x, w.y - v.y)
            frac = 0.0 if seg < 1e-9 else min(1.0, max(0.0, 1.0 - dist / seg))
            v_target = p.speed + frac * (w.speed - p.speed)
            alpha = angle_diff(math.atan2(w.y - v.y, w.x - v.x), v.heading)
            steer = math.atan2(2.0 * NPC_WHEELBASE * math.sin(alpha), max(dist, 1.0))
            steer = max(-NPC_MAX_STEER, min(NPC_MAX_STEER, steer))
        accel = NPC_SPEED_GAIN * (v_target - v.speed)
        accel = max(NPC_ACCEL_LIMITS[0], min(NPC_ACCEL_LIMITS[1], accel))
        return accel, steer


@dataclass
class Trace:
    """Observation of one execution: one row per recorded time instant.

    `ego` has shape (T, 7) and `npcs` (T, K, 7) with columns
    x, y, heading, speed, accel, length, width. `fault` holds (f_e, f_n)
    per step and is non-zero only on the collision step, which is always
    the last one.
    """

    dt: float
    time: np.ndarray
    ego: np.ndarray
    npcs: np.ndarray
    collision: np.ndarray
    fault: np.ndarray
    min_distance: np.ndarray
    destination: tuple[float, float]
    outcome: str
    collided_npc: Optional[int] = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.time)

    @property
    def n_npcs(self) -> int:
        return self.npcs.shape[1]

    def ego_state(self, t: int) -> VehicleState:
        return VehicleState.from_list(self.ego[t])

    def npc_states(self, t: int) -> list[VehicleState]:
        return [VehicleState.from_list(r) for r in self.npcs[t]]

    @property
    def final_position(self) -> tuple[float, float]:
        return float(self.ego[-1, 0]), float(self.ego[-1, 1])

    @property
    def min_bb_distance(self) -> float:
        return float(self.min_distance[-1])

    @property
    def collided(self) -> bool:
        return bool(self.collision[-1])

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "dt": self.dt,
            "destination": list(self.destination),
            "outcome": self.outcome,
            "collided_npc": self.collided_npc,
            "time": self.time.tolist(),
            "ego": self.ego.tolist(),
            "npcs": self.npcs.tolist(),
            "collision": self.collision.astype(int).tolist(),
            "fault": self.fault.tolist(),
            "min_distance": self.min_distance.tolist(),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Trace":
        check_schema(d, "trace")
        n = len(d["time"])
        npcs = np.asarray(d["npcs"], dtype=float)
        if npcs.size == 0:
            npcs = npcs.reshape(n, 0, 7)
        return cls(
            dt=float(d["dt"]),
            time=np.asarray(d["time"], dtype=float),
            ego=np.asarray(d["ego"], dtype=float).reshape(n, 7),
            npcs=npcs,
            collision=np.asarray(d["collision"], dtype=bool),
            fault=np.asarray(d["fault"], dtype=int).reshape(n, 2),
            min_distance=np.asarray(d["min_distance"], dtype=float),
            destination=(float(d["destination"][0]), float(d["destination"][1])),
            outcome=str(d["outcome"]),
            collided_npc=d.get("collided_npc"),
            meta=dict(d.get("meta", {})),
        )


def _circumradius(v: VehicleState) -> float:
    return 0.5 * math.hypot(v.length, v.width)


def _occupied_lane(m: MapSpec, lane_id: str, x: float, y: float) -> str:
    lane = m.lane(lane_id)
    best = (abs(lane.path.project((x, y))[1]), lane.id)
    for other in (lane.left, lane.right):
        if other is not None:
            d = abs(m.lane(other).path.project((x, y))[1])
            if d < best[0]:
                best = (d, other)
    return best[1]


def simulate(spec: ScenarioSpec, planner: Optional[EgoPlanner] = None) -> Trace:
    """Execute a scenario and return its observation trace."""
    spec.validate()
    planner = planner or EgoPlanner()
    dt = spec.dt
    m = spec.map
    e = spec.ego
    ego = VehicleState(e.x, e.y, e.heading, e.speed, 0.0, e.length, e.width)
    ctrls = [NpcController(n, m) for n in spec.npcs]
    npcs = [c.initial_state() for c in ctrls]
    pstate = planner.start(spec)
    n_max = max(1, int(round(spec.t_max / dt)))
    dest = e.destination

    rows_ego: list[list[float]] = []
    rows_npc: list[list[list[float]]] = []
    times: list[float] = []
    coll: list[bool] = []
    faults: list[tuple[int, int]] = []
    mins: list[float] = []
    run_min = math.inf
    outcome = "timeout"
    collided_npc = None
    occupied = _occupied_lane(m, pstate.lane, ego.x, ego.y)
    crossings: list[int] = []

    def record(k: int, hit: Optional[int], fault: tuple[int, int]):
        nonlocal run_min
        ego_c = corners(ego)
        r_e = _circumradius(ego)
        for n in npcs:
            # exact distance only matters when it can lower the running minimum
            lower = math.hypot(n.x - ego.x, n.y - ego.y) - r_e - _circumradius(n)
            if lower < run_min:
                run_min = min(run_min, convex_distance(ego_c, corners(n)))
        times.append(round(k * dt, 10))
        rows_ego.append(ego.to_list())
        rows_npc.append([n.to_list() for n in npcs])
        coll.append(hit is not None)
        faults.append(fault)
        mins.append(run_min)

    def check_collision() -> Optional[int]:
        ego_c = corners(ego)
        r_e = _circumradius(ego)
        for i, n in enumerate(npcs):
            if math.hypot(n.x - ego.x, n.y - ego.y) > r_e + _circumradius(n):
                continue
            if convex_distance(ego_c, corners(n)) <= 0.0:
                return i
        return None

    hit = check_collision()
    if hit is not None:
        record(0, hit, attribute_fault(ego, npcs[hit], False))
        outcome, collided_npc = "collision", hit
    else:
        record(0, None, (0, 0))
        if math.dist((ego.x, ego.y), dest) <= ARRIVAL_THRESHOLD:
            outcome = "arrival"

    k = 0
    while outcome == "timeout" and k + 1 < n_max:
        k += 1
        cmd = planner.plan(ego, npcs, spec, pstate)
        new_npcs = [step_kinematics(n, c.command(n), dt, NPC_WHEELBASE) for n, c in zip(npcs, ctrls)]
        ego = step_kinematics(ego, cmd, dt, planner.config.wheelbase)
        npcs = new_npcs

        lane_now = _occupied_lane(m, pstate.lane, ego.x, ego.y)
        if lane_now != occupied:
            prev = m.lane(occupied)
            if lane_now in (prev.left, prev.right):
                crossings.append(k)
            occupied = lane_now
        crossed = bool(crossings and k - crossings[-1] < LANE_CROSS_MEMORY) or pstate.lane_change_active

        hit = check_collision()
        if hit is not None:
            record(k, hit, attribute_fault(ego, npcs[hit], crossed))
            outcome, collided_npc = "collision", hit
            break
        record(k, None, (0, 0))
        if math.dist((ego.x, ego.y), dest) <= ARRIVAL_THRESHOLD:
            outcome = "arrival"

    n_npc = len(npcs)
    return Trace(
        dt=dt,
        time=np.asarray(times, dtype=float),
        ego=np.asarray(rows_ego, dtype=float),
        npcs=np.asarray(rows_npc, dtype=float).reshape(len(times), n_npc, 7),
        collision=np.asarray(coll, dtype=bool),
        fault=np.asarray(faults, dtype=int).reshape(len(times), 2),
        min_distance=np.asarray(mins, dtype=float),
        destination=(float(dest[0]), float(dest[1])),
        outcome=outcome,
        collided_npc=collided_npc,
    )


__all__ = ["ARRIVAL_THRESHOLD", "LANE_CROSS_MEMORY", "Trace", "simulate", "step_kinematics",
           "min_bb_distance", "attribute_fault", "NpcController", "corners"]
