"""Rule-based ego driving policy: IDM car following, gap-acceptance lane
changes, pure-pursuit lane keeping and a yield rule at junctions.

The policy only looks at NPCs inside its lookahead radius, so distant
traffic has no influence on the commands it produces.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Optional, Sequence

from .geometry import Polyline, angle_diff
from .scenario import Lane, MapSpec, ScenarioSpec, VehicleState


@dataclass(frozen=True)
class PlannerConfig:
    desired_speed: float = 12.0
    time_headway: float = 1.5
    min_gap: float = 2.0
    max_accel: float = 2.0
    comfort_decel: float = 3.0
    max_decel: float = 6.0
    lookahead: float = 50.0
    lane_change_trigger_gap: float = 25.0
    lane_change_front_gap: float = 12.0
    lane_change_rear_gap: float = 10.0
    lane_change_cooldown: float = 3.0
    steer_lookahead_time: float = 1.0
    steer_lookahead_min: float = 6.0
    wheelbase: float = 2.7
    max_steer: float = 0.5
    junction_horizon: float = 35.0
    yield_time: float = 4.0

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ValueError(f"planner config: {f.name} must be positive")
        if self.comfort_decel > self.max_decel:
            raise ValueError("planner config: comfort_decel must not exceed max_decel")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Optional[dict]) -> "PlannerConfig":
        d = dict(d or {})
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"planner config: unknown fields {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in d.items()})


@dataclass
class PlannerState:
    """Mutable bits the policy carries from one step to the next."""

    lane: str
    route_index: int = 0
    last_change_time: float = -1e9
    time: float = 0.0
    lane_change_active: bool = False
    _path_key: tuple = ()
    _path: Optional[Polyline] = None
    _junction_spans: tuple = ()


def idm_accel(v: float, v_lead: Optional[float], gap: Optional[float], cfg: PlannerConfig,
              min_gap: Optional[float] = None) -> float:
    """Intelligent-driver-model acceleration. gap=None means free road."""
    free = cfg.max_accel * (1.0 - (v / cfg.desired_speed) ** 4)
    if gap is None:
        return free
    s0 = cfg.min_gap if min_gap is None else min_gap
    dv = v - v_lead
    s_star = s0 + max(0.0, v * cfg.time_headway + v * dv / (2.0 * math.sqrt(cfg.max_accel * cfg.comfort_decel)))
    gap = max(gap, 0.05)
    return free - cfg.max_accel * (s_star / gap) ** 2


class EgoPlanner:
    """Deterministic stand-in for the driving system under test."""

    def __init__(self, config: Optional[PlannerConfig] = None):
        self.config = config or PlannerConfig()

    def start(self, spec: ScenarioSpec) -> PlannerState:
        lane, _, _ = spec.map.locate(spec.ego.x, spec.ego.y,
                                     [spec.map.lane(i) for i in spec.ego.route])
        return PlannerState(lane=lane.id, route_index=spec.ego.route.index(lane.id))

    # -- path bookkeeping -------------------------------------------------

    def _lane_sequence(self, m: MapSpec, route: Sequence[str], st: PlannerState) -> list[Lane]:
        seq = [m.lane(st.lane)]
        for _ in range(3):
            cur = seq[-1]
            if not cur.successors:
                break
            nxt = None
            if cur.id in route:
                i = route.index(cur.id)
                if i + 1 < len(route) and route[i + 1] in cur.successors:
                    nxt = route[i + 1]
            seq.append(m.lane(nxt or cur.successors[0]))
        return seq

    def _path(self, m: MapSpec, route: Sequence[str], st: PlannerState) -> Polyline:
        seq = self._lane_sequence(m, route, st)
        key = tuple(l.id for l in seq)
        if key != st._path_key:
            pts = list(seq[0].centerline)
            for lane in seq[1:]:
                for p in lane.centerline:
                    if math.dist(p, pts[-1]) > 1e-6:
                        pts.append(p)
            st._path_key = key
            st._path = Polyline(pts)
            spans = []
            for j in m.junctions:
                inside = [s for s in _sample_s(st._path) if j.contains(*st._path.point_at(s))]
                if inside:
                    spans.append((j, min(inside), max(inside)))
            st._junction_spans = tuple(spans)
        return st._path

    def _advance_lane(self, ego: VehicleState, m: MapSpec, route: Sequence[str], st: PlannerState) -> None:
        lane = m.lane(st.lane)
        s, _ = lane.path.project((ego.x, ego.y))
        if s > lane.path.length and lane.successors:
            seq = self._lane_sequence(m, route, st)
            if len(seq) > 1:
                st.lane = seq[1].id
                if st.lane in route:
                    st.route_index = route.index(st.lane)

    # -- perception helpers ----------------------------------------------

    @staticmethod
    def _corridor_hits(path: Polyline, half_width: float, ego: VehicleState, npcs, horizon: float):
        """NPCs overlapping a lane corridor: list of (ds, gap, speed_along, npc)."""
        s_e, _ = path.project((ego.x, ego.y))
        out = []
        for n in npcs:
            if math.hypot(n.x - ego.x, n.y - ego.y) > horizon:
                continue
            s_n, d_n = path.project((n.x, n.y))
            if abs(d_n) >= half_width + 0.5 * n.width - 0.3:
                continue
            ds = s_n - s_e
            gap = abs(ds) - 0.5 * (ego.length + n.length)
            along = n.speed * math.cos(angle_diff(n.heading, path.heading_at(s_n)))
            out.append((ds, gap, along, n))
        return out

    def _lead(self, path, half_width, ego, npcs):
        cfg = self.config
        best = None
        for ds, gap, along, n in self._corridor_hits(path, half_width, ego, npcs, cfg.lookahead):
            if ds <= 0.0 or ds > cfg.lookahead:
                continue
            if best is None or gap < best[0]:
                best = (gap, max(0.0, along))
        return best

    def _gaps_ok(self, lane: Lane, ego: VehicleState, npcs) -> bool:
        cfg = self.config
        for ds, gap, along, n in self._corridor_hits(lane.path, 0.5 * lane.width, ego, npcs, cfg.lookahead):
            if ds >= 0.0:
                if gap < cfg.lane_change_front_gap:
                    return False
            else:
                closing = max(0.0, along - ego.speed)
                if gap < cfg.lane_change_rear_gap + cfg.time_headway * closing:
                    return False
        return True

    # -- main policy ------------------------------------------------------

    def plan(self, ego: VehicleState, npcs: Sequence[VehicleState], spec: ScenarioSpec,
             st: PlannerState) -> tuple[float, float]:
        cfg = self.config
        m = spec.map
        route = spec.ego.route
        self._advance_lane(ego, m, route, st)
        lane = m.lane(st.lane)
        path = self._path(m, route, st)
        half = 0.5 * lane.width
        s_e, d_e = path.project((ego.x, ego.y))
        if st.lane_change_active and abs(d_e) < 0.5:
            st.lane_change_active = False

        lead = self._lead(path, half, ego, npcs)
        # no overtaking once the goal is close: the ego must end in the route lane
        near_goal = math.dist((ego.x, ego.y), spec.ego.destination) < cfg.lookahead + 30.0
        self._maybe_change_lane(ego, npcs, m, route, st, None if near_goal else lead, lane)
        if m.lane(st.lane) is not lane:
            lane = m.lane(st.lane)
            path = self._path(m, route, st)
            half = 0.5 * lane.width
            s_e, d_e = path.project((ego.x, ego.y))
            lead = self._lead(path, half, ego, npcs)

        accels = [idm_accel(ego.speed, None, None, cfg)]
        if lead is not None:
            accels.append(idm_accel(ego.speed, lead[1], lead[0], cfg))

        # stop at the destination once it is in range
        s_d, d_d = path.project(spec.ego.destination)
        if 0.0 < s_d - s_e <= cfg.lookahead:
            if abs(d_d) < half:
                accels.append(idm_accel(ego.speed, 0.0, s_d - s_e, cfg, min_gap=0.0))
            elif abs(d_d) < 3.0 * half:
                # wrong lane near the goal: hold short of it until the merge is possible
                accels.append(idm_accel(ego.speed, 0.0, s_d - s_e - 15.0, cfg, min_gap=0.0))

        stop = self._junction_stop(ego, npcs, path, s_e, half, st)
        if stop is not None:
            accels.append(idm_accel(ego.speed, 0.0, stop, cfg, min_gap=0.0))

        accel = min(accels)
        accel = max(-cfg.max_decel, min(cfg.max_accel, accel))

        ld = max(cfg.steer_lookahead_min, cfg.steer_lookahead_time * ego.speed)
        tx, ty = path.point_at(s_e + ld)
        alpha = angle_diff(math.atan2(ty - ego.y, tx - ego.x), ego.heading)
        steer = math.atan2(2.0 * cfg.wheelbase * math.sin(alpha), ld)
        steer = max(-cfg.max_steer, min(cfg.max_steer, steer))
        st.time += spec.dt
        return accel, steer

    def _maybe_change_lane(self, ego, npcs, m: MapSpec, route, st: PlannerState, lead, lane: Lane) -> None:
        cfg = self.config
        if st.time - st.last_change_time < cfg.lane_change_cooldown:
            return
        neighbours = {}
        if lane.left and lane.left_same_direction:
            neighbours[lane.left] = m.lane(lane.left)
        if lane.right and lane.right_same_direction:
            neighbours[lane.right] = m.lane(lane.right)
        if not neighbours:
            return

        target = None
        nxt = route[st.route_index + 1] if st.route_index + 1 < len(route) else None
        if lane.id in route and nxt in neighbours:
            target = nxt  # route asks for a lateral move
        elif lane.id not in route:
            back = [r for r in route if r in neighbours]
            if back:
                target = back[0]
        if target is None and lead is not None:
            gap, v_lead = lead
            if gap < cfg.lane_change_trigger_gap and v_lead < 0.8 * cfg.desired_speed:
                for cand in (lane.left, lane.right):
                    if cand not in neighbours:
                        continue
                    c = neighbours[cand]
                    other = self._lead(c.path, 0.5 * c.width, ego, npcs)
                    if other is None or (other[0] > cfg.lane_change_trigger_gap and other[1] > v_lead):
                        target = cand
                        break
        if target is None:
            return
        if self._gaps_ok(neighbours[target], ego, npcs):
            st.lane = target
            if target in route:
                st.route_index = route.index(target)
            st.last_change_time = st.time
            st.lane_change_active = True

    def _junction_stop(self, ego, npcs, path: Polyline, s_e: float, half: float,
                       st: PlannerState) -> Optional[float]:
        """Distance to a stop line if the ego should yield, else None."""
        cfg = self.config
        for box, s_in, _s_out in st._junction_spans:
            to_line = s_in - s_e - 0.5 * ego.length - 1.0
            if to_line <= 0.0 or to_line > cfg.junction_horizon:
                continue
            # too late to stop comfortably: commit
            if to_line < ego.speed**2 / (2.0 * cfg.comfort_decel):
                continue
            if self._conflict(ego, npcs, path, half, box):
                return to_line
        return None

    def _conflict(self, ego, npcs, path: Polyline, half: float, box) -> bool:
        cfg = self.config
        for n in npcs:
            if math.hypot(n.x - ego.x, n.y - ego.y) > cfg.lookahead:
                continue
            _, d_n = path.project((n.x, n.y))
            if abs(d_n) < half and abs(angle_diff(n.heading, ego.heading)) < 0.5:
                continue  # same-corridor traffic is handled by car following
            c, s = math.cos(n.heading), math.sin(n.heading)
            tau = 0.0
            while tau <= cfg.yield_time + 1e-9:
                if box.contains(n.x + c * n.speed * tau, n.y + s * n.speed * tau, margin=1.0):
                    return True
                tau += 0.5
        return False


def _sample_s(path: Polyline, step: float = 0.5):
    n = int(path.length / step) + 1
    return [i * step for i in range(n + 1)]


def plan(ego: VehicleState, npcs: Sequence[VehicleState], spec: ScenarioSpec,
         config: Optional[PlannerConfig] = None, state: Optional[PlannerState] = None) -> tuple[float, float]:
    """One-shot functional form of `EgoPlanner.plan`."""
    planner = EgoPlanner(config)
    st = state or planner.start(spec)
    return planner.plan(ego, npcs, spec, st)
