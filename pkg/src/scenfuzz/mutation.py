"""Waypoint mutation of NPCs, weighted by their causal effect on the ego."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .scenario import V_MAX, MapSpec, NpcSpec, ScenarioSpec, Waypoint


@dataclass(frozen=True)
class MutationConfig:
    epsilon: float = 0.5
    longitudinal: float = 5.0
    # lateral bound as a fraction of the lane width
    lateral: float = 0.5
    speed: float = 2.0
    waypoint_prob: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must be in [0, 1]")
        if min(self.longitudinal, self.lateral, self.speed) <= 0:
            raise ValueError("jitter bounds must be positive")
        if not 0.0 < self.waypoint_prob <= 1.0:
            raise ValueError("waypoint_prob must be in (0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Optional[dict]) -> "MutationConfig":
        return cls(**{k: float(v) for k, v in dict(d or {}).items()})


def selection_probabilities(ace: Sequence[float]) -> np.ndarray:
    """Per-NPC mutation probability ACE_k / sum(ACE), uniform if the sum is zero."""
    a = np.clip(np.asarray(ace, dtype=float), 0.0, None)
    total = a.sum()
    if len(a) == 0:
        return a
    if total <= 0.0 or not np.isfinite(total):
        return np.full(len(a), 1.0 / len(a))
    return a / total


def select_npcs(ace: Sequence[float], cfg: MutationConfig, rng: np.random.Generator) -> tuple[list[int], bool]:
    """Indices of the NPCs to mutate and whether the exploring (uniform) branch was taken.

    Each NPC is drawn independently; the draw is repeated until at least
    one NPC is selected.
    """
    k = len(ace)
    if k == 0:
        raise ValueError("scenario has no NPCs to mutate")
    explore = bool(rng.random() < cfg.epsilon)
    p = np.full(k, 1.0 / k) if explore else selection_probabilities(ace)
    while True:
        chosen = np.nonzero(rng.random(k) < p)[0]
        if len(chosen):
            return chosen.tolist(), explore


def _clip_to_map(m: MapSpec, start: tuple[float, float], end: tuple[float, float]) -> tuple[float, float]:
    """Farthest on-map point on the segment start -> end (start must be on the map)."""
    if m.on_map(*end):
        return end
    lo, hi = 0.0, 1.0
    for _ in range(20):
        mid = 0.5 * (lo + hi)
        p = (start[0] + mid * (end[0] - start[0]), start[1] + mid * (end[1] - start[1]))
        if m.on_map(*p):
            lo = mid
        else:
            hi = mid
    return (start[0] + lo * (end[0] - start[0]), start[1] + lo * (end[1] - start[1]))


def jitter_waypoint(w: Waypoint, m: MapSpec, cfg: MutationConfig, rng: np.random.Generator) -> Waypoint:
    lane, s, d = m.locate(w.x, w.y)
    path = lane.path
    s_new = float(np.clip(s + rng.uniform(-cfg.longitudinal, cfg.longitudinal), 0.0, path.length))
    base = path.point_at(s_new, float(np.clip(d, -0.5 * lane.width, 0.5 * lane.width)))
    if not m.on_map(*base):
        base = (w.x, w.y)
    lat = cfg.lateral * lane.width
    d_new = d + rng.uniform(-lat, lat)
    target = path.point_at(s_new, d_new)
    x, y = _clip_to_map(m, base, target)
    v = float(np.clip(w.speed + rng.uniform(-cfg.speed, cfg.speed), 0.0, V_MAX))
    return Waypoint(round(x, 6), round(y, 6), round(v, 6))


def mutate_npc(npc: NpcSpec, m: MapSpec, cfg: MutationConfig, rng: np.random.Generator) -> NpcSpec:
    """Jitter each waypoint with probability waypoint_prob (at least one is jittered)."""
    n = len(npc.waypoints)
    while True:
        mask = rng.random(n) < cfg.waypoint_prob
        if mask.any():
            break
    wps = [jitter_waypoint(w, m, cfg, rng) if hit else w for w, hit in zip(npc.waypoints, mask)]
    out = [wps[0]]
    for w in wps[1:]:
        # near-coincident consecutive waypoints carry no heading information
        if math.hypot(w.x - out[-1].x, w.y - out[-1].y) > 0.5:
            out.append(w)
    if len(out) < 2:
        out = list(npc.waypoints)
    return replace(npc, waypoints=tuple(out))


def mutate_spec(spec: ScenarioSpec, indices: Sequence[int], cfg: MutationConfig,
                rng: np.random.Generator) -> ScenarioSpec:
    npcs = list(spec.npcs)
    for k in indices:
        npcs[k] = mutate_npc(npcs[k], spec.map, cfg, rng)
    out = spec.with_npcs(npcs)
    out.validate()
    return out


def causal_adaptive_mutation(spec: ScenarioSpec, ace: Sequence[float], cfg: MutationConfig,
                             rng: np.random.Generator) -> ScenarioSpec:
    """Mutate NPCs chosen by the epsilon-greedy ACE-weighted rule."""
    if len(ace) != len(spec.npcs):
        raise ValueError(f"{len(ace)} ACE values for {len(spec.npcs)} NPCs")
    chosen, _ = select_npcs(ace, cfg, rng)
    return mutate_spec(spec, chosen, cfg, rng)


def uniform_mutation(spec: ScenarioSpec, cfg: MutationConfig, rng: np.random.Generator) -> ScenarioSpec:
    """Baseline operator: NPCs picked uniformly, no causal weighting."""
    return causal_adaptive_mutation(spec, np.zeros(len(spec.npcs)), replace(cfg, epsilon=1.0), rng)
