"""Turn a trace into the binary scenario matrix used for causal discovery.

Each sampled instant contributes one column made of three blocks:

* scene: occupancy of the m x n polar cells around the ego (cell i*n + j is
  sector i, ring j; sector 0 starts at the ego's right and sectors run
  counter-clockwise),
* action: [accelerate, decelerate, turn left, turn right, maintain],
* violation: [ego at fault, NPC at fault].
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .geometry import angle_diff
from .scenario import VehicleState
from .sim import Trace

ACTION_NAMES = ("acc", "dec", "left", "right", "keep")
VIOLATION_NAMES = ("f_ego", "f_npc")


class TraceTooShortError(ValueError):
    pass


@dataclass(frozen=True)
class AbstractionConfig:
    m: int = 8
    n: int = 4
    perception_range: float = 50.0
    accel_threshold: float = 0.1
    decel_threshold: float = -0.1
    heading_threshold: float = 0.1
    stride: int = 1
    # heading change is measured against the ego state this many steps earlier
    heading_window: int = 10

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be >= 1")
        if self.perception_range <= 0:
            raise ValueError("perception_range must be positive")
        if not self.decel_threshold < 0 < self.accel_threshold:
            raise ValueError("need decel_threshold < 0 < accel_threshold")
        if self.heading_threshold <= 0:
            raise ValueError("heading_threshold must be positive")
        if self.stride < 1 or self.heading_window < 1:
            raise ValueError("stride and heading_window must be >= 1")

    @property
    def n_scene(self) -> int:
        return self.m * self.n

    @property
    def n_vars(self) -> int:
        return self.m * self.n + len(ACTION_NAMES) + len(VIOLATION_NAMES)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Optional[dict]) -> "AbstractionConfig":
        d = dict(d or {})
        ints = {"m", "n", "stride", "heading_window"}
        return cls(**{k: (int(v) if k in ints else float(v)) for k, v in d.items()})


def variable_labels(cfg: AbstractionConfig) -> list[str]:
    scene = [f"sr{i * cfg.n + j}" for i in range(cfg.m) for j in range(cfg.n)]
    return scene + list(ACTION_NAMES) + list(VIOLATION_NAMES)


def scene_cell(ego: VehicleState, x: float, y: float, cfg: AbstractionConfig) -> Optional[int]:
    """Cell index of a point around the ego, or None if out of range."""
    dx, dy = x - ego.x, y - ego.y
    dist = math.hypot(dx, dy)
    if dist > cfg.perception_range:
        return None
    if dist < 1e-9:
        return 0  # bearing undefined on top of the ego
    c, s = math.cos(ego.heading), math.sin(ego.heading)
    y_loc = dx * c + dy * s  # along the ego heading
    x_loc = dx * s - dy * c  # towards the ego's right
    theta = math.atan2(y_loc, x_loc) % (2.0 * math.pi)
    sector = min(int(theta / (2.0 * math.pi / cfg.m)), cfg.m - 1)
    ring = min(int(dist / (cfg.perception_range / cfg.n)), cfg.n - 1)
    return sector * cfg.n + ring


def abstract_scene(ego: VehicleState, npcs: Sequence[VehicleState], cfg: AbstractionConfig) -> np.ndarray:
    vec = np.zeros(cfg.n_scene, dtype=np.int8)
    for npc in npcs:
        cell = scene_cell(ego, npc.x, npc.y, cfg)
        if cell is not None:
            vec[cell] = 1
    return vec


def abstract_action(prev: Optional[VehicleState], cur: VehicleState, cfg: AbstractionConfig) -> np.ndarray:
    """Binary action indicators for the ego.

    Turning is judged on the clockwise (compass-style) yaw, i.e. the negated
    simulator heading, so a right turn is a positive yaw change.
    """
    if prev is None:
        return np.zeros(len(ACTION_NAMES), dtype=np.int8)
    acc = int(cur.accel >= cfg.accel_threshold)
    dec = int(cur.accel <= cfg.decel_threshold)
    yaw_change = -angle_diff(cur.heading, prev.heading)
    left = int(-yaw_change >= cfg.heading_threshold)
    right = int(yaw_change >= cfg.heading_threshold)
    keep = int(not (acc or dec or left or right))
    return np.array([acc, dec, left, right, keep], dtype=np.int8)


def abstract_violation(fault: Sequence[int]) -> np.ndarray:
    f_e, f_n = int(fault[0]), int(fault[1])
    if f_e and f_n:
        raise ValueError("a collision is blamed on exactly one party")
    return np.array([f_e, f_n], dtype=np.int8)


def sample_indices(length: int, stride: int) -> list[int]:
    idx = list(range(0, length, stride))
    if idx[-1] != length - 1:
        idx.append(length - 1)
    return idx


@dataclass
class ScenarioMatrix:
    """u x q binary matrix with row labels; columns are sampled instants."""

    data: np.ndarray
    labels: list[str]
    steps: list[int]
    config: AbstractionConfig

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["variable"] + [f"t{k}" for k in self.steps])
        for label, row in zip(self.labels, self.data):
            w.writerow([label] + [int(v) for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, config: Optional[AbstractionConfig] = None) -> "ScenarioMatrix":
        rows = list(csv.reader(io.StringIO(text)))
        steps = [int(h[1:]) for h in rows[0][1:]]
        labels = [r[0] for r in rows[1:]]
        data = np.array([[int(v) for v in r[1:]] for r in rows[1:]], dtype=np.int8)
        return cls(data, labels, steps, config or AbstractionConfig())


def abstract_scenario(trace: Trace, cfg: AbstractionConfig) -> ScenarioMatrix:
    if len(trace) == 0:
        raise TraceTooShortError("empty trace")
    steps = sample_indices(len(trace), cfg.stride)
    if len(steps) < 2:
        raise TraceTooShortError(f"trace of {len(trace)} steps gives fewer than 2 samples")
    cols = []
    for k in steps:
        ego = trace.ego_state(k)
        npcs = trace.npc_states(k)
        prev = trace.ego_state(max(0, k - cfg.heading_window)) if k > 0 else None
        cols.append(np.concatenate([
            abstract_scene(ego, npcs, cfg),
            abstract_action(prev, ego, cfg),
            abstract_violation(trace.fault[k]),
        ]))
    return ScenarioMatrix(np.stack(cols, axis=1), variable_labels(cfg), steps, cfg)


def npc_scene_vectors(trace: Trace, k: int, cfg: AbstractionConfig) -> np.ndarray:
    """Scene vectors with only NPC k present, one row per sampled instant (q x m*n)."""
    steps = sample_indices(len(trace), cfg.stride)
    out = np.zeros((len(steps), cfg.n_scene), dtype=np.int8)
    for r, t in enumerate(steps):
        ego = trace.ego_state(t)
        cell = scene_cell(ego, trace.npcs[t, k, 0], trace.npcs[t, k, 1], cfg)
        if cell is not None:
            out[r, cell] = 1
    return out


def scene_vector_of_npc(trace: Trace, t: int, k: int, cfg: AbstractionConfig) -> np.ndarray:
    ego = trace.ego_state(t)
    return abstract_scene(ego, [trace.npc_states(t)[k]], cfg)
