"""Safety oracle and the feedback signals that steer the fuzzer.

* oracle: a run passes iff the ego ends within `arrival_tol` of its
  destination and never touches an NPC bounding box.
* violation degree d = f_collision + f_destination; lower is closer to a
  violation.
* ts / vd: graph novelty as 1 - cosine similarity against a reference set.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .sim import Trace

ARRIVAL_TOL = 1.0
DEST_HORIZON = 10.0

PASSED = "passed"
VIOLATED = "violated"


def _final_distance(trace: Trace, dest: Sequence[float]) -> float:
    x, y = trace.final_position
    return math.hypot(x - dest[0], y - dest[1])


def oracle(trace: Trace, dest: Sequence[float] | None = None, arrival_tol: float = ARRIVAL_TOL) -> str:
    dest = trace.destination if dest is None else dest
    ok = _final_distance(trace, dest) <= arrival_tol and trace.min_bb_distance > 0.0
    return PASSED if ok else VIOLATED


def f_collision(trace: Trace) -> float:
    return max(0.0, float(trace.min_bb_distance))


def f_destination(trace: Trace, dest: Sequence[float] | None = None, horizon: float = DEST_HORIZON) -> float:
    dest = trace.destination if dest is None else dest
    return min(max(horizon - _final_distance(trace, dest), 0.0), horizon)


def violation_degree(trace: Trace, dest: Sequence[float] | None = None) -> float:
    return f_collision(trace) + f_destination(trace, dest)


def graph_distance(b1: np.ndarray, b2: np.ndarray) -> float:
    """1 - cosine similarity of the flattened matrices.

    Zero matrices: distance 0 if both are zero, 1 if only one is.
    """
    a = np.asarray(b1, dtype=float)
    b = np.asarray(b2, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    a, b = a.ravel(), b.ravel()
    dot = float(a @ b)
    na2, nb2 = float(a @ a), float(b @ b)
    if na2 == 0.0 or nb2 == 0.0:
        return 0.0 if na2 == nb2 else 1.0
    # parallel vectors (equal ones, for binary matrices) must give exactly 0:
    # vd admission tests vd > 0 strictly
    if dot > 0 and dot * dot == na2 * nb2:
        return 0.0
    cos = dot / np.sqrt(na2 * nb2)
    return float(min(1.0, max(0.0, 1.0 - cos)))


def min_distance_to_set(b: np.ndarray, S: Iterable[np.ndarray]) -> float:
    """Smallest graph distance from b to a member of S (1 for an empty set)."""
    best = 1.0
    for s in S:
        best = min(best, graph_distance(b, s))
        if best == 0.0:
            break
    return best


@dataclass(frozen=True)
class FeedbackRecord:
    ts: float
    vd: float
    degree: float
    result: str
    f_collision: float
    f_destination: float

    @property
    def violated(self) -> bool:
        return self.result == VIOLATED

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate(trace: Trace, b_sa: np.ndarray, b_sav: np.ndarray, sac_refs: Iterable[np.ndarray],
             savc_refs: Iterable[np.ndarray]) -> FeedbackRecord:
    """All feedback for one execution; ts against SAC members, vd against SAVC members."""
    fc = f_collision(trace)
    fd = f_destination(trace)
    return FeedbackRecord(
        ts=min_distance_to_set(b_sa, sac_refs),
        vd=min_distance_to_set(b_sav, savc_refs),
        degree=fc + fd,
        result=oracle(trace),
        f_collision=fc,
        f_destination=fd,
    )
