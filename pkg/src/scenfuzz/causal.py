"""ICA-based LiNGAM discovery of scene/action/violation causal graphs,
plus the graph queries the fuzzer needs (sub-blocks, violation signatures,
per-NPC average causal effect).

Conventions: ``W[i, j]`` is the causal strength of the edge x_j -> x_i and
``B[i, j] = 1`` iff that edge is present.
"""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .abstraction import ACTION_NAMES, VIOLATION_NAMES, AbstractionConfig, ScenarioMatrix, npc_scene_vectors
from .ica import SingularWhiteningError, fastica
from .scenario import SCHEMA_VERSION, check_schema
from .sim import Trace

log = logging.getLogger(__name__)

N_ACTION = len(ACTION_NAMES)
N_VIOLATION = len(VIOLATION_NAMES)


@dataclass(frozen=True)
class DiscoveryConfig:
    threshold: float = 0.05
    jitter: float = 1e-3
    seed: int = 0
    max_iter: int = 1000
    tol: float = 1e-6
    # minimum |t| statistic for an edge to survive pruning (0 disables the test)
    min_t: float = 2.0
    # order scene before action before violation variables (scenario matrices only)
    tiered: bool = True

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Optional[dict]) -> "DiscoveryConfig":
        d = dict(d or {})
        ints = {"seed", "max_iter"}
        conv = {k: int for k in ints} | {"tiered": bool}
        return cls(**{k: conv.get(k, float)(v) for k, v in d.items()})


@dataclass
class CausalGraph:
    W: np.ndarray
    B: np.ndarray
    order: list[int]
    labels: list[str]
    n_scene: int
    low_confidence: bool = False
    converged: bool = True
    dropped: list[int] = field(default_factory=list)

    @property
    def n_vars(self) -> int:
        return len(self.labels)

    @property
    def scene_idx(self) -> range:
        return range(0, self.n_scene)

    @property
    def action_idx(self) -> range:
        return range(self.n_scene, self.n_scene + N_ACTION)

    @property
    def violation_idx(self) -> range:
        return range(self.n_scene + N_ACTION, self.n_scene + N_ACTION + N_VIOLATION)

    def edges(self) -> list[tuple[int, int]]:
        """(source, target) pairs of the binary adjacency."""
        tgt, src = np.nonzero(self.B)
        return sorted(zip(src.tolist(), tgt.tolist()))

    def is_dag(self) -> bool:
        return is_acyclic(self.B)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "labels": self.labels,
            "n_scene": self.n_scene,
            "causal_order": [int(i) for i in self.order],
            "low_confidence": self.low_confidence,
            "converged": self.converged,
            "dropped": [int(i) for i in self.dropped],
            "weighted_edges": [
                {"source": self.labels[j], "target": self.labels[i], "weight": float(self.W[i, j])}
                for i, j in zip(*np.nonzero(self.W))
            ],
            "binary_edges": [[self.labels[s], self.labels[t]] for s, t in self.edges()],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CausalGraph":
        check_schema(d, "graph")
        labels = list(d["labels"])
        index = {name: i for i, name in enumerate(labels)}
        u = len(labels)
        W = np.zeros((u, u))
        B = np.zeros((u, u), dtype=np.int8)
        for e in d["weighted_edges"]:
            W[index[e["target"]], index[e["source"]]] = float(e["weight"])
        for s, t in d["binary_edges"]:
            B[index[t], index[s]] = 1
        return cls(W, B, list(d["causal_order"]), labels, int(d["n_scene"]),
                   bool(d.get("low_confidence", False)), bool(d.get("converged", True)),
                   list(d.get("dropped", [])))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def to_edge_list(self) -> str:
        lines = [f"{self.labels[s]} -> {self.labels[t]} {self.W[t, s]:+.4f}" for s, t in self.edges()]
        return "\n".join(lines) + ("\n" if lines else "")

    def to_dot(self) -> str:
        lines = ["digraph G {"]
        for name in self.labels:
            lines.append(f'  "{name}";')
        for s, t in self.edges():
            lines.append(f'  "{self.labels[s]}" -> "{self.labels[t]}" [label="{self.W[t, s]:.3f}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def is_acyclic(B: np.ndarray) -> bool:
    """Kahn's algorithm on the adjacency B (B[i, j] = edge j -> i)."""
    adj = np.asarray(B) != 0
    indeg = adj.sum(axis=1)
    stack = [i for i in range(len(adj)) if indeg[i] == 0]
    seen = 0
    while stack:
        j = stack.pop()
        seen += 1
        for i in np.nonzero(adj[:, j])[0]:
            indeg[i] -= 1
            if indeg[i] == 0:
                stack.append(int(i))
    return seen == len(adj)


def _search_causal_order(m: np.ndarray) -> Optional[list[int]]:
    """Order such that m permuted is strictly lower triangular, if one exists."""
    remaining = list(range(len(m)))
    order = []
    nz = m != 0
    while remaining:
        sub = nz[np.ix_(remaining, remaining)]
        roots = np.nonzero(~sub.any(axis=1))[0]
        if len(roots) == 0:
            return None
        r = remaining[int(roots[0])]
        order.append(r)
        remaining.remove(r)
    return order


def estimate_causal_order(b_hat: np.ndarray) -> list[int]:
    """Zero out the smallest entries of b_hat until a causal order exists.

    Zeroing more entries can only make an order easier to find, so the
    number of zeroed entries is found by bisection.
    """
    u = len(b_hat)
    flat = np.argsort(np.abs(b_hat), axis=None, kind="stable")

    def attempt(k: int) -> Optional[list[int]]:
        m = b_hat.copy()
        m.flat[flat[:k]] = 0.0
        return _search_causal_order(m)

    lo = u * (u + 1) // 2
    hi = u * u
    if (order := attempt(lo)) is not None:
        return order
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if attempt(mid) is None:
            lo = mid
        else:
            hi = mid
    return attempt(hi)


def _ols(y: np.ndarray, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least squares of y on the columns of X with intercept: (coef, |t| stats)."""
    q = len(y)
    A = np.column_stack([X, np.ones(q)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    dof = max(q - A.shape[1], 1)
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.pinv(A.T @ A)
    se = np.sqrt(np.clip(np.diag(cov), 1e-300, None))
    return coef[:-1], np.abs(coef[:-1]) / se[:-1]


def _prune_and_fit(x: np.ndarray, order: Sequence[int], cfg: DiscoveryConfig) -> np.ndarray:
    """Regress each variable on its predecessors, drop weak edges, refit on the rest."""
    u = x.shape[0]
    W = np.zeros((u, u))
    for pos, i in enumerate(order):
        parents = list(order[:pos])
        if not parents:
            continue
        coef, tstat = _ols(x[i], x[parents].T)
        keep = [p for p, c, t in zip(parents, coef, tstat) if abs(c) > cfg.threshold and t >= cfg.min_t]
        if not keep:
            continue
        coef, _ = _ols(x[i], x[keep].T)
        for p, c in zip(keep, coef):
            if abs(c) > cfg.threshold:
                W[i, p] = c
    return W


def lingam(x: np.ndarray, cfg: DiscoveryConfig = DiscoveryConfig(), low_confidence: bool = False,
           tiers: Optional[Sequence[int]] = None, x_fit: Optional[np.ndarray] = None
           ) -> tuple[np.ndarray, list[int], bool]:
    """ICA-LiNGAM on continuous data x (u x q). Returns (W, causal order, converged).

    With `tiers`, the estimated order is stably re-sorted so that lower
    tiers always precede higher ones. Edge weights are regressed on
    `x_fit` when given (e.g. the data before jitter was added).
    """
    u = x.shape[0]
    if u == 1:
        return np.zeros((1, 1)), [0], True
    if low_confidence:
        # too few samples for whitening: keep the (tiered) index order
        order = list(range(u))
        if tiers is not None:
            order = sorted(order, key=lambda i: tiers[i])
        return _prune_and_fit(x if x_fit is None else x_fit, order, cfg), order, False
    unmix, converged = fastica(x, max_iter=cfg.max_iter, tol=cfg.tol, seed=cfg.seed)
    # permute rows so the diagonal has no near-zero entries
    with np.errstate(divide="ignore"):
        cost = 1.0 / np.abs(unmix)
    cost[~np.isfinite(cost)] = 1e300
    rows, cols = linear_sum_assignment(cost)
    perm = np.zeros_like(unmix)
    perm[cols] = unmix[rows]
    perm = perm / np.diag(perm)[:, None]
    b_hat = np.eye(u) - perm
    np.fill_diagonal(b_hat, 0.0)
    order = estimate_causal_order(b_hat)
    if tiers is not None:
        order = sorted(order, key=lambda i: tiers[i])
    W = _prune_and_fit(x if x_fit is None else x_fit, order, cfg)
    return W, order, converged


def _tier(i: int, n_scene: int) -> int:
    if i < n_scene:
        return 0
    return 1 if i < n_scene + N_ACTION else 2


def discover(X, cfg: DiscoveryConfig = DiscoveryConfig(), labels: Optional[Sequence[str]] = None,
             n_scene: Optional[int] = None) -> CausalGraph:
    """Causal graph of a scenario matrix (or a raw u x q array)."""
    if isinstance(X, ScenarioMatrix):
        data = X.data.astype(float)
        labels = X.labels
        n_scene = X.config.n_scene
    else:
        data = np.asarray(X, dtype=float)
        labels = list(labels) if labels is not None else [f"x{i}" for i in range(data.shape[0])]
        n_scene = n_scene if n_scene is not None else 0
    u, q = data.shape
    if q < 2:
        raise ValueError("need at least two samples")
    var = data.var(axis=1)
    live = [i for i in range(u) if var[i] > 0.0]
    dropped = [i for i in range(u) if var[i] == 0.0]
    W = np.zeros((u, u))
    order: list[int] = list(dropped)
    low_conf = q <= len(live)
    converged = True
    if len(live) >= 2:
        x_raw = data[live]
        x = x_raw
        if cfg.jitter > 0:
            x = x + np.random.default_rng(cfg.seed).uniform(-cfg.jitter, cfg.jitter, size=x.shape)
        tiers = None
        if cfg.tiered and n_scene > 0:
            tiers = [_tier(i, n_scene) for i in live]
        w_live, order_live, converged = lingam(x, cfg, low_confidence=low_conf, tiers=tiers,
                                               x_fit=x_raw)
        W[np.ix_(live, live)] = w_live
        order += [live[i] for i in order_live]
    else:
        order += live
    B = (np.abs(W) > cfg.threshold).astype(np.int8)
    W = np.where(B == 1, W, 0.0)
    if low_conf:
        log.debug("discovery on %d samples for %d live variables is low confidence", q, len(live))
    return CausalGraph(W, B, order, list(labels), int(n_scene), low_conf, converged, dropped)


def subgraph_sa(g: CausalGraph) -> np.ndarray:
    """Binary adjacency restricted to scene -> action edges (same shape as B)."""
    out = np.zeros_like(g.B)
    a, s = g.action_idx, g.scene_idx
    out[a.start:a.stop, s.start:s.stop] = g.B[a.start:a.stop, s.start:s.stop]
    return out


def violation_signature(g: CausalGraph) -> frozenset[tuple[str, str]]:
    """Edges into the violation variables, as (source label, target label)."""
    v = set(g.violation_idx)
    return frozenset((g.labels[s], g.labels[t]) for s, t in g.edges() if t in v)


def node_out_strength(g: CausalGraph, i: int) -> float:
    """Sum of |w| over edges leaving variable i towards action/violation variables."""
    targets = list(g.action_idx) + list(g.violation_idx)
    return float(np.abs(g.W[targets, i]).sum())


def out_strengths(g: CausalGraph) -> np.ndarray:
    """`node_out_strength` for every scene cell."""
    targets = list(g.action_idx) + list(g.violation_idx)
    return np.abs(g.W[np.ix_(targets, list(g.scene_idx))]).sum(axis=0)


def ace_from_vectors(scene_vectors: np.ndarray, strengths: np.ndarray) -> float:
    """Average over instants of scene_vector . strengths (rows are instants)."""
    if len(scene_vectors) == 0:
        return 0.0
    return float((scene_vectors @ strengths).mean())


def ace_per_npc(trace: Trace, g: CausalGraph, cfg: AbstractionConfig) -> np.ndarray:
    """Average causal effect of each NPC on the ego."""
    w = out_strengths(g)
    return np.array([ace_from_vectors(npc_scene_vectors(trace, k, cfg), w) for k in range(trace.n_npcs)])


__all__ = ["DiscoveryConfig", "CausalGraph", "SingularWhiteningError", "discover", "lingam",
           "estimate_causal_order", "is_acyclic", "subgraph_sa", "violation_signature",
           "node_out_strength", "out_strengths", "ace_per_npc", "ace_from_vectors"]
