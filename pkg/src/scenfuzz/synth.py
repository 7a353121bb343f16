"""Synthetic linear non-Gaussian acyclic data with known ground truth."""
from __future__ import annotations

import warnings
from typing import Optional

import numpy as np

from .causal import is_acyclic

NOISE_KINDS = ("uniform", "laplace", "exponential", "gaussian")


class NonIdentifiableWarning(UserWarning):
    pass


def noise(kind: str, shape, rng: np.random.Generator) -> np.ndarray:
    """Zero-mean noise of the given kind."""
    if kind == "uniform":
        return rng.uniform(-1.0, 1.0, shape)
    if kind == "laplace":
        return rng.laplace(0.0, 1.0, shape)
    if kind == "exponential":
        return rng.exponential(1.0, shape) - 1.0
    if kind == "gaussian":
        warnings.warn("Gaussian noise makes the causal direction non-identifiable", NonIdentifiableWarning,
                      stacklevel=3)
        return rng.standard_normal(shape)
    raise ValueError(f"unknown noise kind {kind!r}; choose from {', '.join(NOISE_KINDS)}")


def sample(W: np.ndarray, q: int, kind: str = "uniform", seed: int = 0) -> np.ndarray:
    """Draw q samples of x = W x + e; returns a u x q array."""
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValueError("W must be square")
    if not is_acyclic(W != 0) or np.any(np.diag(W) != 0):
        raise ValueError("W must describe an acyclic graph")
    if q < 1:
        raise ValueError("q must be positive")
    rng = np.random.default_rng(seed)
    e = noise(kind, (W.shape[0], q), rng)
    return np.linalg.solve(np.eye(len(W)) - W, e)


def chain(u: int, rng: np.random.Generator, lo: float = 0.5, hi: float = 1.5,
          perm: Optional[np.ndarray] = None) -> np.ndarray:
    """Chain x_p0 -> x_p1 -> ... with random signed weights, |w| in [lo, hi]."""
    perm = rng.permutation(u) if perm is None else perm
    W = np.zeros((u, u))
    for a, b in zip(perm[:-1], perm[1:]):
        W[b, a] = rng.uniform(lo, hi) * rng.choice([-1.0, 1.0])
    return W


def random_dag(u: int, rng: np.random.Generator, p_edge: float = 0.4, lo: float = 0.5,
               hi: float = 1.5) -> np.ndarray:
    perm = rng.permutation(u)
    W = np.zeros((u, u))
    for i in range(u):
        for j in range(i):
            if rng.random() < p_edge:
                W[perm[i], perm[j]] = rng.uniform(lo, hi) * rng.choice([-1.0, 1.0])
    return W


def shd(b1: np.ndarray, b2: np.ndarray) -> int:
    """Structural Hamming distance; a reversed edge counts once."""
    a = np.asarray(b1) != 0
    b = np.asarray(b2) != 0
    diff = a != b
    # a reversal shows up as two mismatches; count it once
    rev = diff & diff.T & (a | a.T) & (b | b.T)
    return int(diff.sum() - np.triu(rev).sum())
