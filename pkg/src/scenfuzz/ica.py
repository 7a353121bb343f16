"""Fixed-point ICA (symmetric FastICA, log-cosh contrast) with explicit whitening."""
from __future__ import annotations

import numpy as np


class SingularWhiteningError(np.linalg.LinAlgError):
    pass


def whiten(x: np.ndarray, rcond: float = 1e-10) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Center rows of x (u x q) and whiten them.

    Returns (z, K, mean) with z = K @ (x - mean) having identity covariance.
    Raises SingularWhiteningError if the covariance is numerically singular.
    """
    mean = x.mean(axis=1, keepdims=True)
    xc = x - mean
    cov = xc @ xc.T / x.shape[1]
    evals, evecs = np.linalg.eigh(cov)
    if evals[-1] <= 0 or evals[0] <= rcond * evals[-1]:
        raise SingularWhiteningError(
            f"covariance is singular (eigenvalue ratio {evals[0] / max(evals[-1], 1e-300):.2e})")
    k = (evecs / np.sqrt(evals)) @ evecs.T
    return k @ xc, k, mean


def _sym_decorrelate(w: np.ndarray) -> np.ndarray:
    s, u = np.linalg.eigh(w @ w.T)
    s = np.clip(s, np.finfo(float).tiny, None)
    return (u / np.sqrt(s)) @ u.T @ w


def fastica(x: np.ndarray, max_iter: int = 1000, tol: float = 1e-6, seed: int = 0,
            rcond: float = 1e-10) -> tuple[np.ndarray, bool]:
    """Estimate an unmixing matrix for x (u x q).

    Returns (unmixing, converged) where unmixing @ (x - mean) are the
    estimated independent components. The start point is drawn from a
    generator seeded with `seed`, so results are deterministic.
    """
    z, k, _ = whiten(x, rcond)
    u, q = z.shape
    rng = np.random.default_rng(seed)
    w = _sym_decorrelate(rng.standard_normal((u, u)))
    converged = False
    for _ in range(max_iter):
        wz = w @ z
        g = np.tanh(wz)
        g_prime = 1.0 - g**2
        w_new = g @ z.T / q - g_prime.mean(axis=1)[:, None] * w
        w_new = _sym_decorrelate(w_new)
        lim = np.max(np.abs(np.abs(np.einsum("ij,ij->i", w_new, w)) - 1.0))
        w = w_new
        if lim < tol:
            converged = True
            break
    return w @ k, converged
