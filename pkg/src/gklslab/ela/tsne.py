"""Exact t-SNE (no Barnes-Hut), deterministic for a given input and seed.

Step-size convention as in bhtsne: the gradient is taken without the
constant factor 4, so learning rate 200 here equals 50 in scikit-learn.

All per-row arithmetic is written so that identical input rows get
bit-identical affinities and gradients; otherwise rounding noise between
duplicates is amplified by the early-exaggeration phase.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ..rng import make_rng

PERPLEXITY_TOL = 1e-5
BISECTION_STEPS = 200
EXAGGERATION = 12.0
EXAGGERATION_ITERS = 250
MOMENTUM_SWITCH = 250
LEARNING_RATE = 200.0
MIN_GAIN = 0.01
INIT_STD = 1e-4


class PerplexityTooLarge(ValueError):
    pass


@dataclass
class TsneResult:
    embedding: np.ndarray
    kl: np.ndarray  # KL divergence after every iteration (exaggeration removed)


def _sq_distances(X):
    return cdist(X, X, "sqeuclidean")


def conditional_affinities(X, perplexity: float) -> np.ndarray:
    """Row-stochastic Gaussian affinities with per-row precision found by
    bisection so that each row's entropy equals log(perplexity)."""
    D = _sq_distances(np.asarray(X, dtype=float))
    n = len(D)
    target = np.log(perplexity)
    P = np.zeros((n, n))
    for i in range(n):
        row = D[i]
        others = np.arange(n) != i
        d = np.sort(row[others])  # sorted, so the search ignores row order
        beta, lo, hi = 1.0, 0.0, np.inf
        for _ in range(BISECTION_STEPS):
            w = np.exp(-(d - d[0]) * beta)
            total = w.sum()
            p = w / total
            H = -np.sum(p[p > 0] * np.log(p[p > 0]))
            if abs(H - target) < PERPLEXITY_TOL:
                break
            if H > target:
                lo = beta
                beta = beta * 2.0 if hi == np.inf else (beta + hi) / 2.0
            else:
                hi = beta
                beta = (beta + lo) / 2.0
        P[i, others] = np.exp(-(row[others] - d[0]) * beta) / total
    return P


def _kl(P, Q):
    mask = P > 0
    return float(np.sum(P[mask] * np.log(P[mask] / Q[mask])))


def tsne_embed(X, perplexity: float = 30.0, iterations: int = 1000, seed: int = 0,
               return_result: bool = False):
    X = np.asarray(X, dtype=float)
    n = len(X)
    if n < 10:
        raise ValueError("t-SNE needs at least 10 rows")
    if not 0 < perplexity < (n - 1) / 3:
        raise PerplexityTooLarge(f"perplexity {perplexity} must be below (rows - 1)/3 = {(n - 1) / 3:.3g}")

    P = conditional_affinities(X, perplexity)
    P = (P + P.T) / (2.0 * n)
    P = np.maximum(P, 1e-12)

    # PCA initialisation, first coordinate scaled to standard deviation 1e-4
    Xc = X - X.mean(axis=0)
    _, s, Vt = np.linalg.svd(Xc, full_matrices=False)
    V = np.zeros((X.shape[1], 2))
    V[:, : min(2, len(Vt))] = Vt[:2].T
    Y = (Xc[:, :, None] * V[None, :, :]).sum(axis=1)
    if np.std(Y[:, 0]) > 0 and np.std(Y[:, 1]) > 0:
        Y = Y / np.std(Y[:, 0]) * INIT_STD
    else:
        # degenerate input: fall back to a seeded random start
        Y = make_rng(seed).normal(0.0, INIT_STD, (n, 2))

    update = np.zeros_like(Y)
    gains = np.ones_like(Y)
    kl = np.empty(iterations)
    for it in range(iterations):
        exag = EXAGGERATION if it < EXAGGERATION_ITERS else 1.0
        momentum = 0.5 if it < MOMENTUM_SWITCH else 0.8
        num = 1.0 / (1.0 + _sq_distances(Y))
        np.fill_diagonal(num, 0.0)
        Q = np.maximum(num / num.sum(), 1e-12)
        W = (exag * P - Q) * num
        grad = (W[:, :, None] * (Y[:, None, :] - Y[None, :, :])).sum(axis=1)
        same = np.sign(grad) == np.sign(update)
        gains = np.where(same, gains * 0.8, gains + 0.2)
        np.maximum(gains, MIN_GAIN, out=gains)
        update = momentum * update - LEARNING_RATE * gains * grad
        Y = Y + update
        Y = Y - Y.mean(axis=0)
        kl[it] = _kl(P, Q)
    if return_result:
        return TsneResult(Y, kl)
    return Y
