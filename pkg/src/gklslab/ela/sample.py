from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import make_rng

SAMPLES_PER_DIM = 250


@dataclass(frozen=True)
class Sample:
    points: np.ndarray
    values: np.ndarray
    seed: int

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def draw_sample(target, n: int | None = None, seed: int = 0, dim: int | None = None) -> Sample:
    """Uniform sample of ``n`` points in [-1, 1]^D with their values.

    ``target`` is a GklsProblem or any callable mapping a point to a value
    (``dim`` is then required).  ``n`` defaults to 250 * D.
    """
    if hasattr(target, "evaluate_many"):
        dim = target.dim
        batch = target.evaluate_many
    else:
        if dim is None:
            raise ValueError("dim is required for a plain function")

        def batch(X):
            return np.array([float(target(x)) for x in X])

    n = SAMPLES_PER_DIM * dim if n is None else int(n)
    if n < 2:
        raise ValueError("a sample needs at least 2 points")
    X = make_rng(seed).uniform(-1.0, 1.0, (n, dim))
    y = np.asarray(batch(X), dtype=float)
    if not np.all(np.isfinite(y)):
        raise ValueError("target returned non-finite values")
    return Sample(X, y, int(seed))
