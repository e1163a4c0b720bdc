"""GKLS-style test functions with exactly known local and global minima.

A problem is the paraboloid ``||x - T||**2`` on ``[-1, 1]^D`` with vertex
``T`` (value 0), distorted inside ``h - 1`` pairwise disjoint balls
``S_i = {x : ||x - M_i|| <= rho_i}``.  Inside each ball the paraboloid is
replaced by a polynomial in ``s = ||x - M_i||`` and the directional term
``<x - M_i, T - M_i>``, chosen so that ``M_i`` is a strict local minimizer
with value ``f_i`` and the two branches join on the ball boundary:

* ``ND``: continuous, with a cone (term linear in ``s``) at ``M_i``;
* ``D``: continuously differentiable, cubic in ``s``;
* ``D2``: twice continuously differentiable, quintic in ``s``.

Minimizer 1 is the vertex, minimizer 2 the unique global minimizer.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .rng import derive_seed, make_rng

FN_TYPES = ("ND", "D", "D2")

# construction constants (see README, "Generator conventions")
VERTEX_MARGIN = 1e-2
GLOBAL_ATTEMPTS = 10_000
VERTEX_DRAWS = 100
ATTEMPTS_PER_MINIMUM = 1_000
MIN_RADIUS_FRACTION = 0.1
VALUE_GUARD = 1e-3


class GklsError(Exception):
    pass


class InvalidSpec(GklsError, ValueError):
    pass


class PlacementFailure(GklsError):
    def __init__(self, message: str, problem_index: int | None = None):
        super().__init__(message)
        self.problem_index = problem_index


class OutOfDomain(GklsError, ValueError):
    pass


class UnsupportedOperation(GklsError):
    pass


@dataclass(frozen=True)
class GklsSpec:
    """Recipe for a class of problems.

    ``dist_to_vertex`` and ``global_radius`` are Euclidean lengths in domain
    units; the paraboloid vertex value is fixed at 0.
    """

    fn_type: str
    dim: int
    num_minima: int
    global_value: float
    dist_to_vertex: float
    global_radius: float
    class_seed: int = 0

    def validate(self) -> "GklsSpec":
        if self.fn_type not in FN_TYPES:
            raise InvalidSpec(f"unknown fn_type {self.fn_type!r}")
        if int(self.dim) != self.dim or self.dim < 2:
            raise InvalidSpec(f"dim must be an integer >= 2, got {self.dim}")
        if int(self.num_minima) != self.num_minima or self.num_minima < 2:
            raise InvalidSpec(f"num_minima must be an integer >= 2, got {self.num_minima}")
        if not self.global_value < 0:
            raise InvalidSpec("global_value must be strictly negative")
        d, r = self.dist_to_vertex, self.global_radius
        if not (0 < r < d and r < 1):
            raise InvalidSpec(f"need 0 < r < d and r < 1, got d={d}, r={r}")
        # farthest a vertex and a fitting global centre can be apart
        if d > math.sqrt(self.dim) * (2.0 - r - VERTEX_MARGIN):
            raise InvalidSpec(f"d={d} cannot be realized inside [-1, 1]^{self.dim}")
        if not 0 <= self.class_seed < 2**64:
            raise InvalidSpec("class_seed must fit in 64 bits")
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "GklsSpec":
        return cls(
            fn_type=str(data["fn_type"]),
            dim=int(data["dim"]),
            num_minima=int(data["num_minima"]),
            global_value=float(data["global_value"]),
            dist_to_vertex=float(data["dist_to_vertex"]),
            global_radius=float(data["global_radius"]),
            class_seed=int(data.get("class_seed", 0)),
        )


@dataclass(frozen=True)
class Minimizer:
    location: tuple[float, ...]
    radius: float
    value: float


def problem_seed(spec: GklsSpec, problem_index: int) -> int:
    return derive_seed(
        "gkls",
        spec.class_seed,
        spec.fn_type,
        spec.dim,
        spec.num_minima,
        float(spec.global_value),
        float(spec.dist_to_vertex),
        float(spec.global_radius),
        problem_index,
    )


def _paraboloid(diff: np.ndarray):
    # fixed left-to-right coordinate sum so single and batched calls agree bitwise
    total = diff[..., 0] * diff[..., 0]
    for k in range(1, diff.shape[-1]):
        total = total + diff[..., k] * diff[..., k]
    return total


# Ball polynomials are sums of terms  coef * s**m * dot**e  with
# s = ||x - M||, dot = <x - M, T - M>, e in {0, 1}.  Each entry below maps
# (f, A, rho) to the term list, where A = ||T - M||**2 - f.
def _terms_nd(f, A, rho):
    return [(f, 0, 0), (A / rho, 1, 0), (1.0, 2, 0), (-2.0 / rho, 1, 1)]


def _terms_d(f, A, rho):
    return [
        (f, 0, 0),
        (1.0 + 3.0 * A / rho**2, 2, 0),
        (-4.0 / rho, 1, 1),
        (2.0 / rho**2, 2, 1),
        (-2.0 * A / rho**3, 3, 0),
    ]


def _terms_d2(f, A, rho):
    # quadratic coefficient fixed to 1; cubic..quintic solve value, slope and
    # curvature matching on the boundary
    return [
        (f, 0, 0),
        (1.0, 2, 0),
        (10.0 * A / rho**3, 3, 0),
        (-12.0 / rho**2, 2, 1),
        (-15.0 * A / rho**4, 4, 0),
        (16.0 / rho**3, 3, 1),
        (6.0 * A / rho**5, 5, 0),
        (-6.0 / rho**4, 4, 1),
    ]


_TERM_BUILDERS = {"ND": _terms_nd, "D": _terms_d, "D2": _terms_d2}


class GklsProblem:
    """One realized test function.  Immutable after construction."""

    def __init__(
        self,
        spec: GklsSpec,
        problem_index: int,
        seed: int,
        vertex: Sequence[float],
        centers: Sequence[Sequence[float]],
        radii: Sequence[float],
        values: Sequence[float],
    ):
        self.spec = spec
        self.problem_index = int(problem_index)
        self.seed = int(seed)
        self.vertex = np.array(vertex, dtype=float)
        self.centers = np.array(centers, dtype=float).reshape(-1, spec.dim)
        self.radii = np.array(radii, dtype=float)
        self.values = np.array(values, dtype=float)
        for arr in (self.vertex, self.centers, self.radii, self.values):
            arr.flags.writeable = False
        if not (len(self.centers) == len(self.radii) == len(self.values) == spec.num_minima - 1):
            raise InvalidSpec("minimizer arrays do not match num_minima")
        self._offsets = self.vertex - self.centers  # w_i = T - M_i
        self._sq_norm_centers = np.einsum("ij,ij->i", self.centers, self.centers)
        builder = _TERM_BUILDERS[spec.fn_type]
        self._terms = []
        for i in range(len(self.radii)):
            a = float(np.dot(self._offsets[i], self._offsets[i])) - float(self.values[i])
            self._terms.append(builder(float(self.values[i]), a, float(self.radii[i])))

    @property
    def dim(self) -> int:
        return self.spec.dim

    @property
    def global_value(self) -> float:
        return float(self.spec.global_value)

    # evaluation ---------------------------------------------------------------

    def _check_domain(self, x: np.ndarray) -> None:
        if x.shape[-1] != self.dim:
            raise ValueError(f"expected points of dimension {self.dim}, got {x.shape}")
        if not np.all(np.isfinite(x)) or np.any(np.abs(x) > 1.0):
            raise OutOfDomain("point outside [-1, 1]^D")

    def _ball_of(self, x: np.ndarray) -> int:
        y = x - self.centers
        dist = np.sqrt(np.einsum("ij,ij->i", y, y))
        inside = np.flatnonzero(dist <= self.radii)
        return int(inside[0]) if inside.size else -1

    def _ball_value(self, i: int, x: np.ndarray) -> float:
        y = x - self.centers[i]
        s = math.sqrt(float(np.dot(y, y)))
        dot = float(np.dot(y, self._offsets[i]))
        total = 0.0
        for coef, m, e in self._terms[i]:
            total += coef * s**m * (dot if e else 1.0)
        return total

    def distortion_value(self, i: int, points) -> np.ndarray:
        """Polynomial branch of ball ``i`` (0-based, 0 = global) at arbitrary points.

        No membership test is made; used to compare both branches on a boundary.
        """
        X = np.atleast_2d(np.asarray(points, dtype=float))
        y = X - self.centers[i]
        s = np.sqrt(np.einsum("ij,ij->i", y, y))
        dot = y @ self._offsets[i]
        total = np.zeros(len(X))
        for coef, m, e in self._terms[i]:
            total = total + coef * s**m * (dot if e else 1.0)
        return total

    def paraboloid_value(self, points) -> np.ndarray:
        X = np.atleast_2d(np.asarray(points, dtype=float))
        return _paraboloid(X - self.vertex)

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=float)
        self._check_domain(x)
        i = self._ball_of(x)
        if i < 0:
            return float(_paraboloid(x - self.vertex))
        return self._ball_value(i, x)

    __call__ = evaluate

    def evaluate_many(self, points) -> np.ndarray:
        """Vectorized :meth:`evaluate`; bit-identical to calling it row by row."""
        X = np.atleast_2d(np.asarray(points, dtype=float))
        self._check_domain(X)
        out = np.array(_paraboloid(X - self.vertex), dtype=float)
        # cheap screen via the expanded distance, exact test per candidate
        sq = (
            np.einsum("ij,ij->i", X, X)[:, None]
            + self._sq_norm_centers[None, :]
            - 2.0 * X @ self.centers.T
        )
        slack = (self.radii[None, :] + 1e-6) ** 2
        rows = np.flatnonzero(np.any(sq <= slack, axis=1))
        for k in rows:
            i = self._ball_of(X[k])
            if i >= 0:
                out[k] = self._ball_value(i, X[k])
        return out

    def evaluate_gradient(self, x) -> np.ndarray:
        if self.spec.fn_type == "ND":
            raise UnsupportedOperation("gradient is undefined for ND problems")
        x = np.asarray(x, dtype=float)
        self._check_domain(x)
        i = self._ball_of(x)
        if i < 0:
            return 2.0 * (x - self.vertex)
        y = x - self.centers[i]
        w = self._offsets[i]
        s = math.sqrt(float(np.dot(y, y)))
        dot = float(np.dot(y, w))
        grad = np.zeros(self.dim)
        if s == 0.0:
            return grad
        for coef, m, e in self._terms[i]:
            if m == 0:
                continue
            if e:
                # grad(s^m dot) = m s^(m-2) dot y + s^m w
                grad += coef * (m * s ** (m - 2) * dot * y + s**m * w)
            else:
                grad += coef * m * s ** (m - 2) * y
        return grad

    # oracle ---------------------------------------------------------------------

    def known_minima(self) -> list[Minimizer]:
        """All minimizers; entry 0 is the vertex, entry 1 the global minimizer.

        The vertex radius is the largest distance around ``T`` on which the
        function is the undistorted paraboloid.
        """
        gaps = np.linalg.norm(self._offsets, axis=1) - self.radii
        out = [Minimizer(tuple(float(v) for v in self.vertex), float(gaps.min()), 0.0)]
        for c, rho, f in zip(self.centers, self.radii, self.values):
            out.append(Minimizer(tuple(float(v) for v in c), float(rho), float(f)))
        return out

    # serialization --------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "problem_index": self.problem_index,
            "seed": self.seed,
            "vertex": [float(v) for v in self.vertex],
            "minimizers": [
                {"location": [float(v) for v in c], "radius": float(rho), "value": float(f)}
                for c, rho, f in zip(self.centers, self.radii, self.values)
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GklsProblem":
        spec = GklsSpec.from_dict(data["spec"])
        mins = data["minimizers"]
        return cls(
            spec,
            data["problem_index"],
            data["seed"],
            data["vertex"],
            [m["location"] for m in mins],
            [m["radius"] for m in mins],
            [m["value"] for m in mins],
        )

    def to_json(self) -> str:
        # repr-based float output (shortest round-trip, <= 17 significant digits)
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "GklsProblem":
        return cls.from_dict(json.loads(text))

    def __eq__(self, other) -> bool:
        if not isinstance(other, GklsProblem):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self) -> str:
        s = self.spec
        return (
            f"GklsProblem({s.fn_type}, dim={s.dim}, h={s.num_minima}, "
            f"d={s.dist_to_vertex}, r={s.global_radius}, index={self.problem_index})"
        )


def generate_problem(spec: GklsSpec, problem_index: int) -> GklsProblem:
    """Build problem ``problem_index`` of the class described by ``spec``.

    Deterministic in ``(spec, problem_index)``.  Raises :class:`PlacementFailure`
    when the disjoint attraction balls cannot be placed within the attempt caps.
    """
    spec.validate()
    if problem_index < 1:
        raise InvalidSpec("problem_index is 1-based")
    seed = problem_seed(spec, problem_index)
    rng = make_rng(seed)
    D = spec.dim
    d, r, fstar = spec.dist_to_vertex, spec.global_radius, spec.global_value

    # vertex first, then up to GLOBAL_ATTEMPTS directions for it; a fresh
    # vertex is drawn only when none of those directions fits
    for _ in range(VERTEX_DRAWS):
        vertex = rng.uniform(-1.0 + VERTEX_MARGIN, 1.0 - VERTEX_MARGIN, D)
        directions = rng.standard_normal((GLOBAL_ATTEMPTS, D))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        fits = np.all(np.abs(vertex + d * directions) + r <= 1.0, axis=1)
        if fits.any():
            gmin = vertex + d * directions[int(np.argmax(fits))]
            break
    else:
        raise PlacementFailure(
            f"global minimizer does not fit for {VERTEX_DRAWS} vertices x "
            f"{GLOBAL_ATTEMPTS} directions", problem_index
        )

    h = spec.num_minima
    centers = np.empty((h - 1, D))
    radii = np.empty(h - 1)
    values = np.empty(h - 1)
    centers[0], radii[0], values[0] = gmin, r, fstar
    placed = 1
    guard = VALUE_GUARD * abs(fstar)
    floor = MIN_RADIUS_FRACTION * r
    cap = ATTEMPTS_PER_MINIMUM * h
    attempts = 0
    while placed < h - 1:
        attempts += 1
        if attempts > cap:
            raise PlacementFailure(
                f"placed {placed + 1} of {h} minima in {cap} attempts", problem_index
            )
        cand = rng.uniform(-1.0, 1.0, D)
        u_radius = rng.random()
        u_value = rng.random()
        if np.any(np.abs(cand) >= 1.0):
            continue
        to_vertex = float(np.linalg.norm(cand - vertex))
        gaps = np.linalg.norm(centers[:placed] - cand, axis=1) - radii[:placed]
        rho_max = min(to_vertex, float(gaps.min()), r)
        if rho_max < floor:
            continue
        rho = rho_max * (MIN_RADIUS_FRACTION + (1.0 - MIN_RADIUS_FRACTION) * u_radius)
        if not (0.0 < rho < rho_max):
            continue
        lo = fstar + guard
        hi = (to_vertex - rho) ** 2 - guard
        if not lo < hi:
            continue
        centers[placed], radii[placed] = cand, rho
        values[placed] = lo + (hi - lo) * u_value
        placed += 1

    return GklsProblem(spec, problem_index, seed, vertex, centers, radii, values)


@dataclass
class MinimaStats:
    bin_edges: np.ndarray
    frequencies: np.ndarray
    negative_counts: list[int]
    scatter: list[tuple[int, int]] = field(default_factory=list)


def local_minima_stats(problems: Iterable[GklsProblem], bin_edges=None) -> MinimaStats:
    """Histogram of all minimizer values and per-problem counts of negative minima.

    ``frequencies`` are relative (they sum to 1 when every value falls inside
    ``bin_edges``).  ``scatter`` holds ``(h, count < 0)`` pairs.
    """
    problems = list(problems)
    if not problems:
        raise ValueError("need at least one problem")
    all_values = []
    counts = []
    scatter = []
    for p in problems:
        vals = np.concatenate([[0.0], p.values])
        all_values.append(vals)
        n_neg = int(np.count_nonzero(vals < 0))
        counts.append(n_neg)
        scatter.append((p.spec.num_minima, n_neg))
    all_values = np.concatenate(all_values)
    if bin_edges is None:
        lo = min(float(all_values.min()), -1.0)
        bin_edges = np.linspace(lo, max(float(all_values.max()), 0.0) + 1e-12, 21)
    hist, edges = np.histogram(all_values, bins=np.asarray(bin_edges, dtype=float))
    return MinimaStats(edges, hist / len(all_values), counts, scatter)
